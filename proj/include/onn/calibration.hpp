#pragma once

// Coupling-strength calibration: OLS fitting of DOM against the ideal dot
// product, the K sweep that maximizes fit quality, and locking-range
// measurement.

#include <cstdint>
#include <span>
#include <vector>

#include "onn/dynamics.hpp"
#include "onn/encoding.hpp"

namespace onn {

/// One calibration case: a fragment/kernel pair with its dot product.
struct Case {
    Fragment25 fragment;
    Kernel25 kernel;
    double ideal_dot = 0.0;
};

/// >= 2 cases whose ideal_dot values are not all identical.
struct CaseSet {
    std::vector<Case> cases;
};

/// Throws std::invalid_argument if the fit would be ill-posed.
void validate_cases(const CaseSet& set);

struct FitResult {
    double slope = 0.0;      // volts per dot-product unit
    double intercept = 0.0;  // volts
    double r2 = 0.0;         // [0, 1]
    bool degenerate = false; // ys carried no variance; slope 0, r2 0
};

/// Ordinary least squares of ys on xs with r2 = 1 - SS_res/SS_tot.
/// Throws std::invalid_argument for < 2 points or xs all equal; ys all
/// equal yields slope 0, r2 0 and the degenerate flag instead.
FitResult linear_fit(std::span<const double> xs, std::span<const double> ys);

/// Spearman rank correlation (ties get averaged ranks). Returns 0 when
/// either side carries no rank variance. Throws std::invalid_argument on
/// length mismatch or < 2 points.
double spearman(std::span<const double> xs, std::span<const double> ys);

/// Mean DOM per case over seeds_per_case derived seeds, fitted against the
/// ideal dots. Per-rep seed = mix_seed(mix_seed(config.seed, case_index), rep).
FitResult evaluate_correlation(const CaseSet& cases, double coupling_k, const FreqCalib& calib,
                               const SimConfig& config, int seeds_per_case);

/// evaluate_correlation plus the diagnostics the sweep records.
struct CorrelationStats {
    FitResult fit;
    double mean_r_final = 0.0;        // over every run in the evaluation
    std::vector<double> mean_dom;     // per case
};
CorrelationStats correlation_stats(const CaseSet& cases, double coupling_k,
                                   const FreqCalib& calib, const SimConfig& config,
                                   int seeds_per_case);

struct SweepEntry {
    double coupling_k = 0.0;
    FitResult fit;
    double mean_r_final = 0.0;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  // grid order
    double best_k = 0.0;              // grid point of maximal r2, ties -> smallest K
    std::size_t best_index = 0;
};

/// evaluate_correlation at every grid point. Grid must be non-empty and
/// sorted ascending (std::invalid_argument otherwise).
SweepResult sweep_coupling(const CaseSet& cases, std::span<const double> k_grid,
                           const FreqCalib& calib, const SimConfig& config, int seeds_per_case);

/// Critical uniform frequency-spread width below which the array locks, by
/// bisection (25 iterations) on w with omegas evenly spaced over
/// [wbar - w/2, wbar + w/2]. "Locked" = largest per-oscillator mean
/// frequency-drift spread over the last half of a 200/K-ns run stays under
/// 1% of w, majority over `seeds` initial conditions. Simulated in
/// K-normalized time, so the cost is independent of K.
/// Throws std::invalid_argument (coupling_k <= 0, n_active < 2, seeds < 1)
/// and std::runtime_error with the endpoints if the bracket holds no
/// transition.
double locking_threshold(double coupling_k, int n_active, const SimConfig& config, int seeds);

/// Log-spaced grid from k_min to k_max inclusive (points >= 1; singleton
/// grids return {k_min}). Throws std::invalid_argument on bad bounds.
std::vector<double> log_grid(double k_min, double k_max, int points);

}  // namespace onn
