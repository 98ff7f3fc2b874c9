#pragma once

// End-to-end convolution over images via the oscillator array, comparison
// against the ideal convolution, the 18-case calibration suite, and the
// energy/delay estimate.

#include <cstdint>
#include <string>
#include <vector>

#include "onn/calibration.hpp"
#include "onn/dynamics.hpp"
#include "onn/encoding.hpp"

namespace onn {

enum class ConvMode { ideal, onn };

/// Valid-padding, stride-1 output grid: (width-4) x (height-4).
struct FeatureMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major

    double at(int row, int col) const { return values[std::size_t(row) * width + col]; }
};

struct EnergyModel {
    int n_osc = kArraySlots;   // oscillators powered
    double p_osc = 0.26e-3;    // watts each
    double p_pd = 100e-6;      // peak-detector watts (upper bound)
    double t_inf = 8e-9;       // seconds per inference
};

/// Throws std::invalid_argument unless all fields are positive.
void validate_energy(const EnergyModel& m);

/// Slide the kernel over every valid position. ideal mode: plain dot
/// products. onn mode: run_inference DOM per position with seed
/// mix_seed(config.seed, position_index). Throws std::out_of_range if the
/// image admits no 5x5 window.
FeatureMap convolve(const GrayImage& image, const Kernel25& kern, ConvMode mode,
                    const FreqCalib& calib, const SimConfig& config, double coupling_k);

/// Ideal-mode convolution of an arbitrary signal matrix (row-major, any
/// size >= 5x5); the signal-domain core of convolve, exposed so linearity
/// can be checked directly.
FeatureMap convolve_signals(const std::vector<double>& signals, int width, int height,
                            const Kernel25& kern);

/// OLS fit of onn values against ideal values plus rank statistics.
struct MapComparison {
    FitResult fit;
    double spearman_rho = 0.0;
    bool top1_match = false;  // argmax positions agree (first max on ties)
};

/// Throws std::invalid_argument on dimension mismatch. A constant ideal or
/// onn map yields the degenerate flag rather than an error.
MapComparison compare_maps(const FeatureMap& ideal, const FeatureMap& onn);

/// Deterministic 18-case set spanning the dot-product range: for each of 6
/// kernels (bank used cyclically), (a) the kernel itself, (b) a 50% blend of
/// kernel and seeded noise, (c) pure seeded noise. Noise per case comes from
/// mix_seed(seed, case_index). Throws std::invalid_argument on an empty bank.
CaseSet build_standard_suite(const std::vector<Kernel25>& bank, std::uint64_t seed);

/// (n_osc * p_osc + p_pd) * t_inf, reported in picojoules. Pure formula;
/// field validation happens where models are constructed.
double energy_per_inference(const EnergyModel& m);

/// 10x10 grayscale test image with the kernel written at (row, col) =
/// (2, 3) over a seeded mid-gray background; the embedded block is the
/// kernel mapped through the inverse of gray_to_signal.
GrayImage make_embedded_kernel_image(const Kernel25& kern, std::uint64_t seed);

/// One scatter row per (case, seed) pair, mirroring the DOM-vs-dot plot.
struct ScatterRow {
    int stages = 0;
    double ideal_dot = 0.0;
    double dom = 0.0;
    std::uint64_t seed = 0;
};

/// A named detector trace destined for one CSV file.
struct NamedTrace {
    std::string name;  // file stem, e.g. "trace_case_03"
    SimTrace trace;
};

/// Everything the report emits.
struct ReportInputs {
    std::vector<ScatterRow> scatter;
    std::vector<NamedTrace> traces;
    EnergyModel energy;
    std::uint64_t seed = 0;  // echoed into every file header
};

/// Writes dom_scatter.csv, one CSV per trace, and energy_delay.csv under
/// out_dir (created if missing). Returns the paths written. Throws
/// std::runtime_error on unwritable paths.
std::vector<std::string> write_report(const std::string& out_dir, const ReportInputs& inputs);

}  // namespace onn
