#pragma once

// Phase dynamics of the averager-coupled oscillator array, the gated
// peak detector, and the single-inference pipeline producing a DOM sample.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "onn/encoding.hpp"

namespace onn {

enum class InitMode { uniform_random, ic_quantized };

/// Phases and natural angular frequencies of the array.
struct ArrayState {
    int n_total = kArraySlots;   // physical slots (one stays idle)
    int n_active = kActiveOsc;   // oscillators driven this inference
    std::vector<double> phases;  // rad, wrapped to [0, 2pi)
    std::vector<double> omegas;  // rad/ns, = 2*pi*f with f in GHz
    double coupling_k = 0.0;     // rad/ns
    double t = 0.0;              // ns
};

/// Throws std::invalid_argument on violated invariants
/// (n_active in [1, n_total], sizes match, omegas > 0, coupling_k >= 0).
void validate_state(const ArrayState& s);

struct SimConfig {
    double dt = 0.001;        // ns, integration step
    double t_end = 8.2;       // ns
    double t_del = 2.2;       // ns, detector enable delay after trigger
    double t_int = 6.0;       // ns, integration window before DOM sample
    double tau_rise = 0.5;    // ns
    double tau_leak = 20.0;   // ns
    double amplitude = 0.5;   // volts, oscillator swing A
    std::uint64_t seed = 42;
    InitMode init_mode = InitMode::uniform_random;

    double sample_time() const { return t_del + t_int; }
};

/// Throws std::invalid_argument on violated invariants
/// (0 < dt <= 0.01, t_end >= t_del + t_int, taus > 0, amplitude > 0).
void validate_config(const SimConfig& c);

/// Time series of averager voltage, detector voltage and order parameter.
struct SimTrace {
    std::vector<double> times;  // ns
    std::vector<double> v_avg;  // volts
    std::vector<double> v_pd;   // volts
    std::vector<double> r;      // [0, 1]
};

struct DomResult {
    double dom = 0.0;          // volts, >= 0
    double sample_time = 0.0;  // ns, = t_del + t_int
    double r_final = 0.0;      // order parameter at sample time
    double ideal_dot = 0.0;    // reference dot product for this case
    std::uint64_t seed = 0;    // seed the run used
};

/// Derive a child seed from (base, index) so case order never matters.
/// splitmix64 finalizer over base + (index+1)*golden-gamma.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Initial phases. uniform_random: n independent uniforms on [0, 2pi).
/// ic_quantized: each phase uniform over the 2*stages discrete values
/// {m*pi/stages}, the valid traveling-edge states of an n-inverter ring.
/// Throws std::invalid_argument for stages not in {3,5,7} or n_active < 1.
std::vector<double> init_phases(std::uint64_t seed, InitMode mode, int stages, int n_active);

/// dtheta_i/dt = omega_i + (K/n) * sum_j sin(theta_j - theta_i).
/// Literal pairwise accumulation; the integrator uses an algebraically
/// identical mean-field form.
std::vector<double> kuramoto_rhs(const ArrayState& state);

/// (amplitude / n_active) * sum_i cos(theta_i). n_active must equal the
/// number of phases and be >= 1 (std::invalid_argument otherwise).
double averager(std::span<const double> phases, int n_active, double amplitude);

/// |mean unit phasor| = sqrt(mean-cos^2 + mean-sin^2), clamped to [0, 1].
/// Throws std::invalid_argument on an empty phase list.
double order_parameter(std::span<const double> phases);

/// One dt step of the detector state equation with v_avg held constant:
///   dv/dt = max(0, |v_avg| - v)/tau_rise - v/tau_leak   for t >= t_del,
/// v pinned to 0 while the step starts before t_del. Returns updated v >= 0.
double peak_detect(double v_avg_t, double v_pd, double t, const SimConfig& config);

/// Everything one integration pass can report. trace is filled only when
/// record_every > 0; drift_rate (mean d/dt of theta_i - theta_0 over the
/// last half of the run, rad per time unit) only when requested.
struct EngineResult {
    SimTrace trace;
    std::vector<double> final_phases;
    double v_pd_sample = 0.0;  // linear interpolation at config.sample_time()
    double r_sample = 0.0;
    std::vector<double> drift_rate;
};

/// Classical fixed-step 4th-order run from t=0 to t_end; phases wrapped to
/// [0, 2pi) after each step; v_pd evolved concurrently and gated at t_del.
/// Throws std::runtime_error naming the step index if a phase goes
/// non-finite.
EngineResult run_engine(const ArrayState& state, const SimConfig& config, int record_every,
                        bool want_drift);

/// Trace-producing wrapper around run_engine. record_every >= 1; the trace
/// keeps every record_every-th step plus t = 0 and t = t_end.
SimTrace integrate(const ArrayState& state, const SimConfig& config, int record_every);

/// Full single-inference pipeline: encode differences, map codes to
/// frequencies, draw initial phases from config.seed, integrate, sample the
/// detector at t_del + t_int (linear interpolation between steps).
/// coupling_k is the array coupling K in rad/ns.
DomResult run_inference(const Fragment25& f, const Kernel25& kern, const FreqCalib& calib,
                        const SimConfig& config, double coupling_k);

/// run_inference that also keeps the recorded trace.
struct InferenceRun {
    DomResult dom;
    SimTrace trace;
};
InferenceRun run_inference_traced(const Fragment25& f, const Kernel25& kern,
                                  const FreqCalib& calib, const SimConfig& config,
                                  double coupling_k, int record_every);

InitMode parse_init_mode(const std::string& name);  // std::invalid_argument on unknown
std::string init_mode_name(InitMode m);

}  // namespace onn
