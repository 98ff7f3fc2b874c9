#include "onn/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "phase_trig.hpp"

namespace onn {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_2pi(double th) {
    th -= kTwoPi * std::floor(th / kTwoPi);
    if (th >= kTwoPi) th = 0.0;  // guard the th/2pi rounding edge
    return th;
}

// uniform double in [0,1) with 53 random bits; avoids the
// implementation-defined std::uniform_real_distribution
double next_unit(std::mt19937_64& eng) { return double(eng() >> 11) * 0x1.0p-53; }

}  // namespace

void validate_state(const ArrayState& s) {
    if (s.n_active < 1 || s.n_active > s.n_total)
        throw std::invalid_argument("n_active must lie in [1, n_total]");
    if (s.phases.size() != std::size_t(s.n_active) || s.omegas.size() != std::size_t(s.n_active))
        throw std::invalid_argument("phases/omegas size must equal n_active");
    if (s.coupling_k < 0.0) throw std::invalid_argument("coupling_k must be >= 0");
    for (double w : s.omegas)
        if (!(w > 0.0)) throw std::invalid_argument("all omegas must be positive");
}

void validate_config(const SimConfig& c) {
    if (!(c.dt > 0.0) || c.dt > 0.01)
        throw std::invalid_argument("dt must lie in (0, 0.01] ns");
    if (!(c.tau_rise > 0.0) || !(c.tau_leak > 0.0))
        throw std::invalid_argument("detector time constants must be positive");
    if (!(c.amplitude > 0.0)) throw std::invalid_argument("amplitude must be positive");
    if (c.t_del < 0.0 || c.t_int < 0.0)
        throw std::invalid_argument("t_del and t_int must be non-negative");
    if (c.t_end < c.t_del + c.t_int)
        throw std::invalid_argument("t_end must be >= t_del + t_int");
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over a golden-gamma stream offset
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::vector<double> init_phases(std::uint64_t seed, InitMode mode, int stages, int n_active) {
    if (stages != 3 && stages != 5 && stages != 7)
        throw std::invalid_argument("stages must be 3, 5 or 7");
    if (n_active < 1) throw std::invalid_argument("n_active must be >= 1");

    std::mt19937_64 eng(seed);
    std::vector<double> phases(n_active);
    if (mode == InitMode::uniform_random) {
        for (double& th : phases) th = kTwoPi * next_unit(eng);
    } else {
        // one of the 2*stages traveling-edge states of an n-inverter ring
        const std::uint64_t n_states = 2ull * std::uint64_t(stages);
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n_states;
        for (double& th : phases) {
            std::uint64_t x;
            do { x = eng(); } while (x >= limit);
            th = double(x % n_states) * (std::numbers::pi / stages);
        }
    }
    return phases;
}

std::vector<double> kuramoto_rhs(const ArrayState& state) {
    validate_state(state);
    const int n = state.n_active;
    std::vector<double> s(n), c(n), out(n);
    for (int i = 0; i < n; ++i) {
        s[i] = std::sin(state.phases[i]);
        c[i] = std::cos(state.phases[i]);
    }
    const double kn = state.coupling_k / n;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += s[j] * c[i] - c[j] * s[i];  // sin(th_j - th_i)
        out[i] = state.omegas[i] + kn * acc;
    }
    return out;
}

double averager(std::span<const double> phases, int n_active, double amplitude) {
    if (n_active < 1 || std::size_t(n_active) != phases.size())
        throw std::invalid_argument("averager: n_active must match the phase count");
    double acc = 0.0;
    for (double th : phases) acc += std::cos(th);
    double m = acc / n_active;
    if (m > 1.0) m = 1.0;
    if (m < -1.0) m = -1.0;
    return amplitude * m;
}

double order_parameter(std::span<const double> phases) {
    if (phases.empty()) throw std::invalid_argument("order_parameter needs at least one phase");
    double sc = 0.0, ss = 0.0;
    for (double th : phases) {
        sc += std::cos(th);
        ss += std::sin(th);
    }
    const double n = double(phases.size());
    double r = std::sqrt((sc / n) * (sc / n) + (ss / n) * (ss / n));
    if (r > 1.0) r = 1.0;
    if (r < 0.0) r = 0.0;
    return r;
}

double peak_detect(double v_avg_t, double v_pd, double t, const SimConfig& config) {
    if (t < 0.0) throw std::invalid_argument("peak_detect: t must be >= 0");
    if (t < config.t_del) return 0.0;  // detector still disabled at step start

    const double a = std::fabs(v_avg_t);
    auto rhs = [&](double v) {
        double drive = a - v;
        if (drive < 0.0) drive = 0.0;
        return drive / config.tau_rise - v / config.tau_leak;
    };
    const double h = config.dt;
    const double k1 = rhs(v_pd);
    const double k2 = rhs(v_pd + 0.5 * h * k1);
    const double k3 = rhs(v_pd + 0.5 * h * k2);
    const double k4 = rhs(v_pd + h * k3);
    double v = v_pd + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return v < 0.0 ? 0.0 : v;
}

namespace {

// One RK4 stage of the joint (phases, v_pd) system. The coupling sum uses
// the mean-field factorization of kuramoto_rhs:
//   sum_j sin(th_j - th_i) = S*cos(th_i) - C*sin(th_i),  S = sum sin, C = sum cos.
struct Engine {
    int n = 0;
    const double* omegas = nullptr;
    double kn = 0.0;  // K / n
    double inv_n = 0.0;
    double amplitude = 0.0;
    double tau_rise = 0.0, tau_leak = 0.0;
    std::vector<double> s, c;
    double mean_s = 0.0, mean_c = 0.0;  // of the most recent stage() input

    double stage(const double* th, double v, bool gate_on, double* dth, double& dv) {
        detail::sincos_array(th, std::size_t(n), s.data(), c.data());
        double sum_s = 0.0, sum_c = 0.0;
        for (int i = 0; i < n; ++i) {
            sum_s += s[i];
            sum_c += c[i];
        }
        for (int i = 0; i < n; ++i) dth[i] = omegas[i] + kn * (sum_s * c[i] - sum_c * s[i]);
        mean_s = sum_s * inv_n;
        mean_c = sum_c * inv_n;
        if (gate_on) {
            double drive = std::fabs(amplitude * mean_c) - v;
            if (drive < 0.0) drive = 0.0;
            dv = drive / tau_rise - v / tau_leak;
        } else {
            dv = 0.0;
        }
        return mean_c;
    }

    // order parameter / averager of the same instant stage() last saw
    double order() const {
        double r = std::sqrt(mean_s * mean_s + mean_c * mean_c);
        return r > 1.0 ? 1.0 : r;
    }
    double v_avg() const {
        double m = mean_c;
        if (m > 1.0) m = 1.0;
        if (m < -1.0) m = -1.0;
        return amplitude * m;
    }
};

}  // namespace

EngineResult run_engine(const ArrayState& state, const SimConfig& config, int record_every,
                        bool want_drift) {
    validate_state(state);
    validate_config(config);

    const int n = state.n_active;
    const double dt = config.dt;
    const double t_end = config.t_end;
    const double sample_t = config.sample_time();

    Engine eng;
    eng.n = n;
    eng.omegas = state.omegas.data();
    eng.kn = n > 0 ? state.coupling_k / n : 0.0;
    eng.inv_n = 1.0 / n;
    eng.amplitude = config.amplitude;
    eng.tau_rise = config.tau_rise;
    eng.tau_leak = config.tau_leak;
    eng.s.resize(n);
    eng.c.resize(n);

    std::vector<double> th(state.phases), tmp(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n);
    for (double& x : th) x = wrap_2pi(x);

    double v = 0.0;
    double t = 0.0;

    EngineResult out;
    if (record_every > 0) {
        const std::size_t cap = std::size_t(t_end / dt) / std::size_t(record_every) + 3;
        out.trace.times.reserve(cap);
        out.trace.v_avg.reserve(cap);
        out.trace.v_pd.reserve(cap);
        out.trace.r.reserve(cap);
    }

    // drift bookkeeping: unwrapped theta_i - theta_0, continued step to step
    std::vector<double> rel_prev, rel_acc, rel_half;
    const double t_half = 0.5 * t_end;
    double half_mark = -1.0;
    if (want_drift) {
        rel_prev.resize(n);
        rel_acc.assign(n, 0.0);
        rel_half.assign(n, 0.0);
        for (int i = 0; i < n; ++i) rel_prev[i] = th[i] - th[0];
    }

    bool sampled = false;
    double dv1 = 0.0, dv2 = 0.0, dv3 = 0.0, dv4 = 0.0;

    for (std::size_t step = 0;; ++step) {
        const bool gate_on = t >= config.t_del - 1e-12;
        eng.stage(th.data(), v, gate_on, k1.data(), dv1);
        const double r_now = eng.order();
        const double v_avg_now = eng.v_avg();

        if (record_every > 0 &&
            (step % std::size_t(record_every) == 0 || t >= t_end - 1e-12)) {
            out.trace.times.push_back(t);
            out.trace.v_avg.push_back(v_avg_now);
            out.trace.v_pd.push_back(v);
            out.trace.r.push_back(r_now);
        }

        if (!sampled && t >= sample_t - 1e-12) {
            out.v_pd_sample = v;
            out.r_sample = r_now;
            sampled = true;
        }

        if (want_drift && half_mark < 0.0 && t >= t_half - 1e-12) {
            half_mark = t;
            rel_half = rel_acc;
        }

        if (t >= t_end - 1e-12) break;

        double h = dt;
        if (t + h > t_end) h = t_end - t;
        const double prev_t = t, prev_v = v, prev_r = r_now;

        const double h2 = 0.5 * h;
        for (int i = 0; i < n; ++i) tmp[i] = th[i] + h2 * k1[i];
        eng.stage(tmp.data(), v + h2 * dv1, gate_on, k2.data(), dv2);
        for (int i = 0; i < n; ++i) tmp[i] = th[i] + h2 * k2[i];
        eng.stage(tmp.data(), v + h2 * dv2, gate_on, k3.data(), dv3);
        for (int i = 0; i < n; ++i) tmp[i] = th[i] + h * k3[i];
        eng.stage(tmp.data(), v + h * dv3, gate_on, k4.data(), dv4);

        const double h6 = h / 6.0;
        for (int i = 0; i < n; ++i) {
            const double nth = th[i] + h6 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            if (!std::isfinite(nth))
                throw std::runtime_error("non-finite phase at step " + std::to_string(step));
            th[i] = wrap_2pi(nth);
        }
        v += h6 * (dv1 + 2.0 * (dv2 + dv3) + dv4);
        if (v < 0.0) v = 0.0;

        if (want_drift) {
            for (int i = 0; i < n; ++i) {
                const double raw = th[i] - th[0];
                double d = raw - rel_prev[i];
                while (d > std::numbers::pi) d -= kTwoPi;
                while (d < -std::numbers::pi) d += kTwoPi;
                rel_acc[i] += d;
                rel_prev[i] = raw;
            }
        }

        t = prev_t + h;

        if (!sampled && t >= sample_t - 1e-12) {
            // the sample instant fell inside this step; interpolate
            const double r_next = order_parameter(th);
            const double span = t - prev_t;
            double a = span > 0.0 ? (sample_t - prev_t) / span : 1.0;
            if (a < 0.0) a = 0.0;
            if (a > 1.0) a = 1.0;
            out.v_pd_sample = prev_v + a * (v - prev_v);
            out.r_sample = prev_r + a * (r_next - prev_r);
            sampled = true;
        }
    }

    if (want_drift) {
        const double mark = half_mark < 0.0 ? 0.0 : half_mark;
        const double window = t - mark;
        out.drift_rate.resize(n);
        for (int i = 0; i < n; ++i)
            out.drift_rate[i] = window > 0.0 ? (rel_acc[i] - rel_half[i]) / window : 0.0;
    }

    out.final_phases = std::move(th);
    return out;
}

SimTrace integrate(const ArrayState& state, const SimConfig& config, int record_every) {
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    return run_engine(state, config, record_every, false).trace;
}

DomResult run_inference(const Fragment25& f, const Kernel25& kern, const FreqCalib& calib,
                        const SimConfig& config, double coupling_k) {
    return run_inference_traced(f, kern, calib, config, coupling_k, 0).dom;
}

InferenceRun run_inference_traced(const Fragment25& f, const Kernel25& kern,
                                  const FreqCalib& calib, const SimConfig& config,
                                  double coupling_k, int record_every) {
    const CodeVector codes = encode_differences(f, kern);
    const std::vector<double> freqs = codes_to_frequencies(codes, calib);

    ArrayState state;
    state.n_total = kArraySlots;
    state.n_active = kActiveOsc;
    state.omegas.resize(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i) state.omegas[i] = kTwoPi * freqs[i];
    state.phases = init_phases(config.seed, config.init_mode, calib.stages, kActiveOsc);
    state.coupling_k = coupling_k;

    EngineResult res = run_engine(state, config, record_every, false);

    InferenceRun out;
    out.dom.dom = res.v_pd_sample < 0.0 ? 0.0 : res.v_pd_sample;
    out.dom.sample_time = config.sample_time();
    out.dom.r_final = res.r_sample;
    out.dom.ideal_dot = ideal_dot(f, kern);
    out.dom.seed = config.seed;
    out.trace = std::move(res.trace);
    return out;
}

InitMode parse_init_mode(const std::string& name) {
    if (name == "uniform_random") return InitMode::uniform_random;
    if (name == "ic_quantized") return InitMode::ic_quantized;
    throw std::invalid_argument("unknown init_mode: " + name);
}

std::string init_mode_name(InitMode m) {
    return m == InitMode::uniform_random ? "uniform_random" : "ic_quantized";
}

}  // namespace onn
