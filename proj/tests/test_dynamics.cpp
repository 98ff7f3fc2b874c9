#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "onn/calibration.hpp"
#include "onn/config.hpp"
#include "onn/dynamics.hpp"
#include "onn/encoding.hpp"
#include "onn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace onn;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double circ_dist(double a, double b) {
    double d = std::fabs(a - b);
    return std::min(d, kTwoPi - d);
}

ArrayState spread_state(double wbar, double spread, double coupling, std::uint64_t seed,
                        int n = kActiveOsc) {
    ArrayState st;
    st.n_active = n;
    st.phases = init_phases(seed, InitMode::uniform_random, 3, n);
    st.omegas.resize(std::size_t(n));
    for (int i = 0; i < n; ++i)
        st.omegas[std::size_t(i)] =
            (n == 1) ? wbar : wbar - spread / 2.0 + spread * i / double(n - 1);
    st.coupling_k = coupling;
    return st;
}

// detector response to a full-wave-rectified locked carrier, averaged over a
// half period: dv/dt = (2/pi)(A sin phi - v phi)/tau_rise - v/tau_leak with
// phi = acos(v/A); dense Euler from the gate time to the sample time
double averaged_detector_prediction(const SimConfig& cfg) {
    const double A = cfg.amplitude;
    double v = 0.0;
    const double h = 1e-5;
    for (double t = cfg.t_del; t < cfg.sample_time(); t += h) {
        double x = std::min(1.0, v / A);
        const double phi = std::acos(x);
        v += h * ((2.0 / kPi) * (A * std::sin(phi) - v * phi) / cfg.tau_rise -
                  v / cfg.tau_leak);
    }
    return v;
}

}  // namespace

TEST_CASE("mix_seed is deterministic and index-sensitive") {
    CHECK(mix_seed(42, 0) == mix_seed(42, 0));
    CHECK(mix_seed(42, 0) != mix_seed(42, 1));
    CHECK(mix_seed(42, 0) != mix_seed(43, 0));
    CHECK(mix_seed(0, 0) != 0);
}

TEST_CASE("init_phases is deterministic and lands in [0, 2pi)") {
    const auto a = init_phases(9, InitMode::uniform_random, 3, 25);
    const auto b = init_phases(9, InitMode::uniform_random, 3, 25);
    REQUIRE(a.size() == 25);
    CHECK(a == b);
    for (double th : a) {
        CHECK(th >= 0.0);
        CHECK(th < kTwoPi);
    }
    CHECK(init_phases(10, InitMode::uniform_random, 3, 25) != a);
}

TEST_CASE("init_phases uniform draws pass a KS test and center on pi") {
    auto ph = init_phases(123, InitMode::uniform_random, 3, 100000);
    std::sort(ph.begin(), ph.end());
    const double n = double(ph.size());
    double ks = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < ph.size(); ++i) {
        const double f = ph[i] / kTwoPi;
        ks = std::max({ks, std::fabs(f - double(i) / n), std::fabs(f - double(i + 1) / n)});
        mean += ph[i];
    }
    mean /= n;
    CHECK(ks < 1.63 / std::sqrt(n));  // 1% critical value
    const double sigma_mean = (kTwoPi / std::sqrt(12.0)) / std::sqrt(n);
    CHECK(std::fabs(mean - kPi) < 3.0 * sigma_mean);
}

TEST_CASE("quantized initial phases sit on the ring's traveling-edge states") {
    for (int stages : {3, 5, 7}) {
        const auto ph = init_phases(77, InitMode::ic_quantized, stages, 6000);
        std::vector<int> counts(std::size_t(2 * stages), 0);
        for (double th : ph) {
            const double m = th / (kPi / stages);
            const long mi = std::lround(m);
            CHECK(std::fabs(m - double(mi)) < 1e-12);
            REQUIRE(mi >= 0);
            REQUIRE(mi < 2 * stages);
            ++counts[std::size_t(mi)];
        }
        // roughly uniform over the 2*stages states
        const double expect = 6000.0 / (2 * stages);
        for (int c : counts) {
            CHECK(double(c) > 0.6 * expect);
            CHECK(double(c) < 1.4 * expect);
        }
    }
}

TEST_CASE("init_phases rejects bad parameters") {
    CHECK_THROWS_AS(init_phases(1, InitMode::ic_quantized, 4, 10), std::invalid_argument);
    CHECK_THROWS_AS(init_phases(1, InitMode::uniform_random, 2, 10), std::invalid_argument);
    CHECK_THROWS_AS(init_phases(1, InitMode::uniform_random, 3, 0), std::invalid_argument);
}

TEST_CASE("decoupled or fully aligned arrays drift at their natural rates") {
    ArrayState st = spread_state(30.0, 4.0, 0.0, 5);
    const auto d0 = kuramoto_rhs(st);
    REQUIRE(d0.size() == st.omegas.size());
    for (std::size_t i = 0; i < d0.size(); ++i) CHECK(d0[i] == st.omegas[i]);

    st.coupling_k = 3.0;
    std::fill(st.phases.begin(), st.phases.end(), 1.234);
    const auto d1 = kuramoto_rhs(st);
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == st.omegas[i]);
}

TEST_CASE("two-oscillator derivative matches the hand value at quarter turn") {
    ArrayState st;
    st.n_active = 2;
    st.phases = {0.0, kPi / 2.0};
    st.omegas = {5.0, 7.0};
    st.coupling_k = 1.6;
    const auto d = kuramoto_rhs(st);
    CHECK(d[0] == doctest::Approx(5.0 + 1.6 / 2.0).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(7.0 - 1.6 / 2.0).epsilon(1e-15));
}

TEST_CASE("kuramoto derivative matches a naive double-loop evaluation") {
    const ArrayState st = spread_state(28.0, 6.0, 2.5, 21);
    const auto d = kuramoto_rhs(st);
    const int n = st.n_active;
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += std::sin(st.phases[j] - st.phases[i]);
        const double want = st.omegas[i] + st.coupling_k / n * acc;
        CHECK(d[i] == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("kuramoto_rhs validates its state") {
    ArrayState st = spread_state(30.0, 1.0, 1.0, 1);
    st.omegas[3] = 0.0;
    CHECK_THROWS_AS(kuramoto_rhs(st), std::invalid_argument);
    st = spread_state(30.0, 1.0, 1.0, 1);
    st.coupling_k = -0.5;
    CHECK_THROWS_AS(kuramoto_rhs(st), std::invalid_argument);
    st = spread_state(30.0, 1.0, 1.0, 1);
    st.phases.pop_back();
    CHECK_THROWS_AS(kuramoto_rhs(st), std::invalid_argument);
    st = spread_state(30.0, 1.0, 1.0, 1);
    st.n_active = 27;
    CHECK_THROWS_AS(kuramoto_rhs(st), std::invalid_argument);
}

TEST_CASE("averager endpoints and second-loop oracle") {
    std::vector<double> zeros(25, 0.0);
    CHECK(averager(zeros, 25, 0.5) == 0.5);

    std::vector<double> even(25);
    for (int i = 0; i < 25; ++i) even[std::size_t(i)] = kTwoPi * i / 25.0;
    CHECK(std::fabs(averager(even, 25, 0.5)) < 1e-12);

    const auto ph = init_phases(31, InitMode::uniform_random, 3, 25);
    double acc = 0.0;
    for (int i = 24; i >= 0; --i) acc += std::cos(ph[std::size_t(i)]);
    CHECK(averager(ph, 25, 0.7) == doctest::Approx(0.7 * acc / 25.0).epsilon(1e-14));
    CHECK(std::fabs(averager(ph, 25, 0.7)) <= 0.7);

    CHECK_THROWS_AS(averager(ph, 24, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(averager(std::vector<double>{}, 0, 0.5), std::invalid_argument);
}

TEST_CASE("order parameter hits its landmark values") {
    std::vector<double> same(25, 2.3);
    CHECK(order_parameter(same) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(order_parameter(same) <= 1.0);

    std::vector<double> even(25);
    for (int i = 0; i < 25; ++i) even[std::size_t(i)] = kTwoPi * i / 25.0;
    CHECK(order_parameter(even) < 1e-12);

    std::vector<double> pair{0.0, kPi};
    CHECK(order_parameter(pair) < 1e-15);

    CHECK_THROWS_AS(order_parameter(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("detector stays silent with no drive and before its gate") {
    SimConfig cfg;
    double v = 0.0;
    for (int i = 0; i < 200; ++i) v = peak_detect(0.0, v, 3.0 + i * cfg.dt, cfg);
    CHECK(v == 0.0);
    // steps starting before t_del pin the state to zero no matter the input
    CHECK(peak_detect(0.9, 0.7, 1.0, cfg) == 0.0);
    CHECK(peak_detect(0.9, 0.7, cfg.t_del - cfg.dt / 2, cfg) == 0.0);
}

TEST_CASE("detector follows the first-order closed form when the leak is off") {
    SimConfig cfg;
    cfg.tau_leak = 1e9;
    const double drive = 0.4;
    double v = 0.0;
    double t = cfg.t_del;
    while (t < 5.0 - 1e-12) {
        v = peak_detect(drive, v, t, cfg);
        t += cfg.dt;
    }
    const double want = drive * (1.0 - std::exp(-(t - cfg.t_del) / cfg.tau_rise));
    CHECK(v == doctest::Approx(want).epsilon(1e-8));
    CHECK(v >= 0.0);
}

TEST_CASE("decoupled single oscillator advances linearly in time") {
    ArrayState st;
    st.n_active = 1;
    st.phases = {1.0};
    st.omegas = {kTwoPi * 4.0};
    st.coupling_k = 0.0;
    SimConfig cfg;
    const auto res = run_engine(st, cfg, 0, false);
    const double want = std::fmod(1.0 + st.omegas[0] * cfg.t_end, kTwoPi);
    CHECK(circ_dist(res.final_phases[0], want) < 1e-10);
}

TEST_CASE("identical frequencies with coupling lock to full coherence") {
    ArrayState st = spread_state(kTwoPi * 4.5, 0.0, 4.0, 13);
    SimConfig cfg;
    const SimTrace tr = integrate(st, cfg, 1);
    REQUIRE(!tr.r.empty());
    CHECK(tr.r.back() >= 0.99);
    CHECK(tr.times.front() == 0.0);
    CHECK(tr.times.back() == doctest::Approx(cfg.t_end).epsilon(1e-12));
}

TEST_CASE("trace respects the recording grid and the detector gate") {
    ArrayState st = spread_state(kTwoPi * 4.5, 3.0, 2.0, 17);
    SimConfig cfg;
    const SimTrace tr = integrate(st, cfg, 7);
    REQUIRE(tr.times.size() >= 3);
    CHECK(tr.times[0] == 0.0);
    CHECK(tr.times[1] == doctest::Approx(7 * cfg.dt).epsilon(1e-12));
    CHECK(tr.times.back() == doctest::Approx(cfg.t_end).epsilon(1e-12));
    REQUIRE(tr.v_pd.size() == tr.times.size());
    REQUIRE(tr.v_avg.size() == tr.times.size());
    REQUIRE(tr.r.size() == tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        if (tr.times[i] <= cfg.t_del + 1e-12) CHECK(tr.v_pd[i] == 0.0);
        CHECK(tr.v_pd[i] >= 0.0);
        CHECK(tr.r[i] >= 0.0);
        CHECK(tr.r[i] <= 1.0);
        CHECK(std::fabs(tr.v_avg[i]) <= cfg.amplitude);
    }
    CHECK(tr.v_pd.back() > 0.0);

    CHECK_THROWS_AS(integrate(st, cfg, 0), std::invalid_argument);
}

TEST_CASE("halving the step leaves the standard suite's final phases in place") {
    RunConfig rc;
    const CaseSet suite = build_standard_suite(rc.bank(), 42);
    const FreqCalib calib = FreqCalib::for_stages(3);
    SimConfig coarse, fine;
    fine.dt = coarse.dt / 2.0;
    for (const Case& cs : suite.cases) {
        const auto freqs = codes_to_frequencies(encode_differences(cs.fragment, cs.kernel), calib);
        ArrayState st;
        st.phases = init_phases(3, InitMode::uniform_random, 3, kActiveOsc);
        st.omegas.resize(kActiveOsc);
        for (int i = 0; i < kActiveOsc; ++i) st.omegas[std::size_t(i)] = kTwoPi * freqs[std::size_t(i)];
        st.coupling_k = 2.0;
        const auto a = run_engine(st, coarse, 0, false);
        const auto b = run_engine(st, fine, 0, false);
        for (int i = 0; i < kActiveOsc; ++i)
            CHECK(circ_dist(a.final_phases[std::size_t(i)], b.final_phases[std::size_t(i)]) < 1e-6);
    }
}

TEST_CASE("a non-finite phase stops the run with the step index") {
    ArrayState st = spread_state(30.0, 2.0, 1.0, 3);
    st.phases[4] = std::numeric_limits<double>::quiet_NaN();
    SimConfig cfg;
    CHECK_THROWS_AS(integrate(st, cfg, 10), std::runtime_error);
}

TEST_CASE("matched fragment locks fully and hits the rectified-carrier level") {
    const Kernel25 kern = gabor_kernel(45.0, kPi / 2.0, 1.5);
    Fragment25 f;
    f.v = kern.v;
    const FreqCalib calib = FreqCalib::for_stages(3);
    const double want = averaged_detector_prediction(SimConfig{});
    for (std::uint64_t seed : {100, 101, 102, 103}) {
        SimConfig cfg;
        cfg.seed = seed;
        const DomResult d = run_inference(f, kern, calib, cfg, 2.0);
        CHECK(d.r_final >= 0.99);
        CHECK(d.dom == doctest::Approx(want).epsilon(0.02));
        CHECK(d.sample_time == cfg.sample_time());
        CHECK(d.sample_time == doctest::Approx(8.2).epsilon(1e-12));
        CHECK(d.ideal_dot == doctest::Approx(ideal_dot(f, kern)).epsilon(1e-15));
        CHECK(d.seed == seed);
        CHECK(d.dom >= 0.0);
        CHECK(d.dom <= cfg.amplitude);
    }
}

TEST_CASE("uncoupled full-spread codes collapse the degree of match") {
    const Kernel25 gk = gabor_kernel(45.0, kPi / 2.0, 1.5);
    Fragment25 matched;
    matched.v = gk.v;
    Kernel25 ones;
    ones.v.fill(1.0);
    Fragment25 ramp;
    for (int i = 0; i < kPatchValues; ++i) ramp.v[i] = 1.0 - 2.0 * i / 24.0;

    const FreqCalib calib = FreqCalib::for_stages(3);
    double matched_mean = 0.0, spread_mean = 0.0;
    for (int s = 0; s < 16; ++s) {
        SimConfig cfg;
        cfg.seed = 500 + std::uint64_t(s);
        matched_mean += run_inference(matched, gk, calib, cfg, 2.0).dom;
        spread_mean += run_inference(ramp, ones, calib, cfg, 0.0).dom;
    }
    CHECK(spread_mean / 16.0 < 0.5 * (matched_mean / 16.0));
}

TEST_CASE("an inference rerun is bit-identical and the traced variant agrees") {
    const Kernel25 kern = gabor_kernel(0.0, kPi / 4.0, 1.5);
    Fragment25 f;
    for (int i = 0; i < kPatchValues; ++i) f.v[i] = std::sin(0.7 * i) * 0.9;
    const FreqCalib calib = FreqCalib::for_stages(5);
    SimConfig cfg;
    cfg.seed = 2718;
    const DomResult a = run_inference(f, kern, calib, cfg, 1.5);
    const DomResult b = run_inference(f, kern, calib, cfg, 1.5);
    CHECK(a.dom == b.dom);
    CHECK(a.sample_time == b.sample_time);
    CHECK(a.r_final == b.r_final);
    CHECK(a.ideal_dot == b.ideal_dot);
    CHECK(a.seed == b.seed);

    const InferenceRun traced = run_inference_traced(f, kern, calib, cfg, 1.5, 10);
    CHECK(traced.dom.dom == a.dom);
    CHECK(traced.dom.r_final == a.r_final);
    REQUIRE(!traced.trace.times.empty());
    CHECK(traced.trace.times.front() == 0.0);

    SimConfig other = cfg;
    other.seed = 2719;
    CHECK(run_inference(f, kern, calib, other, 1.5).dom != a.dom);
}

TEST_CASE("shifting every initial phase leaves the coherence trajectory alone") {
    ArrayState a = spread_state(kTwoPi * 4.5, 2.0, 2.0, 23);
    ArrayState b = a;
    for (double& th : b.phases) th = std::fmod(th + 1.234, kTwoPi);
    SimConfig cfg;
    const auto ra = run_engine(a, cfg, 20, false);
    const auto rb = run_engine(b, cfg, 20, false);
    REQUIRE(ra.trace.r.size() == rb.trace.r.size());
    for (std::size_t i = 0; i < ra.trace.r.size(); ++i)
        CHECK(ra.trace.r[i] == doctest::Approx(rb.trace.r[i]).epsilon(1e-9));
    CHECK(ra.r_sample == doctest::Approx(rb.r_sample).epsilon(1e-9));
    // the detector rides the |v_avg| envelope: a phase shift only moves the
    // carrier ripple under the sample point
    CHECK(ra.v_pd_sample == doctest::Approx(rb.v_pd_sample).epsilon(0.01));

    // a full-turn shift is the identity on the circle
    ArrayState c = a;
    for (double& th : c.phases) th += kTwoPi;
    const auto rc = run_engine(c, cfg, 0, false);
    CHECK(rc.v_pd_sample == doctest::Approx(ra.v_pd_sample).epsilon(1e-9));
    CHECK(rc.r_sample == doctest::Approx(ra.r_sample).epsilon(1e-9));
}

TEST_CASE("a common frequency offset leaves the coherence trajectory alone") {
    ArrayState a = spread_state(kTwoPi * 4.5, 2.5, 2.0, 29);
    ArrayState b = a;
    for (double& w : b.omegas) w += 3.0;
    SimConfig cfg;
    const auto ra = run_engine(a, cfg, 20, false);
    const auto rb = run_engine(b, cfg, 20, false);
    REQUIRE(ra.trace.r.size() == rb.trace.r.size());
    for (std::size_t i = 0; i < ra.trace.r.size(); ++i)
        CHECK(ra.trace.r[i] == doctest::Approx(rb.trace.r[i]).epsilon(1e-6));
}

TEST_CASE("two oscillators lock exactly when the detuning fits the coupling") {
    const double K = 1.0;
    SimConfig cfg;
    cfg.dt = 0.004;
    cfg.t_end = 200.0 / K;
    for (double ratio : {0.5, 0.8, 0.95, 1.05, 1.2, 2.0}) {
        const double dw = ratio * K;
        ArrayState st;
        st.n_active = 2;
        st.phases = init_phases(11, InitMode::uniform_random, 3, 2);
        st.omegas = {3.0 - dw / 2.0, 3.0 + dw / 2.0};
        st.coupling_k = K;
        const auto res = run_engine(st, cfg, 0, true);
        REQUIRE(res.drift_rate.size() == 2);
        const bool locked = std::fabs(res.drift_rate[1]) < 0.01 * dw;
        if (ratio < 1.0) CHECK(locked);
        if (ratio > 1.0) CHECK(!locked);
    }
}

TEST_CASE("mean degree of match decays as the frequency spread widens") {
    const FreqCalib calib = FreqCalib::for_stages(3);
    const double wbar = kTwoPi * (calib.f0_ghz + 10.0 * calib.slope_ghz_per_code);
    const double full = kTwoPi * (kCodeMax * calib.slope_ghz_per_code);
    std::vector<double> spreads, means;
    for (int j = 0; j < 8; ++j) {
        const double s = full * j / 7.0;
        double acc = 0.0;
        for (int rep = 0; rep < 32; ++rep) {
            ArrayState st = spread_state(wbar, s, 1.0, mix_seed(7, std::uint64_t(rep)));
            SimConfig cfg;
            acc += run_engine(st, cfg, 0, false).v_pd_sample;
        }
        spreads.push_back(s);
        means.push_back(acc / 32.0);
    }
    CHECK(spearman(spreads, means) <= -0.9);
}

TEST_CASE("config validation rejects each broken invariant") {
    SimConfig ok;
    CHECK_NOTHROW(validate_config(ok));
    SimConfig c = ok;
    c.dt = 0.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c = ok;
    c.dt = 0.02;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c = ok;
    c.t_end = c.t_del + c.t_int - 0.1;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c = ok;
    c.tau_rise = 0.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c = ok;
    c.tau_leak = -1.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
    c = ok;
    c.amplitude = 0.0;
    CHECK_THROWS_AS(validate_config(c), std::invalid_argument);
}

TEST_CASE("init mode names round-trip") {
    CHECK(parse_init_mode("uniform_random") == InitMode::uniform_random);
    CHECK(parse_init_mode("ic_quantized") == InitMode::ic_quantized);
    CHECK(init_mode_name(InitMode::uniform_random) == "uniform_random");
    CHECK(init_mode_name(InitMode::ic_quantized) == "ic_quantized");
    CHECK_THROWS_AS(parse_init_mode("coin_flip"), std::invalid_argument);
}
