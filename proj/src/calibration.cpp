#include "onn/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "onn/parallel.hpp"

namespace onn {

void validate_cases(const CaseSet& set) {
    if (set.cases.size() < 2) throw std::invalid_argument("case set needs at least 2 cases");
    const double first = set.cases.front().ideal_dot;
    bool varied = false;
    for (const Case& c : set.cases)
        if (c.ideal_dot != first) { varied = true; break; }
    if (!varied) throw std::invalid_argument("case set ideal_dot values are all identical");
}

FitResult linear_fit(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("linear_fit: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("linear_fit: need at least 2 points");

    bool xs_vary = false, ys_vary = false;
    for (std::size_t i = 1; i < n; ++i) {
        xs_vary = xs_vary || xs[i] != xs[0];
        ys_vary = ys_vary || ys[i] != ys[0];
    }
    if (!xs_vary) throw std::invalid_argument("linear_fit: xs are all equal (degenerate fit)");

    FitResult fit;
    if (!ys_vary) {
        fit.slope = 0.0;
        fit.intercept = ys[0];
        fit.r2 = 0.0;
        fit.degenerate = true;
        return fit;
    }

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= double(n);
    my /= double(n);

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("linear_fit: xs carry no variance");

    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = ys[i] - (fit.intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    double r2 = syy > 0.0 ? 1.0 - ss_res / syy : 0.0;
    if (r2 < 0.0) r2 = 0.0;
    if (r2 > 1.0) r2 = 1.0;
    fit.r2 = r2;
    return fit;
}

namespace {

// average ranks, ties shared
std::vector<double> ranks_of(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[idx[j + 1]] == xs[idx[i]]) ++j;
        const double shared = 0.5 * (double(i) + double(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = shared;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
    if (xs.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");

    const std::vector<double> rx = ranks_of(xs), ry = ranks_of(ys);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= double(rx.size());
    my /= double(ry.size());
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double dx = rx[i] - mx, dy = ry[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;  // a fully tied side has no ranking
    return sxy / std::sqrt(sxx * syy);
}

CorrelationStats correlation_stats(const CaseSet& cases, double coupling_k,
                                   const FreqCalib& calib, const SimConfig& config,
                                   int seeds_per_case) {
    validate_cases(cases);
    validate_calib(calib);
    validate_config(config);
    if (seeds_per_case < 1) throw std::invalid_argument("seeds_per_case must be >= 1");
    if (coupling_k < 0.0) throw std::invalid_argument("coupling_k must be >= 0");

    const std::size_t n_cases = cases.cases.size();
    const std::size_t n_runs = n_cases * std::size_t(seeds_per_case);
    std::vector<double> doms(n_runs), r_finals(n_runs);

    parallel_for(n_runs, effective_threads(0), [&](std::size_t run) {
        const std::size_t ci = run / std::size_t(seeds_per_case);
        const std::size_t rep = run % std::size_t(seeds_per_case);
        SimConfig per_run = config;
        per_run.seed = mix_seed(mix_seed(config.seed, ci), rep);
        const Case& cs = cases.cases[ci];
        const DomResult res = run_inference(cs.fragment, cs.kernel, calib, per_run, coupling_k);
        doms[run] = res.dom;
        r_finals[run] = res.r_final;
    });

    CorrelationStats out;
    out.mean_dom.resize(n_cases);
    std::vector<double> dots(n_cases);
    for (std::size_t ci = 0; ci < n_cases; ++ci) {
        double acc = 0.0;
        for (int rep = 0; rep < seeds_per_case; ++rep)
            acc += doms[ci * std::size_t(seeds_per_case) + rep];
        out.mean_dom[ci] = acc / seeds_per_case;
        dots[ci] = cases.cases[ci].ideal_dot;
    }
    double racc = 0.0;
    for (double r : r_finals) racc += r;
    out.mean_r_final = racc / double(n_runs);
    out.fit = linear_fit(dots, out.mean_dom);
    return out;
}

FitResult evaluate_correlation(const CaseSet& cases, double coupling_k, const FreqCalib& calib,
                               const SimConfig& config, int seeds_per_case) {
    return correlation_stats(cases, coupling_k, calib, config, seeds_per_case).fit;
}

SweepResult sweep_coupling(const CaseSet& cases, std::span<const double> k_grid,
                           const FreqCalib& calib, const SimConfig& config, int seeds_per_case) {
    if (k_grid.empty()) throw std::invalid_argument("sweep_coupling: empty K grid");
    for (std::size_t i = 1; i < k_grid.size(); ++i)
        if (k_grid[i] < k_grid[i - 1])
            throw std::invalid_argument("sweep_coupling: K grid must be sorted ascending");

    SweepResult out;
    out.entries.reserve(k_grid.size());
    for (double k : k_grid) {
        const CorrelationStats stats = correlation_stats(cases, k, calib, config, seeds_per_case);
        out.entries.push_back({k, stats.fit, stats.mean_r_final});
    }
    out.best_index = 0;
    for (std::size_t i = 1; i < out.entries.size(); ++i)
        if (out.entries[i].fit.r2 > out.entries[out.best_index].fit.r2) out.best_index = i;
    out.best_k = out.entries[out.best_index].coupling_k;
    return out;
}

double locking_threshold(double coupling_k, int n_active, const SimConfig& config, int seeds) {
    if (!(coupling_k > 0.0)) throw std::invalid_argument("coupling_k must be positive");
    if (n_active < 2) throw std::invalid_argument("locking needs n_active >= 2");
    if (seeds < 1) throw std::invalid_argument("seeds must be >= 1");

    // Simulated in K-normalized time s = K*t: coupling 1, spread w' = w/K,
    // horizon 200 units (the 200/K ns contract), so cost is K-independent.
    // "Locked": the spread of per-oscillator mean frequencies over the last
    // half of the run stays below 1% of the spread w (for two oscillators
    // this is exactly the estimated-beat-frequency criterion).
    SimConfig norm;
    norm.dt = 0.004;
    norm.t_end = 200.0;
    norm.t_del = 2.2;
    norm.t_int = 6.0;
    norm.tau_rise = 0.5;
    norm.tau_leak = 20.0;
    norm.amplitude = 1.0;
    norm.seed = config.seed;

    auto locked = [&](double w) {
        int votes = 0;
        for (int rep = 0; rep < seeds; ++rep) {
            ArrayState st;
            st.n_total = std::max(n_active, kArraySlots);
            st.n_active = n_active;
            // random phases: the threshold is a property of the flow, and
            // quantized ICs only coarsen the estimate
            st.phases = init_phases(mix_seed(config.seed, std::uint64_t(rep)),
                                    InitMode::uniform_random, 3, n_active);
            st.coupling_k = 1.0;
            st.omegas.resize(n_active);
            const double wbar = 1.0 + w;  // keeps every omega positive
            for (int i = 0; i < n_active; ++i)
                st.omegas[i] = wbar - 0.5 * w + w * double(i) / double(n_active - 1);
            const EngineResult res = run_engine(st, norm, 0, true);
            double lo = res.drift_rate[0], hi = res.drift_rate[0];
            for (double d : res.drift_rate) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
            if (hi - lo < 0.01 * w) ++votes;
        }
        return 2 * votes > seeds;
    };

    double lo = 0.05, hi = 4.0;
    int guard = 0;
    while (!locked(lo)) {
        lo *= 0.5;
        if (++guard > 8)
            throw std::runtime_error("no locking transition: still unlocked at spread " +
                                     std::to_string(lo * coupling_k) + " (bracket [" +
                                     std::to_string(lo * coupling_k) + ", " +
                                     std::to_string(hi * coupling_k) + "])");
    }
    guard = 0;
    while (locked(hi)) {
        hi *= 2.0;
        if (++guard > 5)
            throw std::runtime_error("no locking transition: still locked at spread " +
                                     std::to_string(hi * coupling_k) + " (bracket [" +
                                     std::to_string(lo * coupling_k) + ", " +
                                     std::to_string(hi * coupling_k) + "])");
    }

    for (int it = 0; it < 25; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (locked(mid))
            lo = mid;
        else
            hi = mid;
    }
    return coupling_k * 0.5 * (lo + hi);
}

std::vector<double> log_grid(double k_min, double k_max, int points) {
    if (!(k_min > 0.0) || k_max < k_min) throw std::invalid_argument("bad K grid bounds");
    if (points < 1) throw std::invalid_argument("K grid needs at least one point");
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = k_min;
        return grid;
    }
    const double ratio = std::log(k_max / k_min);
    for (int i = 0; i < points; ++i)
        grid[i] = k_min * std::exp(ratio * double(i) / double(points - 1));
    grid.back() = k_max;  // pin the endpoint against rounding
    return grid;
}

}  // namespace onn
