// onnsim: command-line front end for the oscillator-array inference simulator.
//
// Subcommands:
//   gen-kernels   write the Gabor filter bank to <out>/kernels.csv
//   calibrate     sweep coupling, pick best K, write sweep/calibration/report files
//   infer         single fragment-vs-kernel inference, trace to <out>/trace.csv
//   convolve      slide every bank kernel over an image (ideal + oscillator maps)
//   report        energy/delay summary for the current parameters

#include "CLI11.hpp"

#include "onn/calibration.hpp"
#include "onn/config.hpp"
#include "onn/dynamics.hpp"
#include "onn/encoding.hpp"
#include "onn/harness.hpp"
#include "onn/io.hpp"
#include "onn/parallel.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace onn;

namespace {

std::vector<std::string> header_for(const RunConfig& cfg) {
    return {"seed=" + std::to_string(cfg.seed)};
}

// Coupling used by infer/convolve, strongest source wins:
// explicit flag > config coupling_k > config cap_code > saved calibration.
double resolve_coupling(const RunConfig& cfg, const std::optional<double>& flag) {
    if (flag) {
        if (!(*flag > 0.0)) throw std::invalid_argument("--coupling must be > 0");
        return *flag;
    }
    if (cfg.coupling_k > 0.0) return cfg.coupling_k;
    if (cfg.cap_code >= 0) return cfg.k_unit * cfg.cap_code;
    const std::string path = cfg.out_dir + "/calibration.txt";
    if (auto rec = load_calibration(path)) return rec->coupling_k;
    throw std::runtime_error(
        "no coupling available: run `onnsim calibrate` first, or pass --coupling "
        "(looked for " + path + ")");
}

int cmd_gen_kernels(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto bank = cfg.bank();
    const std::string path = cfg.out_dir + "/kernels.csv";
    write_kernel_bank_csv(path, bank, header_for(cfg));
    std::printf("wrote %zu kernels to %s\n", bank.size(), path.c_str());
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const EnergyModel m = cfg.energy();
    const double pj = energy_per_inference(m);
    const double delay_ns = m.t_inf * 1e9;
    const std::string path = cfg.out_dir + "/energy_delay.csv";
    write_energy_csv(path, delay_ns, pj, header_for(cfg));
    std::printf("delay_ns=%s energy_pJ=%s\n", fmt_sig10(delay_ns).c_str(),
                fmt_sig10(pj).c_str());
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_calibrate(const RunConfig& cfg) {
    fs::create_directories(cfg.out_dir);
    const auto bank = cfg.bank();
    const CaseSet suite = build_standard_suite(bank, cfg.seed);
    const auto grid = cfg.k_grid();
    const FreqCalib calib = cfg.calib();
    const SimConfig sim = cfg.sim();

    const SweepResult sweep = sweep_coupling(suite, grid, calib, sim, cfg.seeds_per_case);
    write_sweep_csv(cfg.out_dir + "/sweep.csv", sweep, header_for(cfg));

    CalibrationRecord rec;
    rec.coupling_k = sweep.best_k;
    rec.best_r2 = sweep.entries[sweep.best_index].fit.r2;
    rec.seed = cfg.seed;
    rec.stages = cfg.stages;
    rec.suite_hash = suite_hash(suite);
    save_calibration(cfg.out_dir + "/calibration.txt", rec);

    // Report files at the chosen coupling: per-run dom scatter, one trace per
    // case, and the energy/delay line.
    ReportInputs rep;
    rep.seed = cfg.seed;
    rep.energy = cfg.energy();
    const std::size_t n_cases = suite.cases.size();
    rep.scatter.resize(n_cases * std::size_t(cfg.seeds_per_case));
    parallel_for(n_cases * std::size_t(cfg.seeds_per_case), effective_threads(cfg.threads),
                 [&](std::size_t idx) {
                     const std::size_t ci = idx / std::size_t(cfg.seeds_per_case);
                     const std::size_t rep_i = idx % std::size_t(cfg.seeds_per_case);
                     SimConfig per = sim;
                     per.seed = mix_seed(mix_seed(sim.seed, ci), rep_i);
                     const DomResult r =
                         run_inference(suite.cases[ci].fragment, suite.cases[ci].kernel,
                                       calib, per, sweep.best_k);
                     rep.scatter[idx] = ScatterRow{cfg.stages, r.ideal_dot, r.dom, per.seed};
                 });
    rep.traces.reserve(n_cases);
    for (std::size_t ci = 0; ci < n_cases; ++ci) {
        SimConfig per = sim;
        per.seed = mix_seed(mix_seed(sim.seed, ci), 0);
        const InferenceRun run =
            run_inference_traced(suite.cases[ci].fragment, suite.cases[ci].kernel, calib,
                                 per, sweep.best_k, cfg.record_every);
        rep.traces.push_back(NamedTrace{"case_" + std::to_string(ci), run.trace});
    }
    const auto paths = write_report(cfg.out_dir, rep);

    std::printf("best_k=%s r2=%s (grid of %zu, stages=%d, %d seeds/case)\n",
                fmt_sig10(sweep.best_k).c_str(), fmt_sig10(rec.best_r2).c_str(),
                grid.size(), cfg.stages, cfg.seeds_per_case);
    std::printf("wrote %s\n", (cfg.out_dir + "/sweep.csv").c_str());
    std::printf("wrote %s\n", (cfg.out_dir + "/calibration.txt").c_str());
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
    return 0;
}

int cmd_infer(const RunConfig& cfg, const std::string& image_path, int row, int col,
              int kernel_index, const std::optional<double>& coupling_flag) {
    fs::create_directories(cfg.out_dir);
    const GrayImage img = load_gray_image(image_path);
    const Fragment25 frag = extract_fragment(img, row, col);
    const auto bank = cfg.bank();
    if (kernel_index < 0 || std::size_t(kernel_index) >= bank.size())
        throw std::out_of_range("--kernel index out of range (bank has " +
                                std::to_string(bank.size()) + " kernels)");
    const Kernel25& kern = bank[std::size_t(kernel_index)];
    const double k = resolve_coupling(cfg, coupling_flag);

    const InferenceRun run = run_inference_traced(frag, kern, cfg.calib(), cfg.sim(), k,
                                                  cfg.record_every);
    const std::string path = cfg.out_dir + "/trace.csv";
    write_trace_csv(path, run.trace, header_for(cfg));

    std::printf("dom=%s sample_time=%s r_final=%s ideal_dot=%s coupling_k=%s\n",
                fmt_sig10(run.dom.dom).c_str(), fmt_sig10(run.dom.sample_time).c_str(),
                fmt_sig10(run.dom.r_final).c_str(), fmt_sig10(run.dom.ideal_dot).c_str(),
                fmt_sig10(k).c_str());
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_convolve(const RunConfig& cfg, const std::string& image_path,
                 const std::optional<double>& coupling_flag) {
    fs::create_directories(cfg.out_dir);
    const GrayImage img = load_gray_image(image_path);
    const auto bank = cfg.bank();
    const double k = resolve_coupling(cfg, coupling_flag);
    const FreqCalib calib = cfg.calib();
    const SimConfig sim = cfg.sim();

    ReportInputs rep;
    rep.seed = cfg.seed;
    rep.energy = cfg.energy();

    std::string cmp_path = cfg.out_dir + "/comparison.csv";
    std::FILE* cmp = std::fopen(cmp_path.c_str(), "w");
    if (!cmp) throw std::runtime_error("cannot open " + cmp_path);
    std::fprintf(cmp, "# seed=%llu\n", (unsigned long long)cfg.seed);
    std::fprintf(cmp, "kernel,theta_deg,k,r2,spearman,top1_match\n");

    for (std::size_t ki = 0; ki < bank.size(); ++ki) {
        const FeatureMap ideal = convolve(img, bank[ki], ConvMode::ideal, calib, sim, k);
        const FeatureMap onn = convolve(img, bank[ki], ConvMode::onn, calib, sim, k);
        const MapComparison mc = compare_maps(ideal, onn);
        write_feature_map_csv(cfg.out_dir + "/featmap_ideal_" + std::to_string(ki) + ".csv",
                              ideal, header_for(cfg));
        write_feature_map_csv(cfg.out_dir + "/featmap_onn_" + std::to_string(ki) + ".csv",
                              onn, header_for(cfg));
        std::fprintf(cmp, "%zu,%s,%s,%s,%s,%d\n", ki, fmt_sig10(bank[ki].theta_deg).c_str(),
                     fmt_sig10(bank[ki].k).c_str(), fmt_sig10(mc.fit.r2).c_str(),
                     fmt_sig10(mc.spearman_rho).c_str(), mc.top1_match ? 1 : 0);
        std::printf("kernel %zu (theta=%g k=%g): r2=%s spearman=%s top1=%s\n", ki,
                    bank[ki].theta_deg, bank[ki].k, fmt_sig10(mc.fit.r2).c_str(),
                    fmt_sig10(mc.spearman_rho).c_str(), mc.top1_match ? "yes" : "no");
        for (std::size_t p = 0; p < onn.values.size(); ++p) {
            rep.scatter.push_back(ScatterRow{cfg.stages, ideal.values[p], onn.values[p],
                                             mix_seed(cfg.seed, p)});
        }
    }
    if (std::fclose(cmp) != 0) throw std::runtime_error("write failed: " + cmp_path);

    const auto paths = write_report(cfg.out_dir, rep);
    std::printf("wrote %s\n", cmp_path.c_str());
    for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"coupled-oscillator array simulator for convolutional inference"};
    app.require_subcommand(1);
    app.fallthrough();  // lets the global flags appear after the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> out_flag;
    std::optional<int> stages_flag;
    app.add_option("--config", config_path, "load key=value config file");
    app.add_option("--seed", seed_flag, "override config seed");
    app.add_option("--out", out_flag, "override output directory");
    app.add_option("--stages", stages_flag, "override stage count (3, 5 or 7)");

    auto* gen = app.add_subcommand("gen-kernels", "write the filter bank as CSV");
    auto* cal = app.add_subcommand("calibrate", "sweep coupling and save the best value");
    auto* inf = app.add_subcommand("infer", "run one fragment/kernel inference");
    auto* conv = app.add_subcommand("convolve", "feature maps for every bank kernel");
    auto* repc = app.add_subcommand("report", "energy and delay for current parameters");
    (void)gen;
    (void)cal;
    (void)repc;

    std::string infer_image;
    int infer_row = 0, infer_col = 0, infer_kernel = 0;
    std::optional<double> infer_coupling;
    inf->add_option("--image", infer_image, "PGM (P2/P5) or integer CSV image")->required();
    inf->add_option("--row", infer_row, "fragment top row");
    inf->add_option("--col", infer_col, "fragment left column");
    inf->add_option("--kernel", infer_kernel, "bank kernel index");
    inf->add_option("--coupling", infer_coupling, "coupling strength K");

    std::string conv_image;
    std::optional<double> conv_coupling;
    conv->add_option("--image", conv_image, "PGM (P2/P5) or integer CSV image")->required();
    conv->add_option("--coupling", conv_coupling, "coupling strength K");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
        if (seed_flag) cfg.seed = *seed_flag;
        if (out_flag) cfg.out_dir = *out_flag;
        if (stages_flag) cfg.stages = *stages_flag;
        cfg.validate();
        if (cfg.threads > 0)
            setenv("OSC_CONN_THREADS", std::to_string(cfg.threads).c_str(), 1);

        if (app.got_subcommand("gen-kernels")) return cmd_gen_kernels(cfg);
        if (app.got_subcommand("calibrate")) return cmd_calibrate(cfg);
        if (app.got_subcommand("infer"))
            return cmd_infer(cfg, infer_image, infer_row, infer_col, infer_kernel,
                             infer_coupling);
        if (app.got_subcommand("convolve")) return cmd_convolve(cfg, conv_image, conv_coupling);
        if (app.got_subcommand("report")) return cmd_report(cfg);
        std::fprintf(stderr, "error: no subcommand\n");
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
