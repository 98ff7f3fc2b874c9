#include "onn/harness.hpp"

#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include "onn/io.hpp"
#include "onn/parallel.hpp"

namespace onn {

namespace {

double next_unit(std::mt19937_64& eng) { return double(eng() >> 11) * 0x1.0p-53; }

double clamp_signal(double v) { return v < -1.0 ? -1.0 : (v > 1.0 ? 1.0 : v); }

}  // namespace

void validate_energy(const EnergyModel& m) {
    if (m.n_osc <= 0 || !(m.p_osc > 0.0) || !(m.p_pd > 0.0) || !(m.t_inf > 0.0))
        throw std::invalid_argument("energy model fields must all be positive");
}

FeatureMap convolve_signals(const std::vector<double>& signals, int width, int height,
                            const Kernel25& kern) {
    if (width < kPatch || height < kPatch)
        throw std::out_of_range("signal matrix admits no 5x5 window");
    if (signals.size() != std::size_t(width) * std::size_t(height))
        throw std::invalid_argument("signal matrix size does not match dimensions");

    FeatureMap map;
    map.width = width - (kPatch - 1);
    map.height = height - (kPatch - 1);
    map.values.resize(std::size_t(map.width) * std::size_t(map.height));
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            double acc = 0.0;
            for (int kr = 0; kr < kPatch; ++kr)
                for (int kc = 0; kc < kPatch; ++kc)
                    acc += signals[std::size_t(r + kr) * width + (c + kc)] *
                           kern.v[kr * kPatch + kc];
            map.values[std::size_t(r) * map.width + c] = acc;
        }
    }
    return map;
}

FeatureMap convolve(const GrayImage& image, const Kernel25& kern, ConvMode mode,
                    const FreqCalib& calib, const SimConfig& config, double coupling_k) {
    if (image.width < kPatch || image.height < kPatch)
        throw std::out_of_range("image admits no 5x5 fragment");

    if (mode == ConvMode::ideal) {
        std::vector<double> signals(image.pixels.size());
        for (std::size_t i = 0; i < image.pixels.size(); ++i)
            signals[i] = gray_to_signal(image.pixels[i]);
        return convolve_signals(signals, image.width, image.height, kern);
    }

    FeatureMap map;
    map.width = image.width - (kPatch - 1);
    map.height = image.height - (kPatch - 1);
    map.values.resize(std::size_t(map.width) * std::size_t(map.height));
    parallel_for(map.values.size(), effective_threads(0), [&](std::size_t pos) {
        const int r = int(pos) / map.width;
        const int c = int(pos) % map.width;
        SimConfig per_pos = config;
        per_pos.seed = mix_seed(config.seed, pos);
        const Fragment25 frag = extract_fragment(image, r, c);
        map.values[pos] = run_inference(frag, kern, calib, per_pos, coupling_k).dom;
    });
    return map;
}

MapComparison compare_maps(const FeatureMap& ideal, const FeatureMap& onn) {
    if (ideal.width != onn.width || ideal.height != onn.height ||
        ideal.values.size() != onn.values.size())
        throw std::invalid_argument("feature map dimensions do not match");
    MapComparison out;
    if (ideal.values.size() < 2) {  // a 1x1 map carries no fit information
        out.fit.degenerate = true;
        out.fit.intercept = onn.values.empty() ? 0.0 : onn.values[0];
        out.top1_match = true;
        return out;
    }

    bool ideal_varies = false;
    for (double v : ideal.values)
        if (v != ideal.values[0]) { ideal_varies = true; break; }
    if (!ideal_varies) {
        out.fit.degenerate = true;  // constant reference: nothing to fit against
        out.fit.intercept = onn.values[0];
    } else {
        out.fit = linear_fit(ideal.values, onn.values);
    }
    out.spearman_rho = spearman(ideal.values, onn.values);

    std::size_t ai = 0, bi = 0;
    for (std::size_t i = 1; i < ideal.values.size(); ++i) {
        if (ideal.values[i] > ideal.values[ai]) ai = i;
        if (onn.values[i] > onn.values[bi]) bi = i;
    }
    out.top1_match = ai == bi;
    return out;
}

CaseSet build_standard_suite(const std::vector<Kernel25>& bank, std::uint64_t seed) {
    if (bank.empty()) throw std::invalid_argument("suite needs a non-empty kernel bank");

    CaseSet set;
    set.cases.reserve(18);
    for (int ki = 0; ki < 6; ++ki) {
        const Kernel25& kern = bank[std::size_t(ki) % bank.size()];
        for (int variant = 0; variant < 3; ++variant) {
            const std::uint64_t case_index = std::uint64_t(ki) * 3 + std::uint64_t(variant);
            Case cs;
            cs.kernel = kern;
            if (variant == 0) {
                for (int i = 0; i < kPatchValues; ++i) cs.fragment.v[i] = kern.v[i];
            } else {
                std::mt19937_64 eng(mix_seed(seed, case_index));
                for (int i = 0; i < kPatchValues; ++i) {
                    const double noise = 2.0 * next_unit(eng) - 1.0;
                    const double v = variant == 1 ? 0.5 * kern.v[i] + 0.5 * noise : noise;
                    cs.fragment.v[i] = clamp_signal(v);
                }
            }
            validate_fragment(cs.fragment);
            cs.ideal_dot = ideal_dot(cs.fragment, cs.kernel);
            set.cases.push_back(std::move(cs));
        }
    }
    validate_cases(set);
    return set;
}

double energy_per_inference(const EnergyModel& m) {
    return (m.n_osc * m.p_osc + m.p_pd) * m.t_inf * 1e12;
}

GrayImage make_embedded_kernel_image(const Kernel25& kern, std::uint64_t seed) {
    const int w = 10, h = 10, row = 2, col = 3;
    std::mt19937_64 eng(seed);
    std::vector<std::uint8_t> px(std::size_t(w) * h);
    for (auto& p : px) {
        // mid-gray background, +-16 levels of texture
        const int g = 128 + int(std::floor(next_unit(eng) * 33.0)) - 16;
        p = std::uint8_t(g);
    }
    for (int r = 0; r < kPatch; ++r) {
        for (int c = 0; c < kPatch; ++c) {
            // inverse of gray_to_signal, rounded to the nearest level
            const double v = kern.v[r * kPatch + c];
            int g = int(std::lround((v + 1.0) * 127.5));
            if (g < 0) g = 0;
            if (g > 255) g = 255;
            px[std::size_t(row + r) * w + (col + c)] = std::uint8_t(g);
        }
    }
    return GrayImage(w, h, std::move(px));
}

std::vector<std::string> write_report(const std::string& out_dir, const ReportInputs& inputs) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir);

    const std::vector<std::string> header{"seed=" + std::to_string(inputs.seed)};
    std::vector<std::string> written;

    const std::string scatter_path = (fs::path(out_dir) / "dom_scatter.csv").string();
    write_scatter_csv(scatter_path, inputs.scatter, header);
    written.push_back(scatter_path);

    for (const NamedTrace& nt : inputs.traces) {
        const std::string path = (fs::path(out_dir) / (nt.name + ".csv")).string();
        write_trace_csv(path, nt.trace, header);
        written.push_back(path);
    }

    const std::string energy_path = (fs::path(out_dir) / "energy_delay.csv").string();
    write_energy_csv(energy_path, inputs.energy.t_inf * 1e9, energy_per_inference(inputs.energy),
                     header);
    written.push_back(energy_path);
    return written;
}

}  // namespace onn
