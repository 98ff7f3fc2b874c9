#include "onn/encoding.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace onn {

GrayImage::GrayImage(int w, int h, std::vector<std::uint8_t> px)
    : width(w), height(h), pixels(std::move(px)) {
    if (width < kPatch || height < kPatch)
        throw std::invalid_argument("image must be at least 5x5, got " + std::to_string(width) +
                                    "x" + std::to_string(height));
    if (pixels.size() != std::size_t(width) * std::size_t(height))
        throw std::invalid_argument("pixel count does not match image dimensions");
}

void validate_fragment(const Fragment25& f) {
    for (double x : f.v)
        if (!(x >= -1.0 && x <= 1.0))
            throw std::invalid_argument("fragment value outside [-1,1]");
}

void validate_kernel(const Kernel25& k) {
    double peak = 0.0;
    for (double x : k.v) {
        if (!(x >= -1.0 && x <= 1.0))
            throw std::invalid_argument("kernel value outside [-1,1]");
        peak = std::max(peak, std::fabs(x));
    }
    if (std::fabs(peak - 1.0) > 1e-12)
        throw std::invalid_argument("kernel is not peak-normalized (max |v| = " +
                                    std::to_string(peak) + ")");
}

void validate_calib(const FreqCalib& c) {
    if (c.stages != 3 && c.stages != 5 && c.stages != 7)
        throw std::invalid_argument("stages must be 3, 5 or 7");
    if (!(c.f0_ghz > 0.0))
        throw std::invalid_argument("f0 must be positive");
    if (!(c.slope_ghz_per_code > 0.0))
        throw std::invalid_argument("frequency slope must be positive");
}

FreqCalib FreqCalib::for_stages(int stages) {
    // Not measured values: 1/stages ring scaling with the code span kept
    // at ~25% of f0 for every preset.
    switch (stages) {
        case 3: return {3, 4.0, 0.050};
        case 5: return {5, 2.4, 0.030};
        case 7: return {7, 1.7, 0.021};
        default: throw std::invalid_argument("stages must be 3, 5 or 7");
    }
}

double gray_to_signal(int g) {
    if (g < 0 || g > 255) throw std::domain_error("gray level outside [0,255]");
    return 2.0 * g / 255.0 - 1.0;
}

Fragment25 extract_fragment(const GrayImage& img, int row, int col) {
    if (row < 0 || col < 0 || row > img.height - kPatch || col > img.width - kPatch)
        throw std::out_of_range("fragment window leaves the image at (" + std::to_string(row) +
                                "," + std::to_string(col) + ")");
    Fragment25 f;
    for (int r = 0; r < kPatch; ++r)
        for (int c = 0; c < kPatch; ++c)
            f.v[r * kPatch + c] = gray_to_signal(img.at(row + r, col + c));
    return f;
}

Kernel25 gabor_kernel(double theta_deg, double k, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gabor sigma must be positive");
    if (k < 0.0) throw std::invalid_argument("gabor k must be non-negative");

    const double th = theta_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(th), st = std::sin(th);
    Kernel25 out;
    out.theta_deg = theta_deg;
    out.k = k;
    out.sigma = sigma;

    double peak = 0.0;
    for (int r = 0; r < kPatch; ++r) {
        for (int c = 0; c < kPatch; ++c) {
            const double x = c - 2, y = r - 2;
            const double env = std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            const double v = env * std::cos(k * (x * ct + y * st));
            out.v[r * kPatch + c] = v;
            peak = std::max(peak, std::fabs(v));
        }
    }
    // The center sample is exp(0)*cos(0) = 1, so peak >= 1 before
    // normalization never fails, but guard against a pathological k anyway.
    if (!(peak > 0.0)) throw std::invalid_argument("gabor kernel vanished everywhere");
    for (double& v : out.v) v /= peak;
    return out;
}

std::vector<Kernel25> make_filter_bank(const std::vector<double>& orientations_deg,
                                       const std::vector<double>& ks, double sigma) {
    if (orientations_deg.empty() || ks.empty())
        throw std::invalid_argument("filter bank needs at least one orientation and one k");
    std::vector<Kernel25> bank;
    bank.reserve(orientations_deg.size() * ks.size());
    for (double th : orientations_deg)
        for (double k : ks) bank.push_back(gabor_kernel(th, k, sigma));
    return bank;
}

double ideal_dot(const Fragment25& f, const Kernel25& k) {
    double acc = 0.0;
    for (int i = 0; i < kPatchValues; ++i) acc += f.v[i] * k.v[i];
    return acc;
}

CodeVector encode_differences(const Fragment25& f, const Kernel25& k) {
    CodeVector codes;
    for (int i = 0; i < kPatchValues; ++i) {
        // |diff| in [0,2] -> codes 0..20, round half away from zero
        int code = int(std::lround(10.0 * std::fabs(f.v[i] - k.v[i])));
        if (code < 0) code = 0;
        if (code > kCodeMax) code = kCodeMax;
        codes.c[i] = code;
    }
    return codes;
}

std::vector<double> codes_to_frequencies(const CodeVector& codes, const FreqCalib& calib) {
    validate_calib(calib);
    std::vector<double> freqs(kPatchValues);
    for (int i = 0; i < kPatchValues; ++i) {
        if (codes.c[i] < 0 || codes.c[i] > kCodeMax)
            throw std::out_of_range("IDAC code " + std::to_string(codes.c[i]) +
                                    " outside [0,20]");
        freqs[i] = calib.freq_ghz(codes.c[i]);
    }
    return freqs;
}

}  // namespace onn
