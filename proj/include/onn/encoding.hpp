#pragma once

// Image fragments, Gabor kernels and the pixel-difference -> oscillator
// frequency encoding used by the coupled-oscillator inference array.

#include <array>
#include <cstdint>
#include <vector>

namespace onn {

inline constexpr int kPatch = 5;            // fragment / kernel edge length
inline constexpr int kPatchValues = 25;     // kPatch * kPatch
inline constexpr int kCodeMax = 20;         // IDAC code range is 0..20
inline constexpr int kArraySlots = 26;      // oscillators on the die
inline constexpr int kActiveOsc = 25;       // slots driven during inference

/// 8-bit grayscale image, row-major. Must admit at least one 5x5 window.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // size() == width * height

    GrayImage(int w, int h, std::vector<std::uint8_t> px);

    std::uint8_t at(int row, int col) const { return pixels[std::size_t(row) * width + col]; }
};

/// 25 signal values in [-1, 1], row-major over a 5x5 window.
struct Fragment25 {
    std::array<double, kPatchValues> v{};
};

/// 25 kernel weights in [-1, 1] with max |weight| == 1, plus the Gabor
/// parameters the kernel was sampled from.
struct Kernel25 {
    std::array<double, kPatchValues> v{};
    double theta_deg = 0.0;  // orientation
    double k = 0.0;          // inverse wavelength, rad/pixel
    double sigma = 0.0;      // Gaussian envelope width, pixels
};

/// Per-oscillator IDAC codes, each in 0..kCodeMax.
struct CodeVector {
    std::array<int, kPatchValues> c{};
};

/// Affine IDAC code -> frequency map, in GHz.
struct FreqCalib {
    int stages = 3;                  // ring length, one of {3, 5, 7}
    double f0_ghz = 0.0;             // frequency at code 0
    double slope_ghz_per_code = 0.0; // increment per code step

    /// Defaults per ring length; longer rings run slower and the code span
    /// scales along so the relative tuning range stays comparable.
    static FreqCalib for_stages(int stages);

    double freq_ghz(int code) const { return f0_ghz + slope_ghz_per_code * code; }
};

/// Throws std::invalid_argument if any value leaves [-1, 1].
void validate_fragment(const Fragment25& f);

/// Throws std::invalid_argument if values leave [-1, 1] or max |v| != 1
/// (to within 1e-12).
void validate_kernel(const Kernel25& k);

/// Throws std::invalid_argument unless stages in {3,5,7}, f0 > 0, slope > 0.
void validate_calib(const FreqCalib& calib);

/// Map one 8-bit gray level to a signal value in [-1, 1]: v = 2 g / 255 - 1.
double gray_to_signal(int g);

/// Copy the 5x5 window whose top-left corner is (row, col), converting each
/// pixel with gray_to_signal. Throws std::out_of_range if the window leaves
/// the image.
Fragment25 extract_fragment(const GrayImage& img, int row, int col);

/// Sampled Gabor kernel on the 5x5 grid centered at (2, 2):
///   g(x, y) = N exp(-(x^2 + y^2) / (2 sigma^2)) cos(k (x cos th + y sin th))
/// with (x, y) = (col - 2, row - 2), th = theta_deg in radians, and N chosen
/// so max |g| == 1. Throws std::invalid_argument for sigma <= 0 or k < 0.
Kernel25 gabor_kernel(double theta_deg, double k, double sigma);

/// One kernel per (orientation, k) pair; outer loop over orientations,
/// inner over ks. Throws std::invalid_argument if either list is empty or
/// sigma <= 0.
std::vector<Kernel25> make_filter_bank(const std::vector<double>& orientations_deg,
                                       const std::vector<double>& ks, double sigma);

/// Plain inner product sum_i f_i * k_i.
double ideal_dot(const Fragment25& f, const Kernel25& k);

/// Quantize per-pixel differences onto IDAC codes:
///   code_i = round(10 * |f_i - k_i|), half away from zero.
/// |f_i - k_i| lies in [0, 2] so codes land in [0, kCodeMax].
CodeVector encode_differences(const Fragment25& f, const Kernel25& k);

/// freq_i = f0 + slope * code_i, GHz. Validates calib; throws
/// std::out_of_range for codes outside 0..kCodeMax.
std::vector<double> codes_to_frequencies(const CodeVector& codes, const FreqCalib& calib);

}  // namespace onn
