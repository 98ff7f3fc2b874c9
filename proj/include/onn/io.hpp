#pragma once

// File formats: PGM/CSV images, kernel-bank CSV, trace/sweep/scatter CSVs
// and the tiny calibration key=value file. All numeric output uses %.17g
// for exact round-trips except traces (%.10g, still >= 9 significant
// digits). Lines starting with '#' are comments everywhere.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "onn/calibration.hpp"
#include "onn/encoding.hpp"
#include "onn/harness.hpp"

namespace onn {

/// PGM ("P2"/"P5", maxval 255) or integer CSV, decided by the magic bytes.
/// Throws std::runtime_error on unreadable/malformed files.
GrayImage load_gray_image(const std::string& path);

/// header_comments are emitted first, one "# ..." line each.
void write_kernel_bank_csv(const std::string& path, const std::vector<Kernel25>& bank,
                           const std::vector<std::string>& header_comments);
std::vector<Kernel25> load_kernel_bank_csv(const std::string& path);

void write_trace_csv(const std::string& path, const SimTrace& trace,
                     const std::vector<std::string>& header_comments);

void write_sweep_csv(const std::string& path, const SweepResult& sweep,
                     const std::vector<std::string>& header_comments);

void write_scatter_csv(const std::string& path, const std::vector<ScatterRow>& rows,
                       const std::vector<std::string>& header_comments);

void write_energy_csv(const std::string& path, double delay_ns, double energy_pj,
                      const std::vector<std::string>& header_comments);

void write_feature_map_csv(const std::string& path, const FeatureMap& map,
                           const std::vector<std::string>& header_comments);

/// Best coupling plus provenance, persisted between commands.
struct CalibrationRecord {
    double coupling_k = 0.0;
    double best_r2 = 0.0;
    std::uint64_t seed = 0;
    int stages = 0;
    std::uint64_t suite_hash = 0;  // FNV-1a over the suite's case bytes
};

void save_calibration(const std::string& path, const CalibrationRecord& rec);

/// std::nullopt if the file does not exist; std::runtime_error if present
/// but malformed.
std::optional<CalibrationRecord> load_calibration(const std::string& path);

/// FNV-1a 64 over the binary ideal_dot values of a suite; identifies a
/// suite in calibration provenance.
std::uint64_t suite_hash(const CaseSet& cases);

/// snprintf %.17g / %.10g helpers, locale-independent.
std::string fmt_full(double x);
std::string fmt_sig10(double x);

}  // namespace onn
