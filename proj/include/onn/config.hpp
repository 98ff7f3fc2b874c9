#pragma once

// Flat key=value run configuration with '#' comments. Every key has a
// default; unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "onn/dynamics.hpp"
#include "onn/encoding.hpp"
#include "onn/harness.hpp"

namespace onn {

struct RunConfig {
    // frequency calibration
    int stages = 3;
    double f0_ghz = 0.0;             // 0 = stage preset
    double slope_ghz_per_code = 0.0; // 0 = stage preset

    // simulation
    double dt_ns = 0.001;
    double t_end_ns = 8.2;
    double t_del_ns = 2.2;
    double t_int_ns = 6.0;
    double tau_rise_ns = 0.5;
    double tau_leak_ns = 20.0;
    double amplitude_v = 0.5;
    std::uint64_t seed = 42;
    std::string init_mode = "uniform_random";

    // coupling
    double coupling_k = 0.0;  // rad/ns; 0 = resolve from cap_code or calibration file
    double k_unit = 0.25;     // rad/ns per capacitor code step
    int cap_code = -1;        // -1 = unset; 0..15 gives K = k_unit * cap_code

    // filter bank
    std::vector<double> bank_orientations_deg{0.0, 45.0, 90.0, 135.0};
    std::vector<double> bank_ks{0.7853981633974483, 1.5707963267948966};  // pi/4, pi/2
    double bank_sigma = 1.5;

    // calibration sweep
    double k_grid_min = 0.01;
    double k_grid_max = 100.0;
    int k_grid_points = 17;
    int seeds_per_case = 16;

    // energy model
    int energy_n_osc = 26;
    double energy_p_osc_w = 0.26e-3;
    double energy_p_pd_w = 100e-6;
    double energy_t_inf_s = 8e-9;

    // plumbing
    std::string out_dir = "out";
    int threads = 0;       // 0 = hardware concurrency
    int record_every = 10; // trace decimation for CLI outputs

    /// Parse a file. Throws std::runtime_error (unreadable),
    /// std::invalid_argument (unknown key, bad value, violated invariant).
    static RunConfig from_file(const std::string& path);

    /// Parse from text (one key=value per line) over the defaults.
    static RunConfig from_text(const std::string& text);

    /// Throws std::invalid_argument on any violated component invariant.
    void validate() const;

    FreqCalib calib() const;          // stage preset unless f0/slope overridden
    SimConfig sim() const;
    EnergyModel energy() const;
    std::vector<Kernel25> bank() const;
    std::vector<double> k_grid() const;
};

/// The documented defaults as a parseable config file.
std::string default_config_text();

}  // namespace onn
