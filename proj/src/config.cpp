#include "onn/config.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "onn/io.hpp"

namespace onn {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

double to_double(const std::string& key, const std::string& val) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(val, &pos);
        if (trim(val.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key " + key + ": bad number '" + val + "'");
}

int to_int(const std::string& key, const std::string& val) {
    const double v = to_double(key, val);
    const int i = int(v);
    if (double(i) != v) throw std::invalid_argument("config key " + key + ": expected integer");
    return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& val) {
    try {
        // stoull would wrap "-4" around instead of failing
        if (val.find('-') == std::string::npos) {
            std::size_t pos = 0;
            const std::uint64_t v = std::stoull(val, &pos);
            if (trim(val.substr(pos)).empty()) return v;
        }
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config key " + key + ": bad unsigned integer '" + val + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& val) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(val);
    while (std::getline(in, cur, ',')) out.push_back(to_double(key, trim(cur)));
    if (out.empty()) throw std::invalid_argument("config key " + key + ": empty list");
    return out;
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "stages") cfg.stages = to_int(key, val);
        else if (key == "f0_ghz") cfg.f0_ghz = to_double(key, val);
        else if (key == "slope_ghz_per_code") cfg.slope_ghz_per_code = to_double(key, val);
        else if (key == "dt_ns") cfg.dt_ns = to_double(key, val);
        else if (key == "t_end_ns") cfg.t_end_ns = to_double(key, val);
        else if (key == "t_del_ns") cfg.t_del_ns = to_double(key, val);
        else if (key == "t_int_ns") cfg.t_int_ns = to_double(key, val);
        else if (key == "tau_rise_ns") cfg.tau_rise_ns = to_double(key, val);
        else if (key == "tau_leak_ns") cfg.tau_leak_ns = to_double(key, val);
        else if (key == "amplitude_v") cfg.amplitude_v = to_double(key, val);
        else if (key == "seed") cfg.seed = to_u64(key, val);
        else if (key == "init_mode") cfg.init_mode = val;
        else if (key == "coupling_k") cfg.coupling_k = to_double(key, val);
        else if (key == "k_unit") cfg.k_unit = to_double(key, val);
        else if (key == "cap_code") cfg.cap_code = to_int(key, val);
        else if (key == "bank_orientations_deg") cfg.bank_orientations_deg = to_list(key, val);
        else if (key == "bank_ks") cfg.bank_ks = to_list(key, val);
        else if (key == "bank_sigma") cfg.bank_sigma = to_double(key, val);
        else if (key == "k_grid_min") cfg.k_grid_min = to_double(key, val);
        else if (key == "k_grid_max") cfg.k_grid_max = to_double(key, val);
        else if (key == "k_grid_points") cfg.k_grid_points = to_int(key, val);
        else if (key == "seeds_per_case") cfg.seeds_per_case = to_int(key, val);
        else if (key == "energy_n_osc") cfg.energy_n_osc = to_int(key, val);
        else if (key == "energy_p_osc_w") cfg.energy_p_osc_w = to_double(key, val);
        else if (key == "energy_p_pd_w") cfg.energy_p_pd_w = to_double(key, val);
        else if (key == "energy_t_inf_s") cfg.energy_t_inf_s = to_double(key, val);
        else if (key == "out_dir") cfg.out_dir = val;
        else if (key == "threads") cfg.threads = to_int(key, val);
        else if (key == "record_every") cfg.record_every = to_int(key, val);
        else throw std::invalid_argument("unknown config key: " + key);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_text(buf.str());
}

void RunConfig::validate() const {
    validate_calib(calib());
    validate_config(sim());
    validate_energy(energy());
    parse_init_mode(init_mode);
    if (bank_orientations_deg.empty() || bank_ks.empty())
        throw std::invalid_argument("filter bank lists must be non-empty");
    if (!(bank_sigma > 0.0)) throw std::invalid_argument("bank_sigma must be positive");
    for (double k : bank_ks)
        if (k < 0.0) throw std::invalid_argument("bank_ks must be non-negative");
    if (!(k_grid_min > 0.0) || k_grid_max < k_grid_min)
        throw std::invalid_argument("K grid bounds must satisfy 0 < min <= max");
    if (k_grid_points < 1) throw std::invalid_argument("k_grid_points must be >= 1");
    if (seeds_per_case < 1) throw std::invalid_argument("seeds_per_case must be >= 1");
    if (coupling_k < 0.0) throw std::invalid_argument("coupling_k must be >= 0");
    if (!(k_unit > 0.0)) throw std::invalid_argument("k_unit must be positive");
    if (cap_code < -1 || cap_code > 15)
        throw std::invalid_argument("cap_code must be -1 (unset) or 0..15");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
    if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("out_dir must not be empty");
}

FreqCalib RunConfig::calib() const {
    FreqCalib c = FreqCalib::for_stages(stages);
    if (f0_ghz > 0.0) c.f0_ghz = f0_ghz;
    if (slope_ghz_per_code > 0.0) c.slope_ghz_per_code = slope_ghz_per_code;
    return c;
}

SimConfig RunConfig::sim() const {
    SimConfig c;
    c.dt = dt_ns;
    c.t_end = t_end_ns;
    c.t_del = t_del_ns;
    c.t_int = t_int_ns;
    c.tau_rise = tau_rise_ns;
    c.tau_leak = tau_leak_ns;
    c.amplitude = amplitude_v;
    c.seed = seed;
    c.init_mode = parse_init_mode(init_mode);
    return c;
}

EnergyModel RunConfig::energy() const {
    EnergyModel m;
    m.n_osc = energy_n_osc;
    m.p_osc = energy_p_osc_w;
    m.p_pd = energy_p_pd_w;
    m.t_inf = energy_t_inf_s;
    return m;
}

std::vector<Kernel25> RunConfig::bank() const {
    return make_filter_bank(bank_orientations_deg, bank_ks, bank_sigma);
}

std::vector<double> RunConfig::k_grid() const {
    return log_grid(k_grid_min, k_grid_max, k_grid_points);
}

std::string default_config_text() {
    const RunConfig d;
    std::ostringstream out;
    out << "# oscillator-array simulator configuration (defaults)\n"
        << "stages=" << d.stages << "              # ring length: 3, 5 or 7\n"
        << "f0_ghz=0               # code-0 frequency; 0 = stage preset\n"
        << "slope_ghz_per_code=0   # GHz per IDAC code; 0 = stage preset\n"
        << "dt_ns=" << fmt_full(d.dt_ns) << "\n"
        << "t_end_ns=" << fmt_full(d.t_end_ns) << "\n"
        << "t_del_ns=" << fmt_full(d.t_del_ns) << "    # detector enable delay\n"
        << "t_int_ns=" << fmt_full(d.t_int_ns) << "      # integration window before the sample\n"
        << "tau_rise_ns=" << fmt_full(d.tau_rise_ns) << "\n"
        << "tau_leak_ns=" << fmt_full(d.tau_leak_ns) << "\n"
        << "amplitude_v=" << fmt_full(d.amplitude_v) << "\n"
        << "seed=" << d.seed << "\n"
        << "init_mode=" << d.init_mode << "  # uniform_random | ic_quantized\n"
        << "coupling_k=0           # rad/ns; 0 = cap_code or calibration file\n"
        << "k_unit=" << fmt_full(d.k_unit) << "            # rad/ns per capacitor code\n"
        << "cap_code=-1            # -1 unset, else 0..15\n"
        << "bank_orientations_deg=0,45,90,135\n"
        << "bank_ks=" << fmt_full(d.bank_ks[0]) << "," << fmt_full(d.bank_ks[1]) << "\n"
        << "bank_sigma=" << fmt_full(d.bank_sigma) << "\n"
        << "k_grid_min=" << fmt_full(d.k_grid_min) << "\n"
        << "k_grid_max=" << fmt_full(d.k_grid_max) << "\n"
        << "k_grid_points=" << d.k_grid_points << "\n"
        << "seeds_per_case=" << d.seeds_per_case << "\n"
        << "energy_n_osc=" << d.energy_n_osc << "\n"
        << "energy_p_osc_w=" << fmt_full(d.energy_p_osc_w) << "\n"
        << "energy_p_pd_w=" << fmt_full(d.energy_p_pd_w) << "\n"
        << "energy_t_inf_s=" << fmt_full(d.energy_t_inf_s) << "\n"
        << "out_dir=" << d.out_dir << "\n"
        << "threads=" << d.threads << "              # 0 = hardware concurrency\n"
        << "record_every=" << d.record_every << "\n";
    return out.str();
}

}  // namespace onn
