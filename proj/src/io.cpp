#include "onn/io.hpp"

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace onn {

std::string fmt_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt_sig10(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

void write_comments(std::ofstream& out, const std::vector<std::string>& comments) {
    for (const std::string& c : comments) out << "# " << c << "\n";
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + path);
}

bool blank_or_comment(const std::string& line) {
    for (char ch : line) {
        if (ch == '#') return true;
        if (!std::isspace((unsigned char)ch)) return false;
    }
    return true;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace((unsigned char)s[pos])) ++pos;
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("bad numeric field '" + s + "' in " + what);
    }
}

GrayImage parse_pgm(std::ifstream& in, const std::string& path) {
    // header tokens with '#' comments: magic, width, height, maxval
    std::string magic;
    auto next_token = [&]() -> std::string {
        std::string tok;
        int ch;
        while ((ch = in.get()) != EOF) {
            if (ch == '#') {
                while ((ch = in.get()) != EOF && ch != '\n') {}
            } else if (!std::isspace(ch)) {
                tok += char(ch);
                while ((ch = in.get()) != EOF && !std::isspace(ch) && ch != '#') tok += char(ch);
                if (ch == '#')
                    while ((ch = in.get()) != EOF && ch != '\n') {}
                return tok;
            }
        }
        throw std::runtime_error("truncated PGM header in " + path);
    };

    magic = next_token();
    const bool binary = magic == "P5";
    const int width = int(parse_double(next_token(), path));
    const int height = int(parse_double(next_token(), path));
    const int maxval = int(parse_double(next_token(), path));
    if (maxval != 255) throw std::runtime_error("unsupported PGM maxval (want 255) in " + path);
    if (width < 1 || height < 1) throw std::runtime_error("bad PGM dimensions in " + path);

    std::vector<std::uint8_t> px;
    px.reserve(std::size_t(width) * height);
    if (binary) {
        // P5 allows exactly one whitespace char after maxval, and
        // next_token's trailing isspace get() consumed it already.
        std::vector<char> raw(std::size_t(width) * height);
        in.read(raw.data(), std::streamsize(raw.size()));
        if (std::size_t(in.gcount()) != raw.size())
            throw std::runtime_error("truncated PGM raster in " + path);
        for (char b : raw) px.push_back(std::uint8_t((unsigned char)b));
    } else {
        for (std::size_t i = 0; i < std::size_t(width) * height; ++i) {
            const int v = int(parse_double(next_token(), path));
            if (v < 0 || v > 255) throw std::runtime_error("PGM pixel outside [0,255] in " + path);
            px.push_back(std::uint8_t(v));
        }
    }
    return GrayImage(width, height, std::move(px));
}

GrayImage parse_csv_image(std::ifstream& in, const std::string& path) {
    std::vector<std::uint8_t> px;
    int width = -1, height = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (blank_or_comment(line)) continue;
        // accept comma and/or whitespace separated integers
        for (char& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream row(line);
        int v, count = 0;
        while (row >> v) {
            if (v < 0 || v > 255)
                throw std::runtime_error("CSV pixel outside [0,255] in " + path);
            px.push_back(std::uint8_t(v));
            ++count;
        }
        if (!row.eof()) throw std::runtime_error("non-integer pixel data in " + path);
        if (count == 0) continue;
        if (width < 0)
            width = count;
        else if (count != width)
            throw std::runtime_error("ragged CSV image rows in " + path);
        ++height;
    }
    if (width < 1 || height < 1) throw std::runtime_error("empty image file " + path);
    return GrayImage(width, height, std::move(px));
}

}  // namespace

GrayImage load_gray_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open image " + path);
    const int c0 = in.peek();
    try {
        if (c0 == 'P') return parse_pgm(in, path);
        return parse_csv_image(in, path);
    } catch (const std::invalid_argument& e) {
        // GrayImage constructor rejected the decoded data
        throw std::runtime_error(std::string(e.what()) + " in " + path);
    }
}

void write_kernel_bank_csv(const std::string& path, const std::vector<Kernel25>& bank,
                           const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    out << "theta_deg,k,sigma";
    for (int i = 0; i < kPatchValues; ++i) out << ",v" << i;
    out << "\n";
    for (const Kernel25& kern : bank) {
        out << fmt_full(kern.theta_deg) << "," << fmt_full(kern.k) << "," << fmt_full(kern.sigma);
        for (double v : kern.v) out << "," << fmt_full(v);
        out << "\n";
    }
    finish(out, path);
}

std::vector<Kernel25> load_kernel_bank_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open kernel bank " + path);
    std::vector<Kernel25> bank;
    std::string line;
    while (std::getline(in, line)) {
        if (blank_or_comment(line)) continue;
        if (line.rfind("theta_deg", 0) == 0) continue;  // column header
        const std::vector<std::string> fields = split_fields(line, ',');
        if (fields.size() != 3 + kPatchValues)
            throw std::runtime_error("kernel row needs 28 fields in " + path);
        Kernel25 kern;
        kern.theta_deg = parse_double(fields[0], path);
        kern.k = parse_double(fields[1], path);
        kern.sigma = parse_double(fields[2], path);
        for (int i = 0; i < kPatchValues; ++i)
            kern.v[i] = parse_double(fields[std::size_t(3 + i)], path);
        validate_kernel(kern);
        bank.push_back(kern);
    }
    if (bank.empty()) throw std::runtime_error("no kernels in " + path);
    return bank;
}

void write_trace_csv(const std::string& path, const SimTrace& trace,
                     const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    out << "t_ns,v_avg,v_pd,r\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        out << fmt_sig10(trace.times[i]) << "," << fmt_sig10(trace.v_avg[i]) << ","
            << fmt_sig10(trace.v_pd[i]) << "," << fmt_sig10(trace.r[i]) << "\n";
    finish(out, path);
}

void write_sweep_csv(const std::string& path, const SweepResult& sweep,
                     const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    out << "coupling_k,slope,intercept,r2,mean_r_final\n";
    for (const SweepEntry& e : sweep.entries)
        out << fmt_full(e.coupling_k) << "," << fmt_full(e.fit.slope) << ","
            << fmt_full(e.fit.intercept) << "," << fmt_full(e.fit.r2) << ","
            << fmt_full(e.mean_r_final) << "\n";
    finish(out, path);
}

void write_scatter_csv(const std::string& path, const std::vector<ScatterRow>& rows,
                       const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    out << "stages,ideal_dot,dom,seed\n";
    for (const ScatterRow& row : rows)
        out << row.stages << "," << fmt_full(row.ideal_dot) << "," << fmt_full(row.dom) << ","
            << row.seed << "\n";
    finish(out, path);
}

void write_energy_csv(const std::string& path, double delay_ns, double energy_pj,
                      const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    out << "delay_ns,energy_pJ\n";
    out << fmt_sig10(delay_ns) << "," << fmt_sig10(energy_pj) << "\n";
    finish(out, path);
}

void write_feature_map_csv(const std::string& path, const FeatureMap& map,
                           const std::vector<std::string>& header_comments) {
    std::ofstream out = open_out(path);
    write_comments(out, header_comments);
    for (int r = 0; r < map.height; ++r) {
        for (int c = 0; c < map.width; ++c) {
            if (c) out << ",";
            out << fmt_sig10(map.at(r, c));
        }
        out << "\n";
    }
    finish(out, path);
}

void save_calibration(const std::string& path, const CalibrationRecord& rec) {
    std::ofstream out = open_out(path);
    out << "# coupling calibration\n";
    out << "# seed=" << rec.seed << "\n";
    out << "# stages=" << rec.stages << "\n";
    out << "# suite_hash=" << rec.suite_hash << "\n";
    out << "# best_r2=" << fmt_full(rec.best_r2) << "\n";
    out << "coupling_k=" << fmt_full(rec.coupling_k) << "\n";
    finish(out, path);
}

std::optional<CalibrationRecord> load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    CalibrationRecord rec;
    bool have_k = false;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string body = line;
        bool comment = false;
        if (!body.empty() && body[0] == '#') {
            comment = true;
            body = body.substr(1);
            while (!body.empty() && body.front() == ' ') body.erase(body.begin());
        }
        const std::size_t eq = body.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = body.substr(0, eq), val = body.substr(eq + 1);
        if (!comment && key == "coupling_k") {
            rec.coupling_k = parse_double(val, path);
            have_k = true;
        } else if (comment && key == "seed") {
            rec.seed = std::stoull(val);
        } else if (comment && key == "stages") {
            rec.stages = int(parse_double(val, path));
        } else if (comment && key == "suite_hash") {
            rec.suite_hash = std::stoull(val);
        } else if (comment && key == "best_r2") {
            rec.best_r2 = parse_double(val, path);
        }
    }
    if (!have_k) throw std::runtime_error("calibration file " + path + " has no coupling_k");
    return rec;
}

std::uint64_t suite_hash(const CaseSet& cases) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
    auto mix = [&](double x) {
        unsigned char bytes[sizeof x];
        std::memcpy(bytes, &x, sizeof x);
        for (unsigned char b : bytes) {
            h ^= b;
            h *= 0x100000001b3ull;
        }
    };
    for (const Case& c : cases.cases) {
        for (double v : c.fragment.v) mix(v);
        for (double v : c.kernel.v) mix(v);
        mix(c.ideal_dot);
    }
    return h;
}

}  // namespace onn
