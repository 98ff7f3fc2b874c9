#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

// end-to-end checks against the installed binary (path injected by the build)

#include "onn/config.hpp"
#include "onn/harness.hpp"
#include "onn/io.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace onn;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
    std::string err;
};

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "onn_cli_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void put(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out.write(bytes.data(), std::streamsize(bytes.size()));
}

CmdResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path so = dir / "stdout.txt", se = dir / "stderr.txt";
    const std::string cmd =
        std::string(ONNSIM_BINARY) + " " + args + " > " + so.string() + " 2> " + se.string();
    const int status = std::system(cmd.c_str());
    CmdResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(so);
    r.err = slurp(se);
    return r;
}

double value_after(const std::string& text, const std::string& key) {
    const std::size_t at = text.find(key);
    REQUIRE(at != std::string::npos);
    return std::stod(text.substr(at + key.size()));
}

void write_pgm(const fs::path& path, const GrayImage& img) {
    std::string raw = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n255\n";
    for (std::uint8_t px : img.pixels) raw.push_back(char(px));
    put(path, raw);
}

int data_lines(const std::string& text) {
    int n = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') ++n;
    return n;
}

}  // namespace

TEST_CASE("report prints the headline energy figures") {
    const fs::path d1 = fresh_dir("report1"), d2 = fresh_dir("report2");
    const CmdResult r1 = run_cli("--out " + (d1 / "out").string() + " report", d1);
    CHECK(r1.code == 0);
    CHECK(r1.out.find("delay_ns=8 energy_pJ=54.88") != std::string::npos);
    CHECK(fs::exists(d1 / "out" / "energy_delay.csv"));

    const CmdResult r2 = run_cli("--out " + (d2 / "out").string() + " report", d2);
    CHECK(r2.code == 0);
    CHECK(slurp(d1 / "out" / "energy_delay.csv") == slurp(d2 / "out" / "energy_delay.csv"));
}

TEST_CASE("gen-kernels writes the whole bank faithfully") {
    const fs::path d = fresh_dir("genk");
    const CmdResult r = run_cli("--out " + (d / "out").string() + " gen-kernels", d);
    CHECK(r.code == 0);
    const fs::path csv = d / "out" / "kernels.csv";
    REQUIRE(fs::exists(csv));
    const std::vector<Kernel25> back = load_kernel_bank_csv(csv.string());
    const std::vector<Kernel25> want = RunConfig{}.bank();
    REQUIRE(back.size() == want.size());
    REQUIRE(back.size() == 8);
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].theta_deg == want[i].theta_deg);
        for (int j = 0; j < kPatchValues; ++j)
            CHECK(back[i].v[j] == doctest::Approx(want[i].v[j]).epsilon(1e-15));
    }

    // a one-orientation, one-wavenumber config shrinks the bank to one entry
    put(d / "one.cfg", "bank_orientations_deg=30\nbank_ks=1.2\n");
    const CmdResult r1 = run_cli("--config " + (d / "one.cfg").string() + " --out " +
                                     (d / "out1").string() + " gen-kernels",
                                 d);
    CHECK(r1.code == 0);
    CHECK(load_kernel_bank_csv((d / "out1" / "kernels.csv").string()).size() == 1);
}

TEST_CASE("infer on an embedded-kernel image locks and reports on schedule") {
    const fs::path d = fresh_dir("infer");
    const Kernel25 kern = RunConfig{}.bank()[2];
    write_pgm(d / "img.pgm", make_embedded_kernel_image(kern, 9));

    const CmdResult r = run_cli("--out " + (d / "out").string() + " infer --image " +
                                    (d / "img.pgm").string() +
                                    " --row 2 --col 3 --kernel 2 --coupling 2",
                                d);
    REQUIRE(r.code == 0);
    CHECK(value_after(r.out, "sample_time=") == doctest::Approx(8.2));
    CHECK(value_after(r.out, "r_final=") >= 0.99);
    CHECK(value_after(r.out, "coupling_k=") == doctest::Approx(2.0));
    CHECK(value_after(r.out, "dom=") > 0.0);

    const std::string trace = slurp(d / "out" / "trace.csv");
    std::istringstream in(trace);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# seed=", 0) == 0);
    std::getline(in, line);
    CHECK(line == "t_ns,v_avg,v_pd,r");
    std::getline(in, line);
    CHECK(line.rfind("0,", 0) == 0);  // t = 0 first
    // detector holds at zero through the delay: third field of the first row
    std::size_t c1 = line.find(','), c2 = line.find(',', c1 + 1);
    CHECK(line.substr(c2 + 1, line.find(',', c2 + 1) - c2 - 1) == "0");
}

TEST_CASE("infer without any coupling source explains itself") {
    const fs::path d = fresh_dir("nocal");
    const Kernel25 kern = RunConfig{}.bank()[0];
    write_pgm(d / "img.pgm", make_embedded_kernel_image(kern, 4));
    const CmdResult r = run_cli("--out " + (d / "out").string() + " infer --image " +
                                    (d / "img.pgm").string(),
                                d);
    CHECK(r.code != 0);
    CHECK(r.err.find("calibrate") != std::string::npos);
}

TEST_CASE("calibrate writes a reproducible sweep and record") {
    const fs::path d = fresh_dir("cal");
    put(d / "tiny.cfg",
        "k_grid_min=1\nk_grid_max=8\nk_grid_points=3\nseeds_per_case=2\nrecord_every=500\n");
    const std::string base = "--config " + (d / "tiny.cfg").string();

    const CmdResult r1 = run_cli(base + " --out " + (d / "a").string() + " calibrate", d);
    REQUIRE(r1.code == 0);
    CHECK(r1.out.find("best_k=") != std::string::npos);
    CHECK(r1.out.find("grid of 3") != std::string::npos);
    REQUIRE(fs::exists(d / "a" / "sweep.csv"));
    REQUIRE(fs::exists(d / "a" / "calibration.txt"));
    CHECK(data_lines(slurp(d / "a" / "sweep.csv")) == 1 + 3);  // header + grid points

    const CmdResult r2 = run_cli(base + " --out " + (d / "b").string() + " calibrate", d);
    REQUIRE(r2.code == 0);
    CHECK(slurp(d / "a" / "sweep.csv") == slurp(d / "b" / "sweep.csv"));
    CHECK(slurp(d / "a" / "calibration.txt") == slurp(d / "b" / "calibration.txt"));

    // the saved coupling feeds infer without --coupling
    const Kernel25 kern = RunConfig{}.bank()[0];
    write_pgm(d / "img.pgm", make_embedded_kernel_image(kern, 4));
    const CmdResult r3 = run_cli("--out " + (d / "a").string() + " infer --image " +
                                     (d / "img.pgm").string(),
                                 d);
    CHECK(r3.code == 0);
    const auto rec = load_calibration((d / "a" / "calibration.txt").string());
    REQUIRE(rec.has_value());
    CHECK(value_after(r3.out, "coupling_k=") == doctest::Approx(rec->coupling_k));

    // a singleton grid is echoed straight back
    put(d / "single.cfg",
        "k_grid_min=2.5\nk_grid_max=2.5\nk_grid_points=1\nseeds_per_case=2\nrecord_every=500\n");
    const CmdResult r4 = run_cli("--config " + (d / "single.cfg").string() + " --out " +
                                     (d / "c").string() + " calibrate",
                                 d);
    REQUIRE(r4.code == 0);
    CHECK(r4.out.find("best_k=2.5") != std::string::npos);
}

TEST_CASE("seed and stage overrides land in the output files") {
    const fs::path d = fresh_dir("flags");
    const CmdResult r = run_cli("--out " + (d / "out").string() + " --seed 123 gen-kernels", d);
    CHECK(r.code == 0);
    std::istringstream in(slurp(d / "out" / "kernels.csv"));
    std::string first;
    std::getline(in, first);
    CHECK(first == "# seed=123");

    put(d / "tiny.cfg",
        "k_grid_min=2\nk_grid_max=2\nk_grid_points=1\nseeds_per_case=2\nrecord_every=500\n");
    const CmdResult r2 = run_cli("--config " + (d / "tiny.cfg").string() + " --out " +
                                     (d / "s5").string() + " --stages 5 calibrate",
                                 d);
    REQUIRE(r2.code == 0);
    CHECK(slurp(d / "s5" / "calibration.txt").find("# stages=5") != std::string::npos);
    CHECK(r2.out.find("stages=5") != std::string::npos);
}

TEST_CASE("convolve covers the bank deterministically") {
    const fs::path d = fresh_dir("conv");
    std::string grid;
    for (int r = 0; r < 6; ++r) {
        for (int c = 0; c < 6; ++c)
            grid += std::to_string((r * 41 + c * 77) % 256) + (c == 5 ? "" : ",");
        grid += "\n";
    }
    put(d / "img.csv", grid);
    const std::string args = " convolve --image " + (d / "img.csv").string() + " --coupling 1";

    const CmdResult r1 = run_cli("--out " + (d / "a").string() + args, d);
    REQUIRE(r1.code == 0);
    for (int ki = 0; ki < 8; ++ki) {
        CHECK(fs::exists(d / "a" / ("featmap_ideal_" + std::to_string(ki) + ".csv")));
        CHECK(fs::exists(d / "a" / ("featmap_onn_" + std::to_string(ki) + ".csv")));
    }
    const std::string cmp = slurp(d / "a" / "comparison.csv");
    CHECK(data_lines(cmp) == 1 + 8);  // header + one row per kernel
    CHECK(cmp.find("kernel,theta_deg,k,r2,spearman,top1_match") != std::string::npos);

    const CmdResult r2 = run_cli("--out " + (d / "b").string() + args, d);
    REQUIRE(r2.code == 0);
    CHECK(cmp == slurp(d / "b" / "comparison.csv"));
    CHECK(slurp(d / "a" / "featmap_onn_3.csv") == slurp(d / "b" / "featmap_onn_3.csv"));
}

TEST_CASE("bad inputs exit nonzero with one-line diagnostics") {
    const fs::path d = fresh_dir("bad");
    put(d / "bad.cfg", "wibble=3\n");
    const CmdResult r = run_cli("--config " + (d / "bad.cfg").string() + " report", d);
    CHECK(r.code != 0);
    CHECK(r.err.find("error: unknown config key: wibble") != std::string::npos);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);

    const CmdResult r2 = run_cli("--out " + (d / "out").string() + " --stages 4 report", d);
    CHECK(r2.code != 0);
    CHECK(r2.err.find("error:") != std::string::npos);

    const CmdResult r3 = run_cli("", d);
    CHECK(r3.code != 0);
}
