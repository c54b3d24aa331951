#include "doctest.h"

#include "hfdaep/io.hpp"
#include "hfdaep/phantom.hpp"
#include "test_helpers.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace hfdaep;
using namespace hfdaep::test;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path dir = fs::temp_directory_path() / ("hfdaep_test_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    return std::string(std::istreambuf_iterator<char>(f), {});
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(HFDAEP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("HFDP: float64 and complex tensors round-trip bitwise") {
    const fs::path dir = temp_dir("hfdp");
    Rng rng(110);

    HfdpTensor t;
    t.dtype = 0x01;
    t.dims = {3, 5, 4};
    t.real_data.resize(60);
    for (auto& v : t.real_data) v = rng.uniform(-10.0, 10.0);
    write_hfdp(t, (dir / "a.hfdp").string());
    const HfdpTensor r = read_hfdp((dir / "a.hfdp").string());
    CHECK(r.dtype == t.dtype);
    CHECK(r.dims == t.dims);
    CHECK(r.real_data == t.real_data);

    HfdpTensor c;
    c.dtype = 0x03;
    c.dims = {4, 6};
    c.complex_data.resize(24);
    for (auto& v : c.complex_data) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    write_hfdp(c, (dir / "c.hfdp").string());
    const HfdpTensor rc = read_hfdp((dir / "c.hfdp").string());
    CHECK(rc.complex_data == c.complex_data);
}

TEST_CASE("HFDP: float32 tensors round-trip through the quantization") {
    const fs::path dir = temp_dir("hfdp32");
    Rng rng(111);
    HfdpTensor t;
    t.dtype = 0x02;
    t.dims = {8, 8};
    t.real_data.resize(64);
    for (auto& v : t.real_data) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    write_hfdp(t, (dir / "f.hfdp").string());
    const HfdpTensor r = read_hfdp((dir / "f.hfdp").string());
    CHECK(r.dtype == 0x02);
    CHECK(r.real_data == t.real_data);  // payload was float-representable
}

TEST_CASE("HFDP: bad magic raises") {
    const fs::path dir = temp_dir("hfdpbad");
    std::ofstream((dir / "x.hfdp").string()) << "NOPEnope";
    CHECK_THROWS_AS(read_hfdp((dir / "x.hfdp").string()), std::runtime_error);
}

TEST_CASE("grid/sinogram/mask round trips") {
    const fs::path dir = temp_dir("grids");
    Rng rng(112);

    const RealGrid g = random_grid(9, 7, rng);
    save_grid(g, (dir / "g.hfdp").string());
    CHECK(load_grid((dir / "g.hfdp").string()).values == g.values);

    const ComplexGrid cgrid = random_complex_grid(6, 5, rng);
    save_complex_grid(cgrid, (dir / "c.hfdp").string());
    CHECK(load_complex_grid((dir / "c.hfdp").string()).values == cgrid.values);

    Sinogram s(12, 20);
    for (auto& v : s.values) v = rng.uniform(0.0, 3.0);
    save_sinogram(s, (dir / "s.hfdp").string());
    CHECK(load_sinogram((dir / "s.hfdp").string()).values == s.values);

    const SamplingMask m = make_mask(MaskKind::radial, 4.0, 32, 32, 5);
    save_mask(m, (dir / "m.hfdp").string(), 5);
    const SamplingMask lm = load_mask((dir / "m.hfdp").string());
    CHECK(lm.kept == m.kept);
    CHECK(lm.kind == MaskKind::radial);
    CHECK(lm.R == 4.0);
}

TEST_CASE("key = value files: comments, whitespace, round trip") {
    const fs::path dir = temp_dir("kv");
    write_key_values({{"alpha", "12.5"}, {"name", "run one"}}, (dir / "cfg.txt").string());
    std::ofstream((dir / "cfg.txt").string(), std::ios::app)
        << "# a comment line\n  spaced_key   =   spaced value  \n";
    const auto kv = read_key_values((dir / "cfg.txt").string());
    CHECK(kv.at("alpha") == "12.5");
    CHECK(kv.at("name") == "run one");
    CHECK(kv.at("spaced_key") == "spaced value");
    CHECK(kv.count("# a comment line") == 0);
}

TEST_CASE("geometry sidecar round trip") {
    const fs::path dir = temp_dir("geom");
    FanGeometry g;
    g.image_pixels = 96;
    g.detector_bins = 256;
    g.view_angles = FanGeometry::uniform_angles(180);
    save_geometry(g, (dir / "geom.txt").string());
    const FanGeometry r = load_geometry((dir / "geom.txt").string());
    CHECK(r.image_pixels == 96);
    CHECK(r.detector_bins == 256);
    CHECK(r.views() == 180);
    CHECK(r.source_to_center == g.source_to_center);
}

TEST_CASE("PGM preview: header and payload size") {
    const fs::path dir = temp_dir("pgm");
    Rng rng(113);
    const RealGrid g = random_grid(10, 14, rng);
    const auto window = write_pgm_preview(g, (dir / "p.pgm").string());
    CHECK(window.first < window.second);
    const std::string bytes = read_bytes(dir / "p.pgm");
    CHECK(bytes.rfind("P5\n14 10\n255\n", 0) == 0);
    CHECK(bytes.size() == std::string("P5\n14 10\n255\n").size() + 140);
}

TEST_CASE("shepp_logan: standard table values") {
    const RealGrid p = shepp_logan(128);
    double peak = 0.0;
    for (double v : p.values) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(1.0));   // skull ring
    CHECK(p.at(0, 0) == 0.0);              // background corner
    CHECK(p.at(64, 64) == doctest::Approx(0.02));  // interior tissue
}

TEST_CASE("random_ellipses: deterministic, clipped, inside the field of view") {
    const RealGrid a = random_ellipses(64, 9);
    const RealGrid b = random_ellipses(64, 9);
    CHECK(a.values == b.values);
    const RealGrid c = random_ellipses(64, 10);
    CHECK(a.values != c.values);

    for (double v : a.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (int i = 0; i < 64; ++i) {  // border ring stays empty
        CHECK(a.at(i, 0) == 0.0);
        CHECK(a.at(i, 63) == 0.0);
        CHECK(a.at(0, i) == 0.0);
        CHECK(a.at(63, i) == 0.0);
    }
}

TEST_CASE("generate_phantoms: count = 0 yields no phantoms") {
    PhantomSpec spec;
    spec.count = 0;
    CHECK(generate_phantoms(spec).empty());
}

TEST_CASE("cli: gen-data is bitwise deterministic per seed") {
    const fs::path a = temp_dir("cli_gen_a");
    const fs::path b = temp_dir("cli_gen_b");
    REQUIRE(run_cli("gen-data --kind random_ellipses --size 48 --count 3 --seed 11 --out " +
                    a.string()) == 0);
    REQUIRE(run_cli("gen-data --kind random_ellipses --size 48 --count 3 --seed 11 --out " +
                    b.string()) == 0);
    for (const char* name : {"phantom_000.hfdp", "phantom_001.hfdp", "phantom_002.hfdp"})
        CHECK(read_bytes(a / name) == read_bytes(b / name));

    const fs::path c = temp_dir("cli_gen_c");
    REQUIRE(run_cli("gen-data --kind random_ellipses --size 48 --count 1 --seed 12 --out " +
                    c.string()) == 0);
    CHECK(read_bytes(a / "phantom_000.hfdp") != read_bytes(c / "phantom_000.hfdp"));
}

TEST_CASE("cli: manifest echoes every perturbed make-mask field") {
    const fs::path base = temp_dir("cli_mask_base");
    REQUIRE(run_cli("make-mask --mask-kind random2d --R 5 --height 48 --width 48 --seed 1 --out " +
                    base.string()) == 0);
    const auto kv = read_key_values((base / "manifest.txt").string());
    CHECK(kv.at("task") == "make-mask");
    CHECK(kv.at("mask_kind") == "random2d");
    CHECK(kv.at("R") == "5");
    CHECK(kv.at("height") == "48");
    CHECK(kv.at("width") == "48");
    CHECK(kv.at("seed") == "1");

    struct Case {
        std::string flags;
        std::string key, value;
    };
    const std::vector<Case> cases = {
        {"--mask-kind radial --R 5 --height 48 --width 48 --seed 1", "mask_kind", "radial"},
        {"--mask-kind random2d --R 4 --height 48 --width 48 --seed 1", "R", "4"},
        {"--mask-kind random2d --R 5 --height 40 --width 48 --seed 1", "height", "40"},
        {"--mask-kind random2d --R 5 --height 48 --width 48 --seed 2", "seed", "2"},
    };
    for (const auto& c : cases) {
        const fs::path dir = temp_dir("cli_mask_p");
        REQUIRE(run_cli("make-mask " + c.flags + " --out " + dir.string()) == 0);
        const auto pkv = read_key_values((dir / "manifest.txt").string());
        CHECK(pkv.at(c.key) == c.value);
        CHECK(read_bytes(dir / "mask.hfdp") != read_bytes(base / "mask.hfdp"));
    }
}

TEST_CASE("cli: config file feeds options and flags win on conflict") {
    const fs::path dir = temp_dir("cli_cfg");
    std::ofstream((dir / "run.cfg").string()) << "R = 4\nmask-kind = radial\nheight = 48\n"
                                              << "width = 48\n# comment\nseed = 3\n";
    REQUIRE(run_cli("make-mask --config " + (dir / "run.cfg").string() + " --out " +
                    dir.string()) == 0);
    auto kv = read_key_values((dir / "manifest.txt").string());
    CHECK(kv.at("R") == "4");
    CHECK(kv.at("mask_kind") == "radial");

    REQUIRE(run_cli("make-mask --config " + (dir / "run.cfg").string() + " --R 6 --out " +
                    dir.string()) == 0);
    kv = read_key_values((dir / "manifest.txt").string());
    CHECK(kv.at("R") == "6");  // command line beats the config file
}

TEST_CASE("cli: identity-model full-mask reconstruction reproduces the phantom") {
    const fs::path dir = temp_dir("cli_idrecon");
    REQUIRE(run_cli("gen-data --kind shepp_logan --size 48 --count 1 --seed 0 --out " +
                    dir.string()) == 0);
    REQUIRE(run_cli("recon-mri --image " + (dir / "phantom_000.hfdp").string() +
                    " --identity-model --mask-kind random2d --R 1 --iterations 1 --out " +
                    dir.string()) == 0);
    const RealGrid truth = load_grid((dir / "phantom_000.hfdp").string());
    const ComplexGrid recon = load_complex_grid((dir / "recon.hfdp").string());
    double worst = 0.0;
    for (std::size_t n = 0; n < truth.size(); ++n)
        worst = std::max(worst, std::abs(recon.values[n].real() - truth.values[n]));
    CHECK(worst < 1e-6);
    CHECK(fs::exists(dir / "recon_preview.pgm"));
    CHECK(fs::exists(dir / "trace.csv"));
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "manifest.txt"));
}

TEST_CASE("cli: training twice with one seed gives identical loss traces") {
    const fs::path data = temp_dir("cli_train_data");
    REQUIRE(run_cli("gen-data --kind random_ellipses --size 48 --count 4 --seed 5 --out " +
                    data.string()) == 0);
    const fs::path a = temp_dir("cli_train_a");
    const fs::path b = temp_dir("cli_train_b");
    const std::string args = "train --data " + data.string() +
                             " --task ct --patch 12 --batch 4 --epochs 2 --steps 3 --features 4 "
                             "--depth 2 --seed 6 --out ";
    REQUIRE(run_cli(args + a.string()) == 0);
    REQUIRE(run_cli(args + b.string()) == 0);
    CHECK(read_bytes(a / "loss_trace.csv") == read_bytes(b / "loss_trace.csv"));
    CHECK(read_bytes(a / "model.hfdm") == read_bytes(b / "model.hfdm"));
}

TEST_CASE("cli: missing model is a clean failure") {
    const fs::path dir = temp_dir("cli_fail");
    REQUIRE(run_cli("gen-data --kind shepp_logan --size 48 --count 1 --seed 0 --out " +
                    dir.string()) == 0);
    CHECK(run_cli("recon-mri --image " + (dir / "phantom_000.hfdp").string() + " --out " +
                  dir.string()) != 0);
    CHECK(run_cli("metrics --test " + (dir / "nope.hfdp").string() + " --ref " +
                  (dir / "phantom_000.hfdp").string() + " --out " + dir.string()) != 0);
}
