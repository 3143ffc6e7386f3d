#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "doctest.h"
#include "hwm/config.hpp"
#include "hwm/errors.hpp"
#include "hwm/report.hpp"
#include "hwm/snapshot.hpp"
#include "hwm/synth.hpp"

using namespace hwm;
namespace fs = std::filesystem;

namespace {

// Runs the installed binary and maps the shell status back to an exit code.
int run_tool(const std::string& args) {
    const std::string cmd = std::string(HWMAP_BIN_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    if (WIFEXITED(rc)) return WEXITSTATUS(rc);
    return -2;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("hwmap_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string with_out(std::string text, const fs::path& dir) {
    const std::string key = "%OUT%";
    const std::size_t at = text.find(key);
    REQUIRE(at != std::string::npos);
    return text.replace(at, key.size(), dir.string());
}

const char* kSimulateConfig = R"({
  "grid": {"n": 1, "N": 16, "L": 6.283185307179586},
  "target": {"kind": "sphere"},
  "sim": {"dt": 0.05, "T": 0.2},
  "data": {"kind": "great_circle", "amplitude": 0.1, "mode": 1},
  "io": {"outDir": "%OUT%"},
  "seed": 3
})";

std::string first_line(const std::string& text) {
    return text.substr(0, text.find('\n'));
}

Snapshot sample_snapshot(bool with_ut) {
    const Grid g(1, 8, 2.0 * M_PI);
    Snapshot s;
    s.grid = g;
    s.eta = -1;
    s.time = 0.75;
    s.u = VecField(g);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    for (int c = 0; c < 3; ++c)
        for (auto& x : s.u.c[c]) x = d(rng);
    if (with_ut) {
        s.ut = VecField(g);
        for (int c = 0; c < 3; ++c)
            for (auto& x : s.ut->c[c]) x = d(rng);
    }
    return s;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("config parsing fills defaults and derives the target") {
    const RunConfig cfg = parse_config_text(R"({
        "grid": {"n": 1, "N": 16, "L": 6.283185307179586},
        "target": {"kind": "hyperboloid"}
    })");
    CHECK(cfg.grid.N == 16);
    CHECK(cfg.target.eta == -1);
    CHECK(cfg.sim.target.eta == -1); // mirrored even without a sim block
    CHECK(cfg.data.kind == "great_circle");
    CHECK(cfg.analysis.sigma == 0.25);
    CHECK(cfg.io.out_dir == ".");
    CHECK(cfg.io.formats == std::vector<std::string>{"csv"});
    CHECK(cfg.rng == "mt19937_64");
    CHECK(cfg.seed == 1);
}

TEST_CASE("config parsing rejects the documented misuses") {
    auto expect_fail = [](const std::string& text, const std::string& phrase) {
        bool threw = false;
        try {
            parse_config_text(text);
        } catch (const ConfigError& e) {
            threw = true;
            CHECK(std::string(e.what()).find(phrase) != std::string::npos);
        }
        CHECK(threw);
    };
    const std::string grid = R"("grid": {"n": 1, "N": 16, "L": 6.28},)";

    expect_fail(R"({"target": {"kind": "sphere"}})", "missing required field grid");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "grids": 1})", "unknown key grids");
    expect_fail("{" + grid + R"("target": {"kind": "sphere", "spin": 2}})", "unknown key target.spin");
    expect_fail("{" + grid + R"("target": {"kind": "torus"}})", "target.kind");
    expect_fail("{" + grid + R"("target": {"kind": "sphere", "eta": 1}})", "eta");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "sim": {"dt": 1.0, "T": 2.0}})",
                "stability cap");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "sim": {"dt": -0.01, "T": 1.0}})",
                "sim.dt");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "sim": {"T": 1.0}})",
                "missing required field sim.dt");
    expect_fail("{" + grid +
                    R"("target": {"kind": "sphere"}, "analysis": {"sigma": 0.3}})",
                "sigma");
    expect_fail("{" + grid +
                    R"("target": {"kind": "sphere"}, "analysis": {"shellOffset": 1}})",
                "shellOffset");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "seed": -4})", "seed");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "rng": "lcg"})", "rng");
    expect_fail("{" + grid + R"("target": {"kind": "sphere"}, "data": {"kind": "noise"}})",
                "data.kind");
    expect_fail("[1, 2]", "config");
    expect_fail("{ not json", "config");
}

TEST_CASE("canonical form is order-independent and override-sensitive") {
    const std::string a = R"({
        "grid": {"n": 1, "N": 16, "L": 6.28},
        "target": {"kind": "sphere"},
        "seed": 11
    })";
    const std::string b = R"({
        "seed": 11,
        "target": {"kind": "sphere"},
        "grid": {"L": 6.28, "N": 16, "n": 1}
    })";
    const RunConfig ca = parse_config_text(a);
    const RunConfig cb = parse_config_text(b);
    CHECK(canonical_json(ca) == canonical_json(cb));
    CHECK(config_hash(ca) == config_hash(cb));

    RunConfig cc = ca;
    cc.seed = 12;
    CHECK(config_hash(cc) != config_hash(ca));
    cc = ca;
    cc.io.out_dir = "elsewhere";
    CHECK(config_hash(cc) != config_hash(ca));
}

TEST_CASE("report primitives") {
    CHECK(report_header("energy", 0xdeadbeefULL) ==
          "# hwmap-report schema=1 kind=energy config=00000000deadbeef");
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> d(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        const double x = d(rng);
        CHECK(std::stod(format_double(x)) == x); // shortest-round-trip printing
    }

    const fs::path dir = fresh_dir("report");
    CsvReport rep;
    rep.kind = "demo";
    rep.config_hash = 7;
    rep.columns = {"a", "b"};
    rep.rows = {{1.0, 0.5}, {2.0, 0.25}};
    const fs::path file = dir / "demo.csv";
    write_csv(file.string(), rep);
    const std::string text = read_text_file(file.string());
    CHECK(first_line(text) == report_header("demo", 7));
    CHECK(text.find("a,b\n") != std::string::npos);
    CHECK(text.find("2,0.25\n") != std::string::npos);
    CHECK_THROWS_AS(read_text_file((dir / "missing.csv").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("snapshot files round-trip bitwise") {
    const fs::path dir = fresh_dir("snap");
    for (bool with_ut : {true, false}) {
        const Snapshot s = sample_snapshot(with_ut);
        const fs::path file = dir / (with_ut ? "a.bin" : "b.bin");
        snapshot_write(file.string(), s);
        const Snapshot r = snapshot_read(file.string());
        CHECK(r.grid == s.grid);
        CHECK(r.eta == s.eta);
        CHECK(r.time == s.time);
        CHECK(r.ut.has_value() == with_ut);
        for (int c = 0; c < 3; ++c) {
            CHECK(r.u.c[c] == s.u.c[c]); // exact doubles, no tolerance
            if (with_ut) CHECK(r.ut->c[c] == s.ut->c[c]);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("snapshot failure modes carry their reason") {
    const fs::path dir = fresh_dir("snapbad");
    const fs::path file = dir / "s.bin";
    snapshot_write(file.string(), sample_snapshot(true));
    const std::string good = read_text_file(file.string());

    auto reason_of = [&](const std::string& bytes) {
        write_text_file(file.string(), bytes);
        try {
            snapshot_read(file.string());
        } catch (const IoError& e) {
            return e.reason();
        }
        return IoError::Reason::Generic; // unreachable when corrupt
    };

    std::string bad = good;
    bad[0] = 'X';
    CHECK(reason_of(bad) == IoError::Reason::BadMagic);

    bad = good;
    bad.resize(bad.size() - 9);
    CHECK(reason_of(bad) == IoError::Reason::Truncated);

    bad = good;
    bad.resize(20); // ends inside the fixed header
    CHECK(reason_of(bad) == IoError::Reason::Truncated);

    // The payload count lives at bytes [46, 54); announcing one extra value
    // contradicts the grid dimensions.
    bad = good;
    bad[46] = static_cast<char>(static_cast<unsigned char>(bad[46]) + 1);
    CHECK(reason_of(bad) == IoError::Reason::LengthMismatch);

    bad = good;
    bad[6] = 2; // unsupported version
    bool threw = false;
    write_text_file(file.string(), bad);
    try {
        snapshot_read(file.string());
    } catch (const IoError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("version") != std::string::npos);
    }
    CHECK(threw);

    CHECK_THROWS_AS(snapshot_read((dir / "nope.bin").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("simulate writes traceable reports and snapshots") {
    const fs::path dir = fresh_dir("simulate");
    const std::string text = with_out(kSimulateConfig, dir);
    const fs::path cfg_path = dir / "run.json";
    write_text_file(cfg_path.string(), text);

    CHECK(run_tool("simulate --config " + cfg_path.string()) == 0);
    CHECK(fs::exists(dir / "energy.csv"));
    CHECK(fs::exists(dir / "snap_000000.bin"));
    CHECK(fs::exists(dir / "snap_000004.bin")); // final frame of ceil(0.2/0.05)

    const RunConfig cfg = parse_config_text(text);
    const std::string energy = read_text_file((dir / "energy.csv").string());
    CHECK(first_line(energy) == report_header("energy", config_hash(cfg)));

    const Snapshot s = snapshot_read((dir / "snap_000004.bin").string());
    CHECK(s.time == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(s.ut.has_value());
    fs::remove_all(dir);
}

TEST_CASE("identical seeds give byte-identical artifacts") {
    const fs::path dir = fresh_dir("determinism");
    const std::string text = with_out(kSimulateConfig, dir);
    const fs::path cfg_path = fs::temp_directory_path() / "hwmap_test_det.json";
    write_text_file(cfg_path.string(), text);

    REQUIRE(run_tool("simulate --config " + cfg_path.string()) == 0);
    const std::string energy1 = read_text_file((dir / "energy.csv").string());
    const std::string snap1 = read_text_file((dir / "snap_000002.bin").string());

    fs::remove_all(dir);
    fs::create_directories(dir);
    REQUIRE(run_tool("simulate --config " + cfg_path.string()) == 0);
    CHECK(read_text_file((dir / "energy.csv").string()) == energy1);
    CHECK(read_text_file((dir / "snap_000002.bin").string()) == snap1);

    fs::remove_all(dir);
    fs::remove(cfg_path);
}

TEST_CASE("exit codes separate configuration, numerics, and io") {
    const fs::path dir = fresh_dir("codes");

    SUBCASE("flag misuse and bad configs exit 2") {
        CHECK(run_tool("simulate") == 2); // --config is required
        CHECK(run_tool("warp --config x.json") == 2);

        const fs::path bad = dir / "bad.json";
        write_text_file(bad.string(),
                        R"({"grid": {"n": 1, "N": 16, "L": 6.28}, "target": {"kind": "sphere"}})");
        // simulate needs the sim block that this config omits
        CHECK(run_tool("simulate --config " + bad.string()) == 2);
    }

    SUBCASE("unreadable config exits 4") {
        CHECK(run_tool("simulate --config " + (dir / "absent.json").string()) == 4);
    }

    SUBCASE("diverging iteration exits 3") {
        const fs::path cfg = dir / "diverge.json";
        write_text_file(cfg.string(), with_out(R"({
            "grid": {"n": 1, "N": 16, "L": 6.283185307179586},
            "target": {"kind": "sphere"},
            "data": {"kind": "great_circle", "amplitude": 0.5, "mode": 1},
            "iterate": {"T": 0.1, "dt": 0.01, "tolOuter": 1e-30, "maxOuter": 1},
            "io": {"outDir": "%OUT%"}
        })", dir));
        CHECK(run_tool("iterate --config " + cfg.string()) == 3);
    }

    SUBCASE("corrupt snapshot store exits 4, missing channel exits 2") {
        const fs::path store = fresh_dir("codes_store");
        Snapshot s = sample_snapshot(true);
        for (int i = 0; i < 3; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "snap_%06d.bin", i);
            s.time = 0.05 * i;
            snapshot_write((store / name).string(), s);
        }
        const fs::path cfg = store / "res.json";
        write_text_file(cfg.string(), with_out(R"({
            "grid": {"n": 1, "N": 8, "L": 6.283185307179586},
            "target": {"kind": "hyperboloid"},
            "io": {"outDir": "%OUT%"}
        })", store));

        // Remove the derivative channel from one file: configuration error.
        Snapshot noud = sample_snapshot(false);
        noud.time = 0.05;
        snapshot_write((store / "snap_000001.bin").string(), noud);
        CHECK(run_tool("residual --config " + cfg.string()) == 2);

        // Corrupt a magic string: io error.
        s.time = 0.05;
        snapshot_write((store / "snap_000001.bin").string(), s);
        std::string bytes = read_text_file((store / "snap_000000.bin").string());
        bytes[1] = 'Z';
        write_text_file((store / "snap_000000.bin").string(), bytes);
        CHECK(run_tool("residual --config " + cfg.string()) == 4);
        fs::remove_all(store);
    }

    SUBCASE("empty snapshot directory exits 2") {
        const fs::path store = fresh_dir("codes_empty");
        const fs::path cfg = store / "res.json";
        write_text_file(cfg.string(), with_out(R"({
            "grid": {"n": 1, "N": 8, "L": 6.283185307179586},
            "target": {"kind": "sphere"},
            "io": {"outDir": "%OUT%"}
        })", store));
        CHECK(run_tool("residual --config " + cfg.string()) == 2);
        fs::remove_all(store);
    }

    fs::remove_all(dir);
}

TEST_CASE("residual consumes stored runs and runs dt families") {
    const fs::path dir = fresh_dir("residual");
    const std::string text = with_out(kSimulateConfig, dir);
    const fs::path cfg_path = dir / "run.json";
    write_text_file(cfg_path.string(), text);

    REQUIRE(run_tool("simulate --config " + cfg_path.string()) == 0);
    CHECK(run_tool("residual --config " + cfg_path.string()) == 0);
    const std::string res = read_text_file((dir / "residual.csv").string());
    CHECK(res.find("kind=residual") != std::string::npos);
    CHECK(res.find("time,total,group_i,group_ii,group_iii") != std::string::npos);

    CHECK(run_tool("residual --config " + cfg_path.string() + " --dt-family 0.05,0.025") == 0);
    const std::string conv = read_text_file((dir / "convergence.csv").string());
    CHECK(conv.find("kind=convergence") != std::string::npos);

    CHECK(run_tool("residual --config " + cfg_path.string() + " --dt-family 0.05") == 2);
    CHECK(run_tool("residual --config " + cfg_path.string() + " --dt-family 0.05,zebra") == 2);
    CHECK(run_tool("residual --config " + cfg_path.string() + " --dt-family 0.05,9.0") == 2);
    fs::remove_all(dir);
}

TEST_CASE("analysis, gauge, and iteration commands emit their reports") {
    const fs::path dir = fresh_dir("suite");
    const fs::path cfg_path = dir / "run.json";
    write_text_file(cfg_path.string(), with_out(R"({
        "grid": {"n": 1, "N": 32, "L": 6.283185307179586},
        "target": {"kind": "sphere"},
        "sim": {"dt": 0.02, "T": 0.1},
        "data": {"kind": "random_phases", "amplitude": 0.1, "shell": 2},
        "analysis": {"sigma": 0.25, "shellOffset": 2, "kCut": 4},
        "iterate": {"T": 0.05, "dt": 0.01, "tolOuter": 1e-8, "maxOuter": 30},
        "io": {"outDir": "%OUT%"},
        "seed": 7
    })", dir));

    CHECK(run_tool("analyze --config " + cfg_path.string()) == 0);
    for (const char* name : {"envelope.csv", "orthomicro.csv", "summary.csv"})
        CHECK(fs::exists(dir / name));
    CHECK(first_line(read_text_file((dir / "envelope.csv").string()))
              .find("kind=envelope") != std::string::npos);

    CHECK(run_tool("gauge --config " + cfg_path.string()) == 0);
    CHECK(fs::exists(dir / "gauge.csv"));
    CHECK(fs::exists(dir / "gauge_summary.csv"));

    CHECK(run_tool("iterate --config " + cfg_path.string()) == 0);
    const std::string it = read_text_file((dir / "iterate.csv").string());
    CHECK(it.find("kind=iterate") != std::string::npos);
    CHECK(it.find("iter,diff,contraction,inner_count,sphere_violation") != std::string::npos);

    // A seed override flows into the artifacts' identification hash.
    CHECK(run_tool("analyze --config " + cfg_path.string() + " --seed 8") == 0);
    RunConfig cfg = parse_config_text(read_text_file(cfg_path.string()));
    cfg.seed = 8;
    CHECK(first_line(read_text_file((dir / "envelope.csv").string())) ==
          report_header("envelope", config_hash(cfg)));
    fs::remove_all(dir);
}

} // TEST_SUITE
