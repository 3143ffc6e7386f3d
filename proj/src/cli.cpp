#include "hwm/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hwm/analysis.hpp"
#include "hwm/config.hpp"
#include "hwm/dynamics.hpp"
#include "hwm/errors.hpp"
#include "hwm/report.hpp"
#include "hwm/snapshot.hpp"
#include "hwm/synth.hpp"
#include "hwm/util.hpp"
#include "hwm/waveform.hpp"

namespace hwm {

namespace {

namespace fs = std::filesystem;

std::string join_path(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_out_dir(const std::string& dir) {
    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError(dir + ": cannot create output directory (" + e.what() + ")");
    }
}

std::string snapshot_name(std::size_t frame) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snap_%06zu.bin", frame);
    return buf;
}

void require_sim_block(const RunConfig& cfg) {
    if (cfg.sim.dt <= 0.0) throw ConfigError("config: missing required field sim.dt");
    if (cfg.sim.T <= 0.0) throw ConfigError("config: missing required field sim.T");
}

int cmd_simulate(const RunConfig& cfg, std::uint64_t hash) {
    require_sim_block(cfg);
    ensure_out_dir(cfg.io.out_dir);

    std::mt19937_64 rng(cfg.seed);
    const VecField u0 = make_data(cfg, rng);
    const EvolveResult res = evolve(u0, cfg.sim);
    const Trajectory& traj = res.traj;

    for (std::size_t i = 0; i < traj.frames(); ++i) {
        if (i % static_cast<std::size_t>(cfg.io.snapshot_every) != 0 &&
            i + 1 != traj.frames())
            continue;
        Snapshot snap;
        snap.grid = traj.grid;
        snap.eta = traj.eta;
        snap.time = traj.times[i];
        snap.u = traj.u[i];
        snap.ut = traj.ut[i];
        snapshot_write(join_path(cfg.io.out_dir, snapshot_name(i)), snap);
    }

    CsvReport rep;
    rep.kind = "energy";
    rep.config_hash = hash;
    rep.columns = {"time", "energy", "constraint"};
    for (std::size_t i = 0; i < traj.frames(); ++i) {
        if (i % static_cast<std::size_t>(cfg.sim.diagnostics_every) != 0 &&
            i + 1 != traj.frames())
            continue;
        rep.rows.push_back({traj.times[i], energy(traj.u[i], cfg.target),
                            constraint_violation(traj.u[i], cfg.target)});
    }
    write_csv(join_path(cfg.io.out_dir, "energy.csv"), rep);
    return 0;
}

Trajectory read_snapshot_dir(const std::string& dir) {
    std::vector<std::string> names;
    try {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("snap_", 0) == 0 && name.size() > 4 &&
                name.substr(name.size() - 4) == ".bin")
                names.push_back(entry.path().string());
        }
    } catch (const fs::filesystem_error& e) {
        throw IoError(dir + ": cannot list directory (" + e.what() + ")");
    }
    if (names.empty())
        throw ConfigError("residual: no snapshots found in " + dir);
    std::sort(names.begin(), names.end());

    Trajectory traj;
    for (std::size_t i = 0; i < names.size(); ++i) {
        Snapshot s = snapshot_read(names[i]);
        if (!s.ut)
            throw ConfigError("residual: snapshot " + names[i] +
                              " lacks the time-derivative channel");
        if (i == 0) {
            traj.grid = s.grid;
            traj.eta = s.eta;
        } else if (!(s.grid == traj.grid) || s.eta != traj.eta) {
            throw ConfigError("residual: snapshot " + names[i] +
                              " disagrees with the first snapshot's grid or target");
        }
        traj.times.push_back(s.time);
        traj.u.push_back(std::move(s.u));
        traj.ut.push_back(std::move(*s.ut));
    }
    for (std::size_t i = 0; i + 2 < traj.times.size(); ++i) {
        const double d1 = traj.times[i + 1] - traj.times[i];
        const double d2 = traj.times[i + 2] - traj.times[i + 1];
        if (std::abs(d2 - d1) > 1e-9 * std::max(1.0, std::abs(d1)))
            throw ConfigError("residual: snapshot times are not uniformly spaced");
    }
    return traj;
}

int cmd_residual(const RunConfig& cfg, std::uint64_t hash, const std::string& dt_family) {
    ensure_out_dir(cfg.io.out_dir);

    if (dt_family.empty()) {
        const Trajectory traj = read_snapshot_dir(cfg.io.out_dir);
        const WaveResidualReport wr = box_residual(traj);
        CsvReport rep;
        rep.kind = "residual";
        rep.config_hash = hash;
        rep.columns = {"time", "total", "group_i", "group_ii", "group_iii"};
        for (std::size_t i = 0; i < wr.times.size(); ++i)
            rep.rows.push_back({wr.times[i], wr.total[i], wr.group_i[i], wr.group_ii[i],
                                wr.group_iii[i]});
        write_csv(join_path(cfg.io.out_dir, "residual.csv"), rep);
        return 0;
    }

    // dt-family mode: fresh runs at each step size, then the fitted order.
    require_sim_block(cfg);
    std::vector<double> dts;
    {
        std::string tail = dt_family;
        while (!tail.empty()) {
            const std::size_t comma = tail.find(',');
            const std::string tok = tail.substr(0, comma);
            tail = comma == std::string::npos ? "" : tail.substr(comma + 1);
            try {
                dts.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("residual: cannot parse dt-family entry \"" + tok + "\"");
            }
        }
    }
    if (dts.size() < 2)
        throw ConfigError("residual: dt-family needs at least two step sizes");
    const double cap = SimConfig::dt_cap(cfg.grid);
    for (double dt : dts)
        if (!(dt > 0.0) || dt > cap * (1.0 + 1e-12))
            throw ConfigError("residual: dt-family entries must lie in (0, " +
                              format_double(cap) + "]");

    std::mt19937_64 rng(cfg.seed);
    const VecField u0 = make_data(cfg, rng);

    std::vector<double> max_res;
    for (double dt : dts) {
        SimConfig sc = cfg.sim;
        sc.dt = dt;
        const EvolveResult res = evolve(u0, sc);
        max_res.push_back(box_residual(res.traj).max_total());
    }
    std::vector<double> lx(dts.size()), ly(dts.size());
    for (std::size_t i = 0; i < dts.size(); ++i) {
        lx[i] = std::log2(dts[i]);
        ly[i] = std::log2(std::max(max_res[i], 1e-300));
    }
    const double slope = fit_slope(lx, ly);

    CsvReport rep;
    rep.kind = "convergence";
    rep.config_hash = hash;
    rep.columns = {"dt", "max_residual", "slope"};
    for (std::size_t i = 0; i < dts.size(); ++i)
        rep.rows.push_back({dts[i], max_res[i], slope});
    write_csv(join_path(cfg.io.out_dir, "convergence.csv"), rep);
    return 0;
}

int cmd_analyze(const RunConfig& cfg, std::uint64_t hash) {
    ensure_out_dir(cfg.io.out_dir);

    std::mt19937_64 rng(cfg.seed);
    const VecField u0 = make_data(cfg, rng);
    const VecField ut0 = halfwave_rhs(u0, cfg.target);
    const LPSpec spec = LPSpec::infer(cfg.grid);

    const FrequencyEnvelope env = fit_envelope(u0, ut0, cfg.analysis.sigma, spec);
    const EnvelopeCheck chk = check_envelope(env, u0, ut0, spec, cfg.analysis.C0);
    CsvReport erep;
    erep.kind = "envelope";
    erep.config_hash = hash;
    erep.columns = {"shell", "c", "ratio"};
    for (int k = spec.kMin; k <= spec.kMax; ++k) {
        const std::size_t i = static_cast<std::size_t>(k - spec.kMin);
        erep.rows.push_back({static_cast<double>(k), env.c[i], chk.ratio[i]});
    }
    write_csv(join_path(cfg.io.out_dir, "envelope.csv"), erep);

    const OrthomicroReport om =
        orthomicro_residual(u0, cfg.analysis.shell_offset, spec);
    CsvReport orep;
    orep.kind = "orthomicro";
    orep.config_hash = hash;
    orep.columns = {"shell", "localized", "parts"};
    for (int k = spec.kMin; k <= spec.kMax; ++k) {
        const std::size_t i = static_cast<std::size_t>(k - spec.kMin);
        orep.rows.push_back({static_cast<double>(k), om.localized[i], om.localized_parts[i]});
    }
    write_csv(join_path(cfg.io.out_dir, "orthomicro.csv"), orep);

    CsvReport srep;
    srep.kind = "summary";
    srep.config_hash = hash;
    srep.columns = {"eps", "max_ratio", "orthomicro_residual"};
    srep.rows.push_back({cfg.analysis.eps > 0.0 ? cfg.analysis.eps : env.eps,
                         chk.max_ratio, om.residual});
    write_csv(join_path(cfg.io.out_dir, "summary.csv"), srep);
    return 0;
}

int cmd_gauge(const RunConfig& cfg, std::uint64_t hash) {
    require_sim_block(cfg);
    ensure_out_dir(cfg.io.out_dir);
    const LPSpec spec = LPSpec::infer(cfg.grid);

    // Amplitude-halving family, identical phases per scale (fresh generator
    // with the same seed), short evolution windows.
    const std::vector<double> scales = {1.0, 0.5, 0.25, 0.125};
    std::vector<Trajectory> family;
    SimConfig sc = cfg.sim;
    sc.T = 4.0 * sc.dt;
    for (double s : scales) {
        RunConfig scaled = cfg;
        scaled.data.amplitude *= s;
        std::mt19937_64 rng(cfg.seed);
        const VecField u0 = make_data(scaled, rng);
        family.push_back(evolve(u0, sc).traj);
    }

    const GaugeDiagnostics diag =
        gauge_diagnostics(family, scales, cfg.analysis.k_cut, spec, cfg.analysis.k_lo);
    CsvReport grep;
    grep.kind = "gauge";
    grep.config_hash = hash;
    grep.columns = {"scale", "utu_dev", "utu_dev_dt", "u_inf", "uinv_inf",
                    "du_minus_au", "du_inf", "du_l2t_linfx", "boxu_l2"};
    for (std::size_t i = 0; i < scales.size(); ++i)
        grep.rows.push_back({diag.scale[i], diag.utu_dev[i], diag.utu_dev_dt[i],
                             diag.u_inf[i], diag.uinv_inf[i], diag.du_minus_au[i],
                             diag.du_inf[i], diag.du_l2t_linfx[i], diag.boxu_l2[i]});
    write_csv(join_path(cfg.io.out_dir, "gauge.csv"), grep);

    const GaugeResidualReport gr =
        gauge_residual(family.front(), cfg.analysis.k_cut, spec, cfg.analysis.k_lo);
    CsvReport srep;
    srep.kind = "gauge_summary";
    srep.config_hash = hash;
    srep.columns = {"slope_utu", "slope_du_minus_au", "residual", "baseline",
                    "ratio", "invertible", "monotone"};
    srep.rows.push_back({diag.slope_utu, diag.slope_du_minus_au, gr.residual,
                         gr.baseline, gr.ratio, diag.invertible ? 1.0 : 0.0,
                         diag.monotone ? 1.0 : 0.0});
    write_csv(join_path(cfg.io.out_dir, "gauge_summary.csv"), srep);
    return 0;
}

int cmd_iterate(const RunConfig& cfg, std::uint64_t hash) {
    ensure_out_dir(cfg.io.out_dir);

    std::mt19937_64 rng(cfg.seed);
    const VecField u0 = make_data(cfg, rng);
    const VecField ut0 = halfwave_rhs(u0, cfg.target);

    PicardSettings ps;
    ps.T = cfg.iterate.T;
    ps.dt = cfg.iterate.dt;
    ps.tol_outer = cfg.iterate.tol_outer;
    ps.tol_inner = cfg.iterate.tol_inner;
    ps.max_outer = cfg.iterate.max_outer;
    ps.max_inner = cfg.iterate.max_inner;
    const PicardResult res = picard_solve(u0, ut0, cfg.target, ps);

    CsvReport rep;
    rep.kind = "iterate";
    rep.config_hash = hash;
    rep.columns = {"iter", "diff", "contraction", "inner_count", "sphere_violation"};
    for (int it = 1; it <= res.log.iterations; ++it) {
        const std::size_t i = static_cast<std::size_t>(it - 1);
        rep.rows.push_back({static_cast<double>(it), res.log.outer_diff[i],
                            it >= 2 ? res.log.contraction[i - 1] : 0.0,
                            static_cast<double>(res.log.inner_counts[i]),
                            res.log.sphere_violation[static_cast<std::size_t>(it)]});
    }
    write_csv(join_path(cfg.io.out_dir, "iterate.csv"), rep);
    return 0;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"half-wave map simulation and analysis workbench"};
    app.require_subcommand(1);

    struct Common {
        std::string config;
        std::string out;
        std::uint64_t seed = 0;
        CLI::Option* out_opt = nullptr;
        CLI::Option* seed_opt = nullptr;
    };
    std::array<Common, 5> common;
    const char* names[5] = {"simulate", "residual", "analyze", "gauge", "iterate"};
    const char* descs[5] = {"run the flow and write snapshots + energy report",
                            "wave-reformulation residual of stored or fresh runs",
                            "envelope and microlocal identity reports",
                            "gauge construction diagnostics",
                            "two-level iteration contraction log"};
    std::string dt_family;
    std::array<CLI::App*, 5> subs{};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descs[i]);
        sub->add_option("--config", common[static_cast<std::size_t>(i)].config,
                        "path to the run configuration (JSON)")
            ->required();
        common[static_cast<std::size_t>(i)].out_opt =
            sub->add_option("--out", common[static_cast<std::size_t>(i)].out,
                            "output directory (overrides io.outDir)");
        common[static_cast<std::size_t>(i)].seed_opt =
            sub->add_option("--seed", common[static_cast<std::size_t>(i)].seed,
                            "seed override");
        subs[static_cast<std::size_t>(i)] = sub;
    }
    subs[1]->add_option("--dt-family", dt_family,
                        "comma-separated step sizes for a convergence study");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        int which = -1;
        for (int i = 0; i < 5; ++i)
            if (subs[static_cast<std::size_t>(i)]->parsed()) which = i;
        const Common& c = common[static_cast<std::size_t>(which)];

        RunConfig cfg = parse_config(c.config);
        if (c.out_opt->count() > 0) cfg.io.out_dir = c.out;
        if (c.seed_opt->count() > 0) cfg.seed = c.seed;
        // The hash covers the effective configuration, overrides included.
        const std::uint64_t hash = config_hash(cfg);

        switch (which) {
            case 0: return cmd_simulate(cfg, hash);
            case 1: return cmd_residual(cfg, hash, dt_family);
            case 2: return cmd_analyze(cfg, hash);
            case 3: return cmd_gauge(cfg, hash);
            case 4: return cmd_iterate(cfg, hash);
            default: return 2;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
}

} // namespace hwm
