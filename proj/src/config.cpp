#include "hwm/config.hpp"

#include <initializer_list>
#include <string>

#include "json.hpp"

#include "hwm/errors.hpp"
#include "hwm/report.hpp"
#include "hwm/util.hpp"

namespace hwm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

std::string join(const std::string& parent, const std::string& key) {
    return parent.empty() ? key : parent + "." + key;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) { known = true; break; }
        if (!known) fail("unknown key " + join(path, it.key()));
    }
}

const json& need(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) fail("missing required field " + join(path, key));
    return *it;
}

const json* maybe(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const json& need_object(const json& root, const char* key) {
    const json& v = need(root, "", key);
    if (!v.is_object()) fail(std::string(key) + " must be an object");
    return v;
}

double as_num(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where + " must be a number");
    return v.get<double>();
}

long as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where + " must be an integer");
    return v.get<long>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) fail(where + " must be a boolean");
    return v.get<bool>();
}

std::string as_str(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where + " must be a string");
    return v.get<std::string>();
}

} // namespace

RunConfig parse_config(const std::string& path) {
    return parse_config_text(read_text_file(path));
}

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const std::exception& e) {
        fail(std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) fail("root must be an object");
    check_keys(root, "", {"grid", "target", "sim", "data", "analysis", "iterate",
                          "io", "rng", "seed"});

    RunConfig cfg;

    {
        const json& jg = need_object(root, "grid");
        check_keys(jg, "grid", {"n", "N", "L"});
        cfg.grid.n = static_cast<int>(as_int(need(jg, "grid", "n"), "grid.n"));
        cfg.grid.N = static_cast<int>(as_int(need(jg, "grid", "N"), "grid.N"));
        cfg.grid.L = as_num(need(jg, "grid", "L"), "grid.L");
        cfg.grid.validate();
    }

    {
        const json& jt = need_object(root, "target");
        if (jt.contains("eta"))
            fail("target.eta is derived from target.kind and may not be set");
        check_keys(jt, "target", {"kind", "base", "rejectLowerSheet"});
        Vec3 base{1.0, 0.0, 0.0};
        if (const json* jb = maybe(jt, "base")) {
            if (!jb->is_array() || jb->size() != 3)
                fail("target.base must be an array of 3 numbers");
            for (int i = 0; i < 3; ++i)
                base[static_cast<std::size_t>(i)] = as_num((*jb)[static_cast<std::size_t>(i)], "target.base");
        }
        const std::string kind = as_str(need(jt, "target", "kind"), "target.kind");
        if (kind == "sphere")
            cfg.target = TargetSpec::sphere(base);
        else if (kind == "hyperboloid")
            cfg.target = TargetSpec::hyperboloid(base);
        else
            fail("target.kind must be \"sphere\" or \"hyperboloid\"");
        if (const json* jr = maybe(jt, "rejectLowerSheet"))
            cfg.target.reject_lower_sheet = as_bool(*jr, "target.rejectLowerSheet");
        cfg.target.validate();
    }

    if (root.contains("sim")) {
        const json& js = need_object(root, "sim");
        check_keys(js, "sim", {"dt", "T", "integrator", "retractEvery", "diagnosticsEvery"});
        cfg.sim.dt = as_num(need(js, "sim", "dt"), "sim.dt");
        cfg.sim.T = as_num(need(js, "sim", "T"), "sim.T");
        if (!(cfg.sim.dt > 0.0)) fail("sim.dt must be positive");
        if (!(cfg.sim.T >= cfg.sim.dt)) fail("sim.T must be at least sim.dt");
        const double cap = SimConfig::dt_cap(cfg.grid);
        if (cfg.sim.dt > cap * (1.0 + 1e-12))
            fail("sim.dt exceeds the stability cap " + format_double(cap) +
                 " for this grid");
        if (const json* ji = maybe(js, "integrator")) {
            const std::string name = as_str(*ji, "sim.integrator");
            if (name == "rk4")
                cfg.sim.integrator = Integrator::Rk4Retract;
            else if (name == "midpoint")
                cfg.sim.integrator = Integrator::MidpointRetract;
            else
                fail("sim.integrator must be \"rk4\" or \"midpoint\"");
        }
        if (const json* jr = maybe(js, "retractEvery")) {
            cfg.sim.retract_every = static_cast<int>(as_int(*jr, "sim.retractEvery"));
            if (cfg.sim.retract_every < 1) fail("sim.retractEvery must be >= 1");
        }
        if (const json* jd = maybe(js, "diagnosticsEvery")) {
            cfg.sim.diagnostics_every = static_cast<int>(as_int(*jd, "sim.diagnosticsEvery"));
            if (cfg.sim.diagnostics_every < 1) fail("sim.diagnosticsEvery must be >= 1");
        }
    }
    cfg.sim.target = cfg.target;

    if (root.contains("data")) {
        const json& jd = need_object(root, "data");
        check_keys(jd, "data", {"kind", "amplitude", "mode", "shell"});
        if (const json* jk = maybe(jd, "kind")) {
            cfg.data.kind = as_str(*jk, "data.kind");
            if (cfg.data.kind != "constant" && cfg.data.kind != "great_circle" &&
                cfg.data.kind != "random_phases")
                fail("data.kind must be one of constant, great_circle, random_phases");
        }
        if (const json* ja = maybe(jd, "amplitude")) {
            cfg.data.amplitude = as_num(*ja, "data.amplitude");
            if (!(cfg.data.amplitude >= 0.0)) fail("data.amplitude must be >= 0");
        }
        if (const json* jm = maybe(jd, "mode")) {
            cfg.data.mode = static_cast<int>(as_int(*jm, "data.mode"));
            if (cfg.data.mode < 1) fail("data.mode must be >= 1");
        }
        if (const json* jsh = maybe(jd, "shell"))
            cfg.data.shell = static_cast<int>(as_int(*jsh, "data.shell"));
    }

    if (root.contains("analysis")) {
        const json& ja = need_object(root, "analysis");
        check_keys(ja, "analysis", {"sigma", "shellOffset", "kCut", "kLo", "C0", "c0", "eps"});
        if (const json* v = maybe(ja, "sigma")) {
            cfg.analysis.sigma = as_num(*v, "analysis.sigma");
            if (!(cfg.analysis.sigma > 0.0) || cfg.analysis.sigma > 0.25)
                fail("analysis.sigma must lie in (0, 0.25]");
        }
        if (const json* v = maybe(ja, "shellOffset")) {
            cfg.analysis.shell_offset = static_cast<int>(as_int(*v, "analysis.shellOffset"));
            if (cfg.analysis.shell_offset < 2) fail("analysis.shellOffset must be >= 2");
        }
        if (const json* v = maybe(ja, "kCut"))
            cfg.analysis.k_cut = static_cast<int>(as_int(*v, "analysis.kCut"));
        if (const json* v = maybe(ja, "kLo"))
            cfg.analysis.k_lo = static_cast<int>(as_int(*v, "analysis.kLo"));
        if (const json* v = maybe(ja, "C0")) {
            cfg.analysis.C0 = as_num(*v, "analysis.C0");
            if (!(cfg.analysis.C0 > 0.0)) fail("analysis.C0 must be positive");
        }
        if (const json* v = maybe(ja, "c0")) {
            cfg.analysis.c0 = as_num(*v, "analysis.c0");
            if (!(cfg.analysis.c0 > 0.0)) fail("analysis.c0 must be positive");
        }
        if (const json* v = maybe(ja, "eps")) {
            cfg.analysis.eps = as_num(*v, "analysis.eps");
            if (!(cfg.analysis.eps >= 0.0)) fail("analysis.eps must be >= 0");
        }
    }

    if (root.contains("iterate")) {
        const json& ji = need_object(root, "iterate");
        check_keys(ji, "iterate", {"T", "dt", "tolOuter", "tolInner", "maxOuter", "maxInner"});
        if (const json* v = maybe(ji, "T")) cfg.iterate.T = as_num(*v, "iterate.T");
        if (const json* v = maybe(ji, "dt")) cfg.iterate.dt = as_num(*v, "iterate.dt");
        if (!(cfg.iterate.dt > 0.0)) fail("iterate.dt must be positive");
        if (!(cfg.iterate.T >= cfg.iterate.dt)) fail("iterate.T must be at least iterate.dt");
        if (const json* v = maybe(ji, "tolOuter")) {
            cfg.iterate.tol_outer = as_num(*v, "iterate.tolOuter");
            if (!(cfg.iterate.tol_outer > 0.0)) fail("iterate.tolOuter must be positive");
        }
        if (const json* v = maybe(ji, "tolInner")) {
            cfg.iterate.tol_inner = as_num(*v, "iterate.tolInner");
            if (!(cfg.iterate.tol_inner > 0.0)) fail("iterate.tolInner must be positive");
        }
        if (const json* v = maybe(ji, "maxOuter")) {
            cfg.iterate.max_outer = static_cast<int>(as_int(*v, "iterate.maxOuter"));
            if (cfg.iterate.max_outer < 1) fail("iterate.maxOuter must be >= 1");
        }
        if (const json* v = maybe(ji, "maxInner")) {
            cfg.iterate.max_inner = static_cast<int>(as_int(*v, "iterate.maxInner"));
            if (cfg.iterate.max_inner < 1) fail("iterate.maxInner must be >= 1");
        }
    }

    if (root.contains("io")) {
        const json& jio = need_object(root, "io");
        check_keys(jio, "io", {"outDir", "snapshotEvery", "formats"});
        if (const json* v = maybe(jio, "outDir"))
            cfg.io.out_dir = as_str(*v, "io.outDir");
        if (const json* v = maybe(jio, "snapshotEvery")) {
            cfg.io.snapshot_every = static_cast<int>(as_int(*v, "io.snapshotEvery"));
            if (cfg.io.snapshot_every < 1) fail("io.snapshotEvery must be >= 1");
        }
        if (const json* v = maybe(jio, "formats")) {
            if (!v->is_array()) fail("io.formats must be an array of strings");
            cfg.io.formats.clear();
            for (const auto& f : *v) {
                const std::string name = as_str(f, "io.formats");
                if (name != "csv" && name != "json")
                    fail("io.formats entries must be \"csv\" or \"json\"");
                cfg.io.formats.push_back(name);
            }
            if (cfg.io.formats.empty()) fail("io.formats must not be empty");
        }
    }

    if (root.contains("rng")) {
        const std::string name = as_str(root["rng"], "rng");
        if (name != "mt19937_64")
            fail("rng must be \"mt19937_64\" (the only supported generator)");
        cfg.rng = name;
    }

    if (root.contains("seed")) {
        const json& v = root["seed"];
        if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
            fail("seed must be a nonnegative integer");
        cfg.seed = v.get<std::uint64_t>();
    }

    return cfg;
}

std::string canonical_json(const RunConfig& cfg) {
    // nlohmann's default object is key-sorted and dump() prints doubles with
    // the shortest round-trip representation, so this string is canonical.
    json j;
    j["grid"] = {{"n", cfg.grid.n}, {"N", cfg.grid.N}, {"L", cfg.grid.L}};
    j["target"] = {{"kind", cfg.target.eta == 1 ? "sphere" : "hyperboloid"},
                   {"base", {cfg.target.base[0], cfg.target.base[1], cfg.target.base[2]}},
                   {"rejectLowerSheet", cfg.target.reject_lower_sheet}};
    j["sim"] = {{"dt", cfg.sim.dt},
                {"T", cfg.sim.T},
                {"integrator", cfg.sim.integrator == Integrator::Rk4Retract ? "rk4" : "midpoint"},
                {"retractEvery", cfg.sim.retract_every},
                {"diagnosticsEvery", cfg.sim.diagnostics_every}};
    j["data"] = {{"kind", cfg.data.kind},
                 {"amplitude", cfg.data.amplitude},
                 {"mode", cfg.data.mode},
                 {"shell", cfg.data.shell}};
    j["analysis"] = {{"sigma", cfg.analysis.sigma},
                     {"shellOffset", cfg.analysis.shell_offset},
                     {"kCut", cfg.analysis.k_cut},
                     {"kLo", cfg.analysis.k_lo},
                     {"C0", cfg.analysis.C0},
                     {"c0", cfg.analysis.c0},
                     {"eps", cfg.analysis.eps}};
    j["iterate"] = {{"T", cfg.iterate.T},
                    {"dt", cfg.iterate.dt},
                    {"tolOuter", cfg.iterate.tol_outer},
                    {"tolInner", cfg.iterate.tol_inner},
                    {"maxOuter", cfg.iterate.max_outer},
                    {"maxInner", cfg.iterate.max_inner}};
    j["io"] = {{"outDir", cfg.io.out_dir},
               {"snapshotEvery", cfg.io.snapshot_every},
               {"formats", cfg.io.formats}};
    j["rng"] = cfg.rng;
    j["seed"] = cfg.seed;
    return j.dump();
}

std::uint64_t config_hash(const RunConfig& cfg) {
    return fnv1a64(canonical_json(cfg));
}

} // namespace hwm
