#include "zl/cli.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace zl {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& key, const std::string& what) {
    std::ostringstream os;
    os << "config";
    if (n.IsDefined() && !n.Mark().is_null()) os << " line " << n.Mark().line + 1;
    os << ", key '" << key << "': " << what;
    throw ConfigError(os.str());
}

void only_keys(const YAML::Node& n, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!n.IsMap()) fail(n, where, "expected a mapping");
    for (const auto& kv : n) {
        const auto k = kv.first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            fail(kv.first, where.empty() ? k : where + "." + k, "unknown key");
    }
}

template <class T>
void read(const YAML::Node& parent, const char* key, const std::string& where, T& out) {
    const YAML::Node n = parent[key];
    if (!n) return;
    try {
        out = n.as<T>();
    } catch (const YAML::Exception&) {
        fail(n, where.empty() ? key : where + "." + key, "bad value '" + n.Scalar() + "'");
    }
}

GridSettings read_grid(const YAML::Node& n, const std::string& where, GridSettings g) {
    only_keys(n, where, {"domain", "n", "rmax"});
    std::string d = g.domain == Domain::full_line ? "full_line" : "half_line";
    read(n, "domain", where, d);
    if (d == "half_line") g.domain = Domain::half_line;
    else if (d == "full_line") g.domain = Domain::full_line;
    else fail(n["domain"], where + ".domain", "expected half_line or full_line");
    read(n, "n", where, g.n);
    read(n, "rmax", where, g.rmax);
    return g;
}

ExperimentConfig from_node(const YAML::Node& root) {
    ExperimentConfig c;
    if (!root.IsDefined() || root.IsNull()) throw ConfigError("config: empty document");
    only_keys(root, "", {"schema_version", "seed", "potential", "grid", "sweep", "scenarios", "output"});
    if (!root["schema_version"]) fail(root, "schema_version", "missing");
    read(root, "schema_version", "", c.schema_version);
    if (c.schema_version != kSchemaVersion)
        fail(root["schema_version"], "schema_version", "unsupported version " + std::to_string(c.schema_version));
    read(root, "seed", "", c.seed);

    if (auto p = root["potential"]) {
        only_keys(p, "potential", {"mu", "c1", "dim", "ell", "v2"});
        read(p, "mu", "potential", c.potential.mu);
        read(p, "c1", "potential", c.potential.c1);
        read(p, "dim", "potential", c.potential.dim);
        read(p, "ell", "potential", c.potential.ell);
        if (auto v = p["v2"]) {
            only_keys(v, "potential.v2", {"kind", "amp", "center", "radius", "order"});
            std::string kind = "none";
            read(v, "kind", "potential.v2", kind);
            if (kind == "none") c.potential.v2.kind = V2Kind::none;
            else if (kind == "bump") c.potential.v2.kind = V2Kind::bump;
            else if (kind == "bracket") c.potential.v2.kind = V2Kind::bracket;
            else fail(v["kind"], "potential.v2.kind", "expected none, bump or bracket");
            read(v, "amp", "potential.v2", c.potential.v2.amp);
            read(v, "center", "potential.v2", c.potential.v2.center);
            read(v, "radius", "potential.v2", c.potential.v2.radius);
            read(v, "order", "potential.v2", c.potential.v2.order);
        }
    }
    if (auto g = root["grid"]) c.grid = read_grid(g, "grid", c.grid);
    if (auto s = root["sweep"]) {
        only_keys(s, "sweep", {"theta", "emin", "emax", "points", "args"});
        read(s, "theta", "sweep", c.sweep.theta);
        read(s, "emin", "sweep", c.sweep.emin);
        read(s, "emax", "sweep", c.sweep.emax);
        read(s, "points", "sweep", c.sweep.points);
        read(s, "args", "sweep", c.sweep.args);
    }
    if (auto o = root["output"]) {
        only_keys(o, "output", {"dir"});
        read(o, "dir", "output", c.out_dir);
    }
    if (auto list = root["scenarios"]) {
        if (!list.IsSequence()) fail(list, "scenarios", "expected a list");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const YAML::Node e = list[i];
            const std::string where = "scenarios[" + std::to_string(i) + "]";
            ScenarioConfig sc;
            if (e.IsScalar()) {
                sc.name = e.as<std::string>();
            } else {
                only_keys(e, where, {"name", "grid", "params"});
                if (!e["name"]) fail(e, where + ".name", "missing");
                read(e, "name", where, sc.name);
                if (auto g = e["grid"]) sc.grid = read_grid(g, where + ".grid", c.grid);
                if (auto p = e["params"]) {
                    if (!p.IsMap()) fail(p, where + ".params", "expected a mapping");
                    for (const auto& kv : p) {
                        const auto k = kv.first.as<std::string>();
                        try {
                            sc.params[k] = kv.second.as<double>();
                        } catch (const YAML::Exception&) {
                            fail(kv.second, where + ".params." + k, "expected a number");
                        }
                    }
                }
            }
            const auto& names = scenario_names();
            if (std::find(names.begin(), names.end(), sc.name) == names.end()) {
                std::string valid;
                for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
                fail(e, where + ".name", "unknown scenario '" + sc.name + "' (valid: " + valid + ")");
            }
            c.scenarios.push_back(sc);
        }
    }
    return c;
}

} // namespace

SweepSpec SweepSettings::spec() const {
    SweepSpec s;
    s.theta = theta;
    s.E = logspace(emin, emax, points);
    s.arg_fractions.clear();
    for (int i = 0; i < args; ++i) s.arg_fractions.push_back(double(i + 1) / (args + 1));
    return s;
}

ExperimentConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("config line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
    ExperimentConfig c = from_node(root);
    validate_config(c);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(ExperimentConfig& c) {
    try {
        c.potential.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config, key 'potential': ") + e.what());
    }
    auto check_grid = [](const GridSettings& g, const std::string& where) {
        if (g.n < 16) throw ConfigError("config, key '" + where + ".n': need n >= 16");
        if (!(g.rmax > 0)) throw ConfigError("config, key '" + where + ".rmax': must be positive");
    };
    check_grid(c.grid, "grid");
    const auto& s = c.sweep;
    if (!(s.theta > 0 && s.theta < pi)) throw ConfigError("config, key 'sweep.theta': need 0 < theta < pi");
    if (!(s.emin > 0 && s.emin < s.emax && s.emax <= 1.0))
        throw ConfigError("config, key 'sweep.emin': need 0 < emin < emax <= 1");
    if (s.points < 2) throw ConfigError("config, key 'sweep.points': need at least 2");
    if (s.args < 1) throw ConfigError("config, key 'sweep.args': need at least 1");

    for (std::size_t i = 0; i < c.scenarios.size(); ++i) {
        auto& sc = c.scenarios[i];
        const std::string where = "scenarios[" + std::to_string(i) + "]";
        auto defaults = scenario_defaults(sc.name);
        for (const auto& [k, v] : sc.params)
            if (!defaults.count(k)) throw ConfigError("config, key '" + where + ".params." + k + "': unknown parameter");
        for (const auto& [k, v] : defaults) sc.params.emplace(k, v);
        if (sc.grid) check_grid(*sc.grid, where + ".grid");
        const Domain d = c.grid_for(sc).domain;
        if (sc.name == "microlocal" && d != Domain::full_line)
            throw ConfigError("config, key '" + where + ".grid.domain': microlocal needs full_line");
        if ((sc.name == "decay" || sc.name == "spectral") && d != Domain::half_line)
            throw ConfigError("config, key '" + where + ".grid.domain': " + sc.name + " needs half_line");
        if (sc.name == "microlocal" && c.grid_for(sc).n > 1024)
            throw ConfigError("config, key '" + where + ".grid.n': microlocal needs n <= 1024");
    }
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names{"lap",   "iterated", "mourre",   "classical",
                                                "microlocal", "decay", "spectral", "wkb"};
    return names;
}

std::map<std::string, double> scenario_defaults(const std::string& name) {
    if (name == "lap")
        return {{"s", 1.3},          {"s_control", 0.0},     {"stat_max", 5.0},     {"growth_min", 10.0},
                {"hoelder", 0.0},    {"delta0", 4e-4},       {"delta_ratio", 1.7782794100389228},
                {"scales", 9.0},     {"gamma_min", 0.36},    {"gamma_max", 0.0}};
    if (name == "iterated")
        return {{"m_min", 2.0}, {"m_max", 3.0}, {"eps", 0.1}, {"stat_max", 5.0}, {"probe_x", 3.0}, {"probe_arg", 0.5}};
    if (name == "mourre")
        return {{"eps_min", 1e-3},     {"eps_max", 1e-1},      {"eps_points", 5.0}, {"arg_fraction", 0.5},
                {"ratio_max", 50.0},   {"identity_tol", 1e-12}, {"delta", 1e-3},    {"fd_order_min", 1.8}};
    if (name == "classical")
        return {{"trajectories", 20.0}, {"x0_min", 2.0},        {"x0_max", 20.0},   {"t_max", 1e4},
                {"tol", 1e-8},          {"ratio_min", 0.9},     {"bracket_tol", 1e-6}};
    if (name == "microlocal")
        return {{"t", 1.0},          {"eps", 0.1},            {"t_disjoint", 2.0}, {"stat_max", 10.0},
                {"partition_tol", 1e-8}, {"moyal_tol", 1e-9}, {"metric_samples", 10000.0},
                {"metric_N", 2.0},   {"power", 2.0},          {"ecs", 1.0}};
    if (name == "decay")
        return {{"Lambda", 8.0},     {"E1", 2.0},             {"s", 4.0},          {"eps", 0.5},
                {"eps_prime", 0.0},  {"t_min", 10.0},         {"t_points", 8.0},   {"slope_lo", -2.3},
                {"slope_hi", -1.7},  {"velocity_slope_max", -0.35}, {"weight_floor", 1e-10},
                {"eta_fraction", 1e-2}, {"halvings", 6.0}};
    if (name == "spectral")
        return {{"rho_min", 10.0},   {"rho_max", 200.0},      {"rho_points", 39.0}, {"count", 8.0},
                {"nodes", 4000.0},   {"crossings_min", 5.0},  {"s", 0.9},          {"r_max", 2000.0},
                {"r_points", 40000.0}, {"R1", 5.0},           {"m", 8.0},          {"eps_h", 0.5},
                {"C", 1.0},          {"trace_stride", 100.0}};
    if (name == "wkb")
        return {{"E", 0.0}, {"x0", 1.0}, {"x1", 1e4}, {"samples", 2000.0}, {"tol", 0.05}};
    std::string valid;
    for (const auto& n : scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + name + "' (valid: " + valid + ")");
}

} // namespace zl
