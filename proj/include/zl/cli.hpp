#pragma once

#include "zl/resolve.hpp"

#include <map>
#include <optional>
#include <stdexcept>

namespace zl {

inline constexpr int kSchemaVersion = 1;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GridSettings {
    Domain domain = Domain::half_line;
    int n = 1000;
    double rmax = 1000.0;
    Grid make() const { return Grid::make(domain, n, rmax); }
};

struct SweepSettings {
    double theta = pi / 2;
    double emin = 1e-4, emax = 1.0;
    int points = 13;
    int args = 3; // arguments per modulus, at (i+1)/(args+1) theta
    SweepSpec spec() const;
};

struct ScenarioConfig {
    std::string name;
    std::optional<GridSettings> grid; // falls back to the global grid block
    std::map<std::string, double> params; // defaults filled in by validation
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    PotentialSpec potential;
    GridSettings grid;
    SweepSettings sweep;
    std::vector<ScenarioConfig> scenarios;
    std::string out_dir = "out";
    std::uint64_t seed = 1;

    GridSettings grid_for(const ScenarioConfig& s) const { return s.grid ? *s.grid : grid; }
};

// throws ConfigError naming the line and key
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::string& path);
// fills parameter defaults, checks names, ranges and domain requirements
void validate_config(ExperimentConfig& cfg);

const std::vector<std::string>& scenario_names();
// parameter defaults for a scenario, throws on unknown names
std::map<std::string, double> scenario_defaults(const std::string& name);

// ---- reports

struct Table {
    std::vector<std::string> columns;
    std::vector<std::string> docs; // one line per column
    std::vector<std::vector<std::string>> rows;

    void add_column(const std::string& name, const std::string& doc);
    void add_row(std::vector<std::string> cells);
    std::string csv() const;
};

std::string fmt_num(double v);
std::string fmt_int(long long v);

struct Check {
    std::string scenario, id, ref;
    double value = 0, threshold = 0;
    std::string comparison; // "<", "<=", ">", ">=", "=="
    bool pass = false;
};

Check make_check(const std::string& scenario, const std::string& id, const std::string& ref, double value,
                 const std::string& cmp, double threshold);

struct ScenarioResult {
    std::string name;
    Table table;
    std::vector<Check> checks;
    std::string error; // non-empty when the scenario threw
};

struct RunSummary {
    std::vector<ScenarioResult> results;
    std::vector<std::string> files;
    bool all_pass() const;
    std::string json(const ExperimentConfig& cfg) const;
};

// ---- scenarios

ScenarioResult run_scenario(const ExperimentConfig& cfg, const ScenarioConfig& sc, int workers, std::uint64_t seed);

// executes all scenarios in order, writes <out>/<name>.csv and <out>/summary.json
RunSummary run(const ExperimentConfig& cfg, const std::string& out_dir, int workers);

// text naming the result checked, the inequality and the tolerance; throws on unknown names
std::string describe(const std::string& scenario);

} // namespace zl
