#include "zl/cli.hpp"

#include "json.hpp"

#include <charconv>

namespace zl {

std::string fmt_num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v); // shortest round trip, '.' decimal
    return std::string(buf, r.ptr);
}

std::string fmt_int(long long v) { return std::to_string(v); }

void Table::add_column(const std::string& name, const std::string& doc) {
    columns.push_back(name);
    docs.push_back(doc);
}

void Table::add_row(std::vector<std::string> cells) {
    if (cells.size() != columns.size()) throw std::logic_error("Table::add_row: wrong number of cells");
    rows.push_back(std::move(cells));
}

namespace {

std::string cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

} // namespace

std::string Table::csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + cell(columns[i]);
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + cell(r[i]);
        out += "\n";
    }
    return out;
}

Check make_check(const std::string& scenario, const std::string& id, const std::string& ref, double value,
                 const std::string& cmp, double threshold) {
    Check c{scenario, id, ref, value, threshold, cmp, false};
    if (cmp == "<") c.pass = value < threshold;
    else if (cmp == "<=") c.pass = value <= threshold;
    else if (cmp == ">") c.pass = value > threshold;
    else if (cmp == ">=") c.pass = value >= threshold;
    else if (cmp == "==") c.pass = value == threshold;
    else throw std::invalid_argument("make_check: comparison " + cmp);
    return c;
}

bool RunSummary::all_pass() const {
    for (const auto& r : results) {
        if (!r.error.empty()) return false;
        for (const auto& c : r.checks)
            if (!c.pass) return false;
    }
    return true;
}

std::string RunSummary::json(const ExperimentConfig& cfg) const {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = cfg.schema_version;
    j["seed"] = cfg.seed;
    ordered_json cols = ordered_json::object();
    for (const auto& r : results) {
        ordered_json c = ordered_json::object();
        for (std::size_t i = 0; i < r.table.columns.size(); ++i) c[r.table.columns[i]] = r.table.docs[i];
        cols[r.name] = c;
    }
    j["columns"] = cols;
    ordered_json checks = ordered_json::array();
    for (const auto& r : results) {
        for (const auto& c : r.checks) {
            ordered_json e;
            e["scenario"] = c.scenario;
            e["check"] = c.id;
            e["ref"] = c.ref;
            e["value"] = std::isfinite(c.value) ? ordered_json(c.value) : ordered_json(fmt_num(c.value));
            e["comparison"] = c.comparison;
            e["threshold"] = c.threshold;
            e["pass"] = c.pass;
            checks.push_back(e);
        }
        if (!r.error.empty()) {
            ordered_json e;
            e["scenario"] = r.name;
            e["check"] = "completed";
            e["ref"] = "run";
            e["value"] = r.error;
            e["comparison"] = "==";
            e["threshold"] = "no error";
            e["pass"] = false;
            checks.push_back(e);
        }
    }
    j["checks"] = checks;
    j["files"] = files;
    j["pass"] = all_pass();
    return j.dump(2) + "\n";
}

} // namespace zl
