#pragma once

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pinlayer/errors.hpp"
#include "pinlayer/layer.hpp"
#include "pinlayer/model.hpp"

namespace pinlayer {

struct RunConfig {
    // model
    std::string family = "cubic";
    double s = 0.0;
    // params
    ProblemParams params;
    // grid
    int n = 2048;
    double dt = 0.05;
    double t_end = 200.0;
    double theta = 0.5;
    // layer
    std::optional<double> alpha; // absolute; defaults to the branch midpoint
    Orientation orientation = Orientation::jump_up;
    // spectrum
    double lambda_max = 10.0;
    int contour_samples = 0;
    // simulate
    double perturbation_amplitude = 1e-4;
    unsigned seed = 1;
    // output
    std::string out_dir = "out";
    std::string formats = "both"; // json | csv | both

    BistableModel make_model() const {
        if (family != "cubic")
            throw ValidationError({"model.family"}, "unknown model family '" + family + "'");
        return builtin_cubic(s);
    }
};

namespace detail {

struct TomlValue {
    enum class Kind { number, string } kind = Kind::number;
    double num = 0.0;
    std::string str;
    int line = 0;
};

using TomlTable = std::map<std::string, std::map<std::string, TomlValue>>;

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    std::size_t b = s.find_last_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

inline TomlTable parse_toml_subset(std::istream& in) {
    TomlTable table;
    std::string section;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // Strip comments outside quotes.
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']')
                throw ParseError(lineno, static_cast<int>(t.size()),
                                 "unterminated section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section.empty()) throw ParseError(lineno, 1, "empty section name");
            table[section];
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, 1, "expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        if (key.empty()) throw ParseError(lineno, 1, "empty key");
        if (val.empty()) throw ParseError(lineno, static_cast<int>(eq + 1), "empty value");
        TomlValue v;
        v.line = lineno;
        if (val.front() == '"') {
            if (val.size() < 2 || val.back() != '"')
                throw ParseError(lineno, static_cast<int>(eq + 1), "unterminated string");
            v.kind = TomlValue::Kind::string;
            v.str = val.substr(1, val.size() - 2);
        } else {
            char* end = nullptr;
            v.num = std::strtod(val.c_str(), &end);
            if (end == val.c_str() || *end != '\0')
                throw ParseError(lineno, static_cast<int>(eq + 1),
                                 "cannot parse '" + val + "' as a number");
        }
        table[section][key] = v;
    }
    return table;
}

struct SchemaReader {
    const TomlTable& table;
    std::vector<std::string> unknown;
    std::vector<std::string> seen_sections;

    double number(const std::string& sec, const std::string& key, double fallback,
                  bool* present = nullptr) {
        auto s = table.find(sec);
        if (s == table.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        if (present) *present = true;
        if (k->second.kind != TomlValue::Kind::number)
            throw ValidationError({sec + "." + key}, "expected a number for " + sec + "." + key);
        return k->second.num;
    }

    std::string string(const std::string& sec, const std::string& key,
                       const std::string& fallback) {
        auto s = table.find(sec);
        if (s == table.end()) return fallback;
        auto k = s->second.find(key);
        if (k == s->second.end()) return fallback;
        if (k->second.kind != TomlValue::Kind::string)
            throw ValidationError({sec + "." + key}, "expected a string for " + sec + "." + key);
        return k->second.str;
    }
};

} // namespace detail

// Strict parse: every key in the file must be part of the schema; unknown keys
// are collected and rejected by name.
inline RunConfig config_from_stream(std::istream& in) {
    const detail::TomlTable table = detail::parse_toml_subset(in);

    static const std::map<std::string, std::vector<std::string>> schema = {
        {"model", {"family", "s"}},
        {"params", {"epsilon", "D", "xi"}},
        {"grid", {"n", "dt", "t_end", "theta"}},
        {"layer", {"alpha", "orientation"}},
        {"spectrum", {"lambda_max", "contour_samples"}},
        {"simulate", {"perturbation_amplitude", "seed"}},
        {"output", {"directory", "formats"}},
    };
    std::vector<std::string> unknown;
    for (const auto& [sec, kv] : table) {
        auto it = schema.find(sec);
        if (it == schema.end()) {
            unknown.push_back(sec);
            continue;
        }
        for (const auto& [key, val] : kv)
            if (std::find(it->second.begin(), it->second.end(), key) == it->second.end())
                unknown.push_back(sec + "." + key);
    }
    if (!unknown.empty()) {
        std::string msg = "unknown config keys:";
        for (const auto& k : unknown) msg += " " + k;
        throw ValidationError(unknown, msg);
    }

    detail::SchemaReader rd{table, {}, {}};
    RunConfig c;
    c.family = rd.string("model", "family", "");
    if (c.family.empty())
        throw ValidationError({"model.family"}, "missing required key model.family");
    bool have_s = false;
    c.s = rd.number("model", "s", 0.0, &have_s);
    if (c.family == "cubic" && !have_s)
        throw ValidationError({"model.s"}, "missing required key model.s");
    bool have_eps = false, have_D = false, have_xi = false;
    c.params.epsilon = rd.number("params", "epsilon", 0.0, &have_eps);
    c.params.D = rd.number("params", "D", 0.0, &have_D);
    c.params.xi = rd.number("params", "xi", 0.0, &have_xi);
    if (!have_eps || !have_D || !have_xi) {
        std::vector<std::string> missing;
        if (!have_eps) missing.push_back("params.epsilon");
        if (!have_D) missing.push_back("params.D");
        if (!have_xi) missing.push_back("params.xi");
        std::string msg = "missing required keys:";
        for (const auto& k : missing) msg += " " + k;
        throw ValidationError(missing, msg);
    }
    if (c.params.epsilon <= 0.0)
        throw ValidationError({"params.epsilon"}, "params.epsilon must be positive");
    if (c.params.D <= 0.0) throw ValidationError({"params.D"}, "params.D must be positive");

    c.n = static_cast<int>(rd.number("grid", "n", 2048));
    c.dt = rd.number("grid", "dt", 0.05);
    c.t_end = rd.number("grid", "t_end", 200.0);
    c.theta = rd.number("grid", "theta", 0.5);
    bool have_alpha = false;
    const double alpha = rd.number("layer", "alpha", 0.0, &have_alpha);
    if (have_alpha) c.alpha = alpha;
    const std::string orient = rd.string("layer", "orientation", "jump_up");
    if (orient == "jump_up")
        c.orientation = Orientation::jump_up;
    else if (orient == "jump_down")
        c.orientation = Orientation::jump_down;
    else
        throw ValidationError({"layer.orientation"},
                              "layer.orientation must be jump_up or jump_down");
    c.lambda_max = rd.number("spectrum", "lambda_max", 10.0);
    c.contour_samples = static_cast<int>(rd.number("spectrum", "contour_samples", 0));
    c.perturbation_amplitude = rd.number("simulate", "perturbation_amplitude", 1e-4);
    c.seed = static_cast<unsigned>(rd.number("simulate", "seed", 1));
    c.out_dir = rd.string("output", "directory", "out");
    c.formats = rd.string("output", "formats", "both");
    if (c.formats != "json" && c.formats != "csv" && c.formats != "both")
        throw ValidationError({"output.formats"}, "output.formats must be json, csv or both");
    if (c.n < 16) throw ValidationError({"grid.n"}, "grid.n too small");
    return c;
}

inline RunConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError({path}, "cannot open config file '" + path + "'");
    return config_from_stream(in);
}

} // namespace pinlayer
