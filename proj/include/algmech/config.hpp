#pragma once

#include "algmech/core.hpp"

#include <fstream>
#include <map>
#include <optional>

namespace algmech {

class ConfigError : public InputError {
public:
    using InputError::InputError;
};

/// Settings of one run; unset optionals fall back to per-command defaults.
struct RunConfig {
    std::string command;
    std::string model;
    std::map<std::string, double> params;
    std::optional<std::vector<double>> init;
    std::optional<double> t_end;
    std::optional<double> h;
    std::optional<double> tol;
    std::optional<int> samples;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format;
    std::optional<std::string> hamiltonian;
};

namespace config_detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double to_real(const std::string& v, const std::string& where) {
    std::size_t used = 0;
    double d = 0.0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + v + "' is not a number");
    }
    if (used != v.size() || !std::isfinite(d)) throw ConfigError(where + ": '" + v + "' is not a finite number");
    return d;
}

inline long long to_integer(const std::string& v, const std::string& where) {
    std::size_t used = 0;
    long long d = 0;
    try {
        d = std::stoll(v, &used);
    } catch (const std::exception&) {
        throw ConfigError(where + ": '" + v + "' is not an integer");
    }
    if (used != v.size()) throw ConfigError(where + ": '" + v + "' is not an integer");
    return d;
}

}  // namespace config_detail

inline std::vector<double> parse_real_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(config_detail::to_real(config_detail::trim(item), where));
    if (out.empty()) throw ConfigError(where + ": empty list");
    return out;
}

/// Reads the [run], [params] and [fields] sections; unknown sections, keys and duplicates are errors.
inline RunConfig parse_config(std::istream& in, const std::string& source = "config") {
    using config_detail::trim;
    RunConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = source + ":" + std::to_string(lineno);
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ConfigError(where + ": malformed section header");
            section = trim(t.substr(1, t.size() - 2));
            if (section != "run" && section != "params" && section != "fields")
                throw ConfigError(where + ": unknown section [" + section + "] (expected run, params, fields)");
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside of a section");
        if (key.empty()) throw ConfigError(where + ": empty key");
        const std::string full = section + "." + key;
        if (seen.count(full)) throw ConfigError(where + ": duplicate key '" + key + "' (first at line " + std::to_string(seen[full]) + ")");
        seen[full] = lineno;
        const std::string kw = where + " (" + key + ")";
        if (section == "params") {
            cfg.params[key] = config_detail::to_real(value, kw);
        } else if (section == "fields") {
            if (key != "hamiltonian") throw ConfigError(where + ": unknown field '" + key + "' (expected hamiltonian)");
            cfg.hamiltonian = value;
        } else if (key == "model") {
            cfg.model = value;
        } else if (key == "init") {
            cfg.init = parse_real_list(value, kw);
        } else if (key == "t_end") {
            cfg.t_end = config_detail::to_real(value, kw);
        } else if (key == "h") {
            cfg.h = config_detail::to_real(value, kw);
        } else if (key == "tol") {
            cfg.tol = config_detail::to_real(value, kw);
        } else if (key == "samples") {
            const long long n = config_detail::to_integer(value, kw);
            if (n < 1 || n > 100000) throw ConfigError(kw + ": samples must be in [1, 100000]");
            cfg.samples = static_cast<int>(n);
        } else if (key == "seed") {
            const long long n = config_detail::to_integer(value, kw);
            if (n < 0) throw ConfigError(kw + ": seed must be non-negative");
            cfg.seed = static_cast<std::uint64_t>(n);
        } else if (key == "out") {
            cfg.out = value;
        } else if (key == "format") {
            cfg.format = value;
        } else {
            throw ConfigError(where + ": unknown key '" + key +
                              "' in [run] (expected model, init, t_end, h, tol, samples, seed, out, format)");
        }
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

/// Fields set in `flags` win over `base`; parameter maps are merged.
inline RunConfig merge_config(RunConfig base, const RunConfig& flags) {
    if (!flags.command.empty()) base.command = flags.command;
    if (!flags.model.empty()) base.model = flags.model;
    for (const auto& [k, v] : flags.params) base.params[k] = v;
    if (flags.init) base.init = flags.init;
    if (flags.t_end) base.t_end = flags.t_end;
    if (flags.h) base.h = flags.h;
    if (flags.tol) base.tol = flags.tol;
    if (flags.samples) base.samples = flags.samples;
    if (flags.seed) base.seed = flags.seed;
    if (!flags.out.empty()) base.out = flags.out;
    if (!flags.format.empty()) base.format = flags.format;
    if (flags.hamiltonian) base.hamiltonian = flags.hamiltonian;
    return base;
}

}  // namespace algmech
