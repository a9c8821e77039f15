#pragma once

// Experiment configuration: a flat key = value text format, command-line
// overrides, and a canonical serialization whose hash tags every output file.

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "error.hpp"
#include "hash.hpp"
#include "network.hpp"
#include "params.hpp"
#include "stability.hpp"

namespace iodyn {

struct ExperimentConfig {
    NetworkSpec network;
    ModelParams params;

    struct Run {
        int steps = 5000;
        std::optional<int> burn_in;  // nullopt = automatic
        int replicas = 1;
        std::uint64_t seed = 1;
        std::vector<std::uint64_t> seeds;  // empty = seed, seed+1, ..., seed+replicas-1
        double initial_kick = 1e-6;
    } run;

    struct Output {
        std::string dir = "out";
        bool per_sector = false;
        bool periodogram = false;
    } output;

    struct Stability {
        ClearingTiming variant = ClearingTiming::simultaneous;
        double gamma_step = 1e-3;
        std::vector<double> q_grid{-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
    } stability;

    struct Sweep {
        SweepAxis axis = SweepAxis::gamma;
        std::vector<double> values{0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};
        SweepStatistic statistic = SweepStatistic::volatility;
    } sweep;

    struct Reduced {
        std::string model = "long_plosser";
        std::vector<int> n_list{25, 100, 400};
        int steps = 20000;
        double eta = 0.01;
        double rho = 0.5;
        double sigma = 1.0;  // shock scale for the linear reference models
    } reduced;

    /// Seeds actually used, one per replica.
    std::vector<std::uint64_t> replica_seeds() const {
        if (!run.seeds.empty()) return run.seeds;
        std::vector<std::uint64_t> s;
        for (int r = 0; r < run.replicas; ++r) s.push_back(run.seed + static_cast<std::uint64_t>(r));
        return s;
    }
};

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected a number, got '" + v + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long long x = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError(key + ": expected an integer, got '" + v + "'");
    }
}

inline int parse_count(const std::string& key, const std::string& v, int min) {
    const long long x = parse_integer(key, v);
    if (x < min || x > 1'000'000'000) throw ConfigError(key + ": must be at least " + std::to_string(min));
    return static_cast<int>(x);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

/// "x1, x2, ..." or "start:step:stop" (inclusive).
inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (v.find(':') != std::string::npos) {
        const auto parts = split(v, ':');
        if (parts.size() != 3) throw ConfigError(key + ": range must be start:step:stop");
        const double a = parse_real(key, parts[0]), h = parse_real(key, parts[1]), b = parse_real(key, parts[2]);
        if (!(h > 0.0) || b < a) throw ConfigError(key + ": range needs step > 0 and stop >= start");
        const long long count = static_cast<long long>(std::floor((b - a) / h + 1e-9));
        if (count > 100000) throw ConfigError(key + ": range too long");
        for (long long k = 0; k <= count; ++k) out.push_back(a + static_cast<double>(k) * h);
        return out;
    }
    for (const auto& item : split(v, ','))
        if (!item.empty()) out.push_back(parse_real(key, item));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline std::string join_reals(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

template <class T>
std::string join_ints(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}
}  // namespace detail

/// Apply one key = value assignment; unknown keys and bad values throw ConfigError.
inline void apply_setting(ExperimentConfig& c, const std::string& key_in, const std::string& value_in) {
    using namespace detail;
    const std::string key = trim(key_in), v = trim(value_in);
    if (key == "network.kind") {
        if (v == "plain") c.network.kind = NetworkKind::plain;
        else if (v == "random_exp") c.network.kind = NetworkKind::random_exp;
        else if (v == "file") c.network.kind = NetworkKind::file;
        else throw ConfigError("network.kind: expected plain|random_exp|file, got '" + v + "'");
    } else if (key == "network.n") c.network.n = parse_count(key, v, 1);
    else if (key == "network.seed") c.network.seed = static_cast<std::uint64_t>(parse_integer(key, v));
    else if (key == "network.path") c.network.path = v;
    else if (key == "params.a") c.params.a = parse_real(key, v);
    else if (key == "params.b") c.params.b = parse_real(key, v);
    else if (key == "params.q") c.params.q = parse_real(key, v);
    else if (key == "params.q0") {
        if (v.empty() || v == "q") c.params.q0.reset();
        else c.params.q0 = parse_real(key, v);
    } else if (key == "params.gamma") c.params.gamma = parse_real(key, v);
    else if (key == "params.beta0") c.params.beta0 = parse_real(key, v);
    else if (key == "params.sigma") c.params.sigma = parse_real(key, v);
    else if (key == "run.steps") c.run.steps = parse_count(key, v, 1);
    else if (key == "run.burn_in") {
        if (v == "auto") c.run.burn_in.reset();
        else c.run.burn_in = parse_count(key, v, 0);
    } else if (key == "run.replicas") c.run.replicas = parse_count(key, v, 1);
    else if (key == "run.seed") c.run.seed = static_cast<std::uint64_t>(parse_integer(key, v));
    else if (key == "run.seeds") {
        c.run.seeds.clear();
        for (const auto& s : split(v, ','))
            if (!s.empty()) c.run.seeds.push_back(static_cast<std::uint64_t>(parse_integer(key, s)));
    } else if (key == "run.initial_kick") c.run.initial_kick = parse_real(key, v);
    else if (key == "output.dir") c.output.dir = v;
    else if (key == "output.per_sector") c.output.per_sector = parse_bool(key, v);
    else if (key == "output.periodogram") c.output.periodogram = parse_bool(key, v);
    else if (key == "stability.variant") {
        if (v == "simultaneous") c.stability.variant = ClearingTiming::simultaneous;
        else if (v == "lagged") c.stability.variant = ClearingTiming::lagged;
        else throw ConfigError("stability.variant: expected simultaneous|lagged");
    } else if (key == "stability.gamma_step") c.stability.gamma_step = parse_real(key, v);
    else if (key == "stability.q_grid") c.stability.q_grid = parse_real_list(key, v);
    else if (key == "sweep.axis") {
        if (v == "gamma") c.sweep.axis = SweepAxis::gamma;
        else if (v == "sigma") c.sweep.axis = SweepAxis::sigma;
        else if (v == "n") c.sweep.axis = SweepAxis::n;
        else throw ConfigError("sweep.axis: expected gamma|sigma|n");
    } else if (key == "sweep.values") c.sweep.values = parse_real_list(key, v);
    else if (key == "sweep.statistic") {
        bool ok = false;
        for (auto s : {SweepStatistic::volatility, SweepStatistic::volatility_diff, SweepStatistic::correlation,
                       SweepStatistic::mean_output, SweepStatistic::mean_consumption,
                       SweepStatistic::dominant_period})
            if (v == to_string(s)) {
                c.sweep.statistic = s;
                ok = true;
            }
        if (!ok) throw ConfigError("sweep.statistic: unknown statistic '" + v + "'");
    } else if (key == "reduced.model") {
        if (v != "long_plosser" && v != "adiabatic" && v != "transversality" && v != "near_instability")
            throw ConfigError("reduced.model: expected long_plosser|adiabatic|transversality|near_instability");
        c.reduced.model = v;
    } else if (key == "reduced.n_list") {
        c.reduced.n_list.clear();
        for (double x : parse_real_list(key, v)) {
            if (x < 1 || x != std::floor(x)) throw ConfigError("reduced.n_list: entries must be positive integers");
            c.reduced.n_list.push_back(static_cast<int>(x));
        }
    } else if (key == "reduced.steps") c.reduced.steps = parse_count(key, v, 1);
    else if (key == "reduced.eta") c.reduced.eta = parse_real(key, v);
    else if (key == "reduced.rho") c.reduced.rho = parse_real(key, v);
    else if (key == "reduced.sigma") c.reduced.sigma = parse_real(key, v);
    else throw ConfigError("unknown configuration key '" + key + "'");
}

/// Apply "key=value".
inline void apply_override(ExperimentConfig& c, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("override must be key=value, got '" + assignment + "'");
    apply_setting(c, assignment.substr(0, eq), assignment.substr(eq + 1));
}

/// Lines of "key = value"; '#' starts a comment.
inline void parse_config(ExperimentConfig& c, std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(c, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ExperimentConfig c;
    parse_config(c, in);
    return c;
}

/// Cross-field checks.
inline void validate(const ExperimentConfig& c) {
    c.params.validate();
    if (c.network.kind == NetworkKind::file && c.network.path.empty())
        throw ConfigError("network.path is required for network.kind = file");
    if (c.run.burn_in && *c.run.burn_in >= c.run.steps) throw ConfigError("run.burn_in must be below run.steps");
    if (!(c.run.initial_kick >= 0.0)) throw ConfigError("run.initial_kick must be nonnegative");
    if (!(c.stability.gamma_step > 0.0 && c.stability.gamma_step < 1.0))
        throw ConfigError("stability.gamma_step must lie in (0, 1)");
    for (double q : c.stability.q_grid)
        if (!(q >= -1.0 && q <= 1.0)) throw ConfigError("stability.q_grid entries must lie in [-1, 1]");
    if (!(c.reduced.eta > 0.0 && c.reduced.eta < 1.0)) throw ConfigError("reduced.eta must lie in (0, 1)");
    if (!(c.reduced.sigma >= 0.0)) throw ConfigError("reduced.sigma must be nonnegative");
}

/// Sorted "key=value" lines. output.dir is left out: it does not affect results.
inline std::string canonical_serialization(const ExperimentConfig& c) {
    using namespace detail;
    std::map<std::string, std::string> kv;
    const char* kinds[] = {"plain", "random_exp", "file"};
    kv["network.kind"] = kinds[static_cast<int>(c.network.kind)];
    kv["network.n"] = std::to_string(c.network.n);
    kv["network.seed"] = std::to_string(c.network.seed);
    kv["network.path"] = c.network.path;
    kv["params.a"] = format_double(c.params.a);
    kv["params.b"] = format_double(c.params.b);
    kv["params.q"] = format_double(c.params.q);
    kv["params.q0"] = c.params.q0 ? format_double(*c.params.q0) : "q";
    kv["params.gamma"] = format_double(c.params.gamma);
    kv["params.beta0"] = format_double(c.params.beta0);
    kv["params.sigma"] = format_double(c.params.sigma);
    kv["run.steps"] = std::to_string(c.run.steps);
    kv["run.burn_in"] = c.run.burn_in ? std::to_string(*c.run.burn_in) : "auto";
    kv["run.replicas"] = std::to_string(c.run.replicas);
    kv["run.seed"] = std::to_string(c.run.seed);
    kv["run.seeds"] = join_ints(c.run.seeds);
    kv["run.initial_kick"] = format_double(c.run.initial_kick);
    kv["output.per_sector"] = c.output.per_sector ? "true" : "false";
    kv["output.periodogram"] = c.output.periodogram ? "true" : "false";
    kv["stability.variant"] = to_string(c.stability.variant);
    kv["stability.gamma_step"] = format_double(c.stability.gamma_step);
    kv["stability.q_grid"] = join_reals(c.stability.q_grid);
    kv["sweep.axis"] = to_string(c.sweep.axis);
    kv["sweep.values"] = join_reals(c.sweep.values);
    kv["sweep.statistic"] = to_string(c.sweep.statistic);
    kv["reduced.model"] = c.reduced.model;
    kv["reduced.n_list"] = join_ints(c.reduced.n_list);
    kv["reduced.steps"] = std::to_string(c.reduced.steps);
    kv["reduced.eta"] = format_double(c.reduced.eta);
    kv["reduced.rho"] = format_double(c.reduced.rho);
    kv["reduced.sigma"] = format_double(c.reduced.sigma);
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(canonical_serialization(c))); }

/// First header line of every output file.
inline void write_hash_header(std::ostream& os, const ExperimentConfig& c) {
    os << "# config_hash=" << config_hash(c) << '\n';
}

}  // namespace iodyn
