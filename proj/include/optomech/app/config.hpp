#pragma once

// Run configuration for the command-line front end: a flat `key = value`
// document, a fixed schema, environment overrides and canonical
// serialization.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../numerics.hpp"

namespace optomech::app {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& message)
        : std::runtime_error(message), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

inline constexpr const char* env_prefix = "OPTOMECH_";

/// Sweep axis: either start:stop:count[:log] or an explicit list.
struct Range {
    std::vector<double> values;
    double start = 0.0, stop = 0.0;
    int count = 1;
    bool log = false;
    bool is_list = false;

    bool scalar() const { return values.size() == 1; }
    double front() const { return values.front(); }
};

enum class KeyType { number, optional_number, range, integer, text, choice };

struct KeySpec {
    const char* name;
    KeyType type;
    const char* default_value;
    std::vector<std::string> choices;
    const char* help;
};

// clang-format off
inline const std::vector<KeySpec>& schema()
{
    static const std::vector<KeySpec> keys = {
        {"model", KeyType::choice, "end-mirror", {"end-mirror", "membrane", "gaussian", "cat"},
         "state family evaluated by eval and wigner"},
        {"k", KeyType::range, "1", {}, "coupling g/omega_m"},
        {"t", KeyType::range, "pi", {}, "dimensionless time omega_m tau"},
        {"alpha", KeyType::range, "0.8", {}, "cavity amplitude (real); cat amplitude for model=cat"},
        {"beta0", KeyType::range, "2", {}, "initial mechanical amplitude (real); Gaussian mean"},
        {"nbar", KeyType::range, "0", {}, "initial thermal occupation"},
        {"temperature", KeyType::range, "0", {}, "temperature in kelvin; when > 0 it sets nbar"},
        {"omega_m", KeyType::number, "1e6", {}, "mechanical frequency, read according to freq_convention"},
        {"freq_convention", KeyType::choice, "unset", {"unset", "angular", "ordinary"},
         "angular: omega_m in rad/s; ordinary: omega_m in Hz"},
        {"x", KeyType::range, "0", {}, "homodyne outcome"},
        {"r", KeyType::range, "2", {}, "squeeze modulus |zeta(1)| (membrane two-term, fig3 d, gaussian)"},
        {"theta", KeyType::number, "0", {}, "squeeze angle for model=gaussian"},
        {"cov_xx", KeyType::optional_number, "", {}, "explicit Gaussian covariance (all three or none)"},
        {"cov_xp", KeyType::optional_number, "", {}, "explicit Gaussian covariance"},
        {"cov_pp", KeyType::optional_number, "", {}, "explicit Gaussian covariance"},
        {"membrane_state", KeyType::choice, "full", {"full", "two-term"},
         "full conditional state or N(|0> + |zeta(1)>)"},
        {"n_ph", KeyType::integer, "0", {}, "photon truncation; 0 picks it from alpha"},
        {"method", KeyType::choice, "auto", {"auto", "quadrature", "exact"},
         "auto: closed form where one exists, else quadrature"},
        {"tolerance", KeyType::number, "1e-9", {}, "relative tolerance of the adaptive cubature"},
        {"max_over", KeyType::choice, "none", {"none", "t", "x", "t+x"},
         "report the maximum of I over these axes instead of every point"},
        {"grid_half_width", KeyType::number, "0", {}, "Wigner grid half width; 0 sizes it from the state"},
        {"grid_resolution", KeyType::integer, "256", {}, "Wigner grid cells per axis (minimum)"},
        {"benchmark_I", KeyType::range, "1.49", {}, "macroscopicity values for cat-benchmark"},
        {"output", KeyType::text, "", {}, "output path; empty writes to stdout"},
        {"format", KeyType::choice, "csv", {"csv", "json"}, "output format"},
        {"jobs", KeyType::integer, "0", {}, "worker threads; 0 uses the available parallelism"},
    };
    return keys;
}
// clang-format on

inline const KeySpec* find_key(const std::string& name)
{
    for (const auto& k : schema())
        if (name == k.name) return &k;
    return nullptr;
}

/// OPTOMECH_ followed by the upper-cased key, e.g. OPTOMECH_MAX_OVER.
inline std::string env_name(const std::string& key)
{
    std::string s = env_prefix;
    for (char c : key) s += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

inline std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

} // namespace detail

/// Accepts plain numbers plus `pi` with an optional numeric factor (`2pi`, `0.5pi`).
inline double parse_number(const std::string& key, const std::string& raw)
{
    const std::string s = detail::trim(raw);
    if (s.empty()) throw ConfigError(key, "empty value");
    double factor = 1.0;
    std::string body = s;
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
        body = s.substr(0, s.size() - 2);
        factor = pi;
        if (body.empty() || body == "+") return factor;
        if (body == "-") return -factor;
    }
    char* end = nullptr;
    const double v = std::strtod(body.c_str(), &end);
    if (end == body.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError(key, "'" + s + "' is not a finite number");
    return v * factor;
}

inline int parse_integer(const std::string& key, const std::string& raw)
{
    const std::string s = detail::trim(raw);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || v < -1000000000L || v > 1000000000L)
        throw ConfigError(key, "'" + s + "' is not an integer");
    return static_cast<int>(v);
}

inline Range parse_range(const std::string& key, const std::string& raw)
{
    const std::string s = detail::trim(raw);
    Range r;
    if (s.find(',') != std::string::npos) {
        r.is_list = true;
        for (const auto& part : detail::split(s, ',')) r.values.push_back(parse_number(key, part));
        r.count = static_cast<int>(r.values.size());
        r.start = r.values.front();
        r.stop = r.values.back();
        return r;
    }
    const auto parts = detail::split(s, ':');
    if (parts.size() == 1) {
        r.start = r.stop = parse_number(key, parts[0]);
        r.values = {r.start};
        return r;
    }
    if (parts.size() != 3 && parts.size() != 4)
        throw ConfigError(key, "range must be start:stop:count[:log] or a comma-separated list");
    r.start = parse_number(key, parts[0]);
    r.stop = parse_number(key, parts[1]);
    r.count = parse_integer(key, parts[2]);
    if (parts.size() == 4) {
        if (parts[3] == "log")
            r.log = true;
        else if (parts[3] != "lin")
            throw ConfigError(key, "range scale must be 'lin' or 'log'");
    }
    if (r.count < 1) throw ConfigError(key, "range count must be >= 1");
    if (r.count > 10000000) throw ConfigError(key, "range count is unreasonably large");
    if (r.stop < r.start) throw ConfigError(key, "range start must not exceed stop");
    if (r.count == 1 && r.stop != r.start) throw ConfigError(key, "a range with count 1 needs start == stop");
    if (r.log && !(r.start > 0.0)) throw ConfigError(key, "log-scaled range needs positive endpoints");
    for (int i = 0; i < r.count; ++i) {
        const double f = r.count == 1 ? 0.0 : double(i) / (r.count - 1);
        double v = r.log ? std::exp(std::log(r.start) + f * (std::log(r.stop) - std::log(r.start)))
                         : r.start + f * (r.stop - r.start);
        if (i == r.count - 1) v = r.stop;
        r.values.push_back(v);
    }
    return r;
}

inline std::string canonical_range(const Range& r)
{
    if (r.is_list) {
        std::string s;
        for (std::size_t i = 0; i < r.values.size(); ++i) s += (i ? "," : "") + format_number(r.values[i]);
        return s;
    }
    if (r.scalar() && r.count == 1) return format_number(r.start);
    std::string s = format_number(r.start) + ":" + format_number(r.stop) + ":" + std::to_string(r.count);
    if (r.log) s += ":log";
    return s;
}

/// Parses and canonicalizes one value according to its key's type.
inline std::string canonical_value(const KeySpec& spec, const std::string& raw)
{
    const std::string v = detail::trim(raw);
    switch (spec.type) {
    case KeyType::number: return format_number(parse_number(spec.name, v));
    case KeyType::optional_number: return v.empty() ? std::string() : format_number(parse_number(spec.name, v));
    case KeyType::range: return canonical_range(parse_range(spec.name, v));
    case KeyType::integer: return std::to_string(parse_integer(spec.name, v));
    case KeyType::text: return v;
    case KeyType::choice:
        if (std::find(spec.choices.begin(), spec.choices.end(), v) == spec.choices.end()) {
            std::string allowed;
            for (const auto& c : spec.choices) allowed += (allowed.empty() ? "" : "|") + c;
            throw ConfigError(spec.name, "'" + v + "' is not one of " + allowed);
        }
        return v;
    }
    return v;
}

class RunConfig {
public:
    RunConfig()
    {
        for (const auto& k : schema()) values_[k.name] = canonical_value(k, k.default_value);
    }

    void set(const std::string& key, const std::string& raw)
    {
        const KeySpec* spec = find_key(key);
        if (!spec) throw ConfigError(key, "unknown configuration key");
        values_[key] = canonical_value(*spec, raw);
    }

    const std::string& raw(const std::string& key) const
    {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError(key, "unknown configuration key");
        return it->second;
    }

    double number(const std::string& key) const { return parse_number(key, raw(key)); }
    bool has_value(const std::string& key) const { return !raw(key).empty(); }
    int integer(const std::string& key) const { return parse_integer(key, raw(key)); }
    Range range(const std::string& key) const { return parse_range(key, raw(key)); }
    const std::string& text(const std::string& key) const { return raw(key); }

    /// Reads `key = value` lines; `#` starts a comment. Keys may appear once.
    void load_text(const std::string& text, const std::string& origin = "config")
    {
        std::istringstream in(text);
        std::string line;
        std::vector<std::string> seen;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("", origin + ":" + std::to_string(number) + ": expected 'key = value'");
            const std::string key = detail::trim(line.substr(0, eq));
            if (std::find(seen.begin(), seen.end(), key) != seen.end())
                throw ConfigError(key, origin + ":" + std::to_string(number) + ": duplicate key");
            seen.push_back(key);
            try {
                set(key, line.substr(eq + 1));
            } catch (const ConfigError& e) {
                throw ConfigError(e.key(), origin + ":" + std::to_string(number) + ": " + e.what());
            }
        }
    }

    void load_file(const std::string& path)
    {
        std::ifstream in(path);
        if (!in) throw ConfigError("config", "cannot read config file '" + path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        load_text(buf.str(), path);
    }

    /// Applies OPTOMECH_<KEY> variables for every schema key.
    void load_environment()
    {
        for (const auto& k : schema())
            if (const char* v = std::getenv(env_name(k.name).c_str())) {
                try {
                    set(k.name, v);
                } catch (const ConfigError& e) {
                    throw ConfigError(e.key(), env_name(k.name) + ": " + e.what());
                }
            }
    }

    /// Every key in schema order, one `key = value` per line.
    std::string serialize() const
    {
        std::string out;
        for (const auto& k : schema()) out += std::string(k.name) + " = " + values_.at(k.name) + "\n";
        return out;
    }

    /// Value constraints that do not depend on the command.
    void validate() const
    {
        const auto nonneg_range = [&](const char* key) {
            for (double v : range(key).values)
                if (v < 0.0) throw ConfigError(key, "must be >= 0");
        };
        for (const char* key : {"k", "t", "nbar", "temperature", "r", "benchmark_I"}) nonneg_range(key);
        if (!(number("omega_m") > 0.0)) throw ConfigError("omega_m", "must be > 0");
        if (integer("n_ph") < 0) throw ConfigError("n_ph", "must be >= 0");
        const double tol = number("tolerance");
        if (!(tol > 0.0 && tol <= 0.1)) throw ConfigError("tolerance", "must lie in (0, 0.1]");
        if (integer("jobs") < 0) throw ConfigError("jobs", "must be >= 0");
        if (number("grid_half_width") < 0.0) throw ConfigError("grid_half_width", "must be >= 0");
        const int res = integer("grid_resolution");
        if (res < 2 || res > 8192) throw ConfigError("grid_resolution", "must lie in [2, 8192]");
        const bool thermal_by_temperature = range("temperature").values != std::vector<double>{0.0};
        if (thermal_by_temperature) {
            if (text("freq_convention") == "unset")
                throw ConfigError("freq_convention", "temperature input needs an explicit frequency convention");
            if (range("nbar").values != std::vector<double>{0.0})
                throw ConfigError("temperature", "set either nbar or temperature, not both");
            for (double T : range("temperature").values)
                if (!(T > 0.0)) throw ConfigError("temperature", "temperatures must be > 0");
        }
        const int explicit_cov = has_value("cov_xx") + has_value("cov_xp") + has_value("cov_pp");
        if (explicit_cov != 0 && explicit_cov != 3)
            throw ConfigError("cov_xx", "give all of cov_xx, cov_xp, cov_pp or none");
    }

    bool operator==(const RunConfig& o) const { return values_ == o.values_; }

private:
    std::map<std::string, std::string> values_;
};

} // namespace optomech::app
