#pragma once

// Tabular output: CSV with a header row, or JSON as an array of objects
// with the same keys. Numbers carry 12 significant digits.

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace optomech::app {

using Cell = std::variant<double, std::string>;

/// Columns every sweep command emits, in this order; command-specific
/// columns follow.
inline const std::vector<std::string>& standard_columns()
{
    static const std::vector<std::string> cols = {"k", "nbar", "t", "x", "alpha", "beta0",
                                                  "I", "M", "raw_integral", "error_estimate", "method"};
    return cols;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return i;
        return columns.size();
    }
};

inline std::string format12(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0"; // folds -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const Table& t)
{
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            if (const double* d = std::get_if<double>(&row[i]))
                out << format12(*d);
            else
                out << std::get<std::string>(row[i]);
        }
        out << '\n';
    }
}

/// Rounds to the same 12 digits as the CSV; non-finite values become null.
inline nlohmann::ordered_json json_number(double v)
{
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(format12(v).c_str(), nullptr);
}

inline nlohmann::ordered_json to_json(const Table& t)
{
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) {
        nlohmann::ordered_json obj = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (const double* d = std::get_if<double>(&row[i]))
                obj[t.columns[i]] = json_number(*d);
            else
                obj[t.columns[i]] = std::get<std::string>(row[i]);
        }
        arr.push_back(std::move(obj));
    }
    return arr;
}

inline void write_json(std::ostream& out, const Table& t) { out << to_json(t).dump(2) << '\n'; }

} // namespace optomech::app
