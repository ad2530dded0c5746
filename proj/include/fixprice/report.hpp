#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace fixprice::report {

/// Shortest decimal that round-trips; infinities print as "inf" / "-inf".
inline std::string format_number(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    if (x == 0) return "0";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

struct Metric {
    std::string name;
    std::variant<double, std::string> value;
    std::optional<double> halfwidth;
    std::optional<std::int64_t> replicates;
    std::optional<std::uint64_t> seed;
};

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct Report {
    std::string command;
    std::vector<Metric> metrics;
    std::vector<Table> tables;
    std::vector<std::string> violations;
    bool has_violation_field = false; // emit "violations" even when empty

    Report& add(std::string name, double value) {
        metrics.push_back({std::move(name), value, {}, {}, {}});
        return *this;
    }
    Report& add(std::string name, std::string value) {
        metrics.push_back({std::move(name), std::move(value), {}, {}, {}});
        return *this;
    }
    Report& add(std::string name, double value, double halfwidth, std::int64_t replicates, std::uint64_t seed) {
        metrics.push_back({std::move(name), value, halfwidth, replicates, seed});
        return *this;
    }
};

namespace detail {

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline nlohmann::ordered_json json_number(double x) {
    if (std::isfinite(x)) return x;
    return format_number(x);
}

} // namespace detail

/// Metrics block `name,value,halfwidth,replicates,seed`, then each table after
/// a blank line with its own header row.
inline void write_csv(const Report& rep, std::ostream& out) {
    out << "name,value,halfwidth,replicates,seed\n";
    for (const auto& m : rep.metrics) {
        out << detail::csv_field(m.name) << ',';
        if (const auto* d = std::get_if<double>(&m.value)) out << format_number(*d);
        else out << detail::csv_field(std::get<std::string>(m.value));
        out << ',' << (m.halfwidth ? format_number(*m.halfwidth) : "");
        out << ',' << (m.replicates ? std::to_string(*m.replicates) : "");
        out << ',' << (m.seed ? std::to_string(*m.seed) : "") << '\n';
    }
    for (const auto& v : rep.violations) out << "violation," << detail::csv_field(v) << ",,,\n";
    for (const auto& t : rep.tables) {
        out << '\n';
        for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
        out << '\n';
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
            out << '\n';
        }
    }
}

inline nlohmann::ordered_json to_json(const Report& rep) {
    nlohmann::ordered_json doc;
    doc["command"] = rep.command;
    auto& metrics = doc["metrics"] = nlohmann::ordered_json::object();
    for (const auto& m : rep.metrics) {
        nlohmann::ordered_json v;
        if (const auto* d = std::get_if<double>(&m.value)) v = detail::json_number(*d);
        else v = std::get<std::string>(m.value);
        if (!m.halfwidth && !m.replicates && !m.seed) {
            metrics[m.name] = v;
            continue;
        }
        nlohmann::ordered_json entry;
        entry["value"] = v;
        if (m.halfwidth) entry["halfwidth"] = detail::json_number(*m.halfwidth);
        if (m.replicates) entry["replicates"] = *m.replicates;
        if (m.seed) entry["seed"] = *m.seed;
        metrics[m.name] = entry;
    }
    for (const auto& t : rep.tables) {
        auto rows = nlohmann::ordered_json::array();
        for (const auto& row : t.rows) {
            nlohmann::ordered_json r;
            for (std::size_t i = 0; i < row.size() && i < t.columns.size(); ++i) r[t.columns[i]] = detail::json_number(row[i]);
            rows.push_back(r);
        }
        doc[t.name] = rows;
    }
    if (rep.has_violation_field || !rep.violations.empty()) doc["violations"] = rep.violations;
    return doc;
}

inline void write_json(const Report& rep, std::ostream& out) { out << to_json(rep).dump(2) << '\n'; }

} // namespace fixprice::report
