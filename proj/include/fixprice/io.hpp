#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixprice/bilateral.hpp"
#include "fixprice/double_auction.hpp"
#include "fixprice/errors.hpp"

namespace fixprice::io {

using nlohmann::json;

inline constexpr double kIngestMassTolerance = 1e-9;

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw InputError(path + ": " + what);
}

inline const json& field(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing field");
    return *it;
}

inline double number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path, "expected a finite number");
    return x;
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

inline void normalize(std::vector<double>& masses, const std::string& path) {
    double total = 0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        if (masses[i] < 0) fail(path + "[" + std::to_string(i) + "]", "mass must be non-negative");
        total += masses[i];
    }
    if (std::abs(total - 1) > kIngestMassTolerance) fail(path, "masses sum to " + std::to_string(total) + ", not 1");
    for (auto& m : masses) m /= total;
}

} // namespace detail

/// Parses a distribution literal; `path` names its location for diagnostics.
inline Distribution parse_distribution(const json& lit, const std::string& path) {
    const auto& type = detail::field(lit, "type", path);
    if (!type.is_string()) detail::fail(path + ".type", "expected a string");
    const auto kind = type.get<std::string>();
    try {
        if (kind == "discrete") {
            const auto& pts = detail::field(lit, "points", path);
            if (!pts.is_array() || pts.empty()) detail::fail(path + ".points", "expected a non-empty array");
            std::vector<double> values;
            std::vector<double> masses;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const auto at = path + ".points[" + std::to_string(i) + "]";
                if (!pts[i].is_array() || pts[i].size() != 2) detail::fail(at, "expected [value, mass]");
                values.push_back(detail::number(pts[i][0], at + "[0]"));
                masses.push_back(detail::number(pts[i][1], at + "[1]"));
            }
            detail::normalize(masses, path + ".points");
            std::vector<Atom> atoms;
            for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({values[i], masses[i]});
            return Distribution::discrete(std::move(atoms));
        }
        if (kind == "piecewise_uniform") {
            auto breaks = detail::numbers(detail::field(lit, "breakpoints", path), path + ".breakpoints");
            auto masses = detail::numbers(detail::field(lit, "masses", path), path + ".masses");
            detail::normalize(masses, path + ".masses");
            return Distribution::piecewise_uniform(std::move(breaks), std::move(masses));
        }
        if (kind == "uniform") {
            return Distribution::uniform(detail::number(detail::field(lit, "lo", path), path + ".lo"),
                                         detail::number(detail::field(lit, "hi", path), path + ".hi"));
        }
    } catch (const DomainError& e) {
        detail::fail(path, e.what());
    }
    detail::fail(path + ".type", "unknown distribution type '" + kind + "'");
}

inline json to_json(const Distribution& d) {
    if (d.atomless()) {
        return {{"type", "piecewise_uniform"},
                {"breakpoints", std::vector<double>(d.values().begin(), d.values().end())},
                {"masses", std::vector<double>(d.masses().begin(), d.masses().end())}};
    }
    json pts = json::array();
    for (std::size_t i = 0; i < d.values().size(); ++i) pts.push_back({d.values()[i], d.masses()[i]});
    return {{"type", "discrete"}, {"points", pts}};
}

inline json parse_text(const std::string& text, const std::string& source) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(source + ": " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": malformed JSON");
    }
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline BilateralInstance bilateral_from_json(const json& doc) {
    return {parse_distribution(detail::field(doc, "buyer", "$"), "$.buyer"),
            parse_distribution(detail::field(doc, "seller", "$"), "$.seller")};
}

inline DoubleAuctionInstance double_auction_from_json(const json& doc) {
    const auto count = [&](const char* key) {
        const auto& v = detail::field(doc, key, "$");
        if (!v.is_number_integer()) detail::fail(std::string("$.") + key, "expected an integer");
        const auto x = v.get<long long>();
        if (x < 1 || x > 1'000'000) detail::fail(std::string("$.") + key, "must lie in [1, 1000000]");
        return static_cast<int>(x);
    };
    const int n = count("n");
    const int m = count("m");
    return {n, m, parse_distribution(detail::field(doc, "buyer", "$"), "$.buyer"),
            parse_distribution(detail::field(doc, "seller", "$"), "$.seller")};
}

inline BilateralInstance load_bilateral(const std::string& path) {
    try {
        return bilateral_from_json(parse_text(read_file(path), path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
}

inline DoubleAuctionInstance load_double_auction(const std::string& path) {
    try {
        return double_auction_from_json(parse_text(read_file(path), path));
    } catch (const InputError& e) {
        const std::string msg = e.what();
        throw InputError(msg.rfind(path, 0) == 0 ? msg : path + ": " + msg);
    }
}

} // namespace fixprice::io
