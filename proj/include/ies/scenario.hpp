#pragma once

// Day-ahead load and wind profiles for the three communities, the scenario
// CSV format and a deterministic synthetic profile generator.
//
// CSV layout: header `community,step,p_load_kw,h_load_kw,w_load_m3h,p_wind_kw`
// followed by 72 rows, one per (community 1..3, step 0..23), in any order.

#include "ies/error.hpp"
#include "ies/system.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ies {

inline constexpr int kSteps = 24;
inline constexpr const char* kScenarioHeader = "community,step,p_load_kw,h_load_kw,w_load_m3h,p_wind_kw";

struct StepData {
    double p_load = 0.0;  ///< kW
    double h_load = 0.0;  ///< kW
    double w_load = 0.0;  ///< m3/h
    double p_wind = 0.0;  ///< available wind, kW

    Loads loads() const { return {p_load, h_load, w_load}; }
    friend bool operator==(const StepData&, const StepData&) = default;
};

struct ScenarioData {
    std::array<std::array<StepData, kSteps>, kCommunities> data{};

    const StepData& at(int community, int step) const { return data.at(community).at(step); }
    StepData& at(int community, int step) { return data.at(community).at(step); }

    std::array<Loads, kCommunities> loads(int step) const {
        return {at(0, step).loads(), at(1, step).loads(), at(2, step).loads()};
    }
    std::array<double, kCommunities> wind(int step) const {
        return {at(0, step).p_wind, at(1, step).p_wind, at(2, step).p_wind};
    }

    friend bool operator==(const ScenarioData&, const ScenarioData&) = default;
};

namespace scenario_detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_number(const std::string& text, std::size_t row, std::size_t col) {
    if (text.empty()) throw ParseError("empty field", row, col);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + text + "'", row, col);
    }
    if (used != text.size()) throw ParseError("trailing characters in number: '" + text + "'", row, col);
    if (!std::isfinite(v)) throw ParseError("non-finite value: '" + text + "'", row, col);
    return v;
}

inline int parse_index(const std::string& text, std::size_t row, std::size_t col) {
    const double v = parse_number(text, row, col);
    if (v != std::floor(v)) throw ParseError("expected an integer: '" + text + "'", row, col);
    return static_cast<int>(v);
}

inline std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace scenario_detail

/// Parses and validates a scenario CSV.
inline ScenarioData parse_scenario(std::istream& in) {
    using namespace scenario_detail;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("scenario: empty file");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kScenarioHeader) throw SchemaError(std::string("scenario: header must be '") + kScenarioHeader + "'");

    ScenarioData sc;
    std::array<std::array<bool, kSteps>, kCommunities> seen{};
    std::size_t rows = 0;
    std::size_t row_no = 1;
    static const char* names[] = {"community", "step", "p_load_kw", "h_load_kw", "w_load_m3h", "p_wind_kw"};
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = split(line, ',');
        if (fields.size() != 6)
            throw ParseError("expected 6 columns, found " + std::to_string(fields.size()), row_no);
        const int c = parse_index(fields[0], row_no, 1);
        const int t = parse_index(fields[1], row_no, 2);
        if (c < 1 || c > kCommunities) throw ParseError("community must be 1, 2 or 3", row_no, 1);
        if (t < 0 || t >= kSteps) throw ParseError("step must lie in 0..23", row_no, 2);
        if (seen[c - 1][t]) throw ParseError("duplicate (community, step) pair", row_no);
        seen[c - 1][t] = true;
        std::array<double, 4> v{};
        for (std::size_t k = 0; k < 4; ++k) {
            v[k] = parse_number(fields[k + 2], row_no, k + 3);
            if (v[k] < 0.0)
                throw ParseError(std::string("negative value in ") + names[k + 2], row_no, k + 3);
        }
        sc.at(c - 1, t) = StepData{v[0], v[1], v[2], v[3]};
        ++rows;
    }
    for (int c = 0; c < kCommunities; ++c) {
        const auto n = std::count(seen[c].begin(), seen[c].end(), true);
        if (n != kSteps) {
            throw SchemaError("scenario: expected 24 rows for community " + std::to_string(c + 1) + ", found " +
                              std::to_string(n) + " (72 rows in total, found " + std::to_string(rows) + ")");
        }
    }
    return sc;
}

inline ScenarioData load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("scenario: cannot open '" + path + "'");
    return parse_scenario(in);
}

/// Community-major, step-minor rows with three decimals.
inline std::string format_scenario(const ScenarioData& sc) {
    using scenario_detail::format_value;
    std::string out = std::string(kScenarioHeader) + "\n";
    for (int c = 0; c < kCommunities; ++c) {
        for (int t = 0; t < kSteps; ++t) {
            const StepData& s = sc.at(c, t);
            out += std::to_string(c + 1) + "," + std::to_string(t) + "," + format_value(s.p_load) + ","
                 + format_value(s.h_load) + "," + format_value(s.w_load) + "," + format_value(s.p_wind) + "\n";
        }
    }
    return out;
}

inline void write_scenario(const std::string& path, const ScenarioData& sc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SchemaError("scenario: cannot write '" + path + "'");
    out << format_scenario(sc);
}

/// FNV-1a 64 over the bytes of `text`.
inline std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string scenario_hash(const ScenarioData& sc) { return hex64(fnv1a64(format_scenario(sc))); }

// ---------------------------------------------------------------------------
// Synthetic profiles

/// Parameters of the profile generator. All magnitudes are multiplied by
/// `amplitude`; `noise` is the relative standard deviation of a seeded
/// multiplicative perturbation applied to every value.
struct GeneratorSpec {
    std::string profile = "complementary-winter";
    double amplitude = 1.0;
    double noise = 0.02;
    std::uint64_t seed = 7;

    void validate() const {
        if (profile != "complementary-winter" && profile != "decoupled")
            throw SchemaError("generator: unknown profile '" + profile + "'");
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw SchemaError("generator: amplitude must be >= 0");
        if (!(noise >= 0.0 && noise < 0.5)) throw SchemaError("generator: noise must lie in [0, 0.5)");
    }
};

/// Night hours of the synthetic day: 22:00-05:59.
inline bool is_night(int t) { return t >= 22 || t < 6; }

namespace scenario_detail {

// Smooth bump centred on `centre` (hours), circular over the day.
inline double bump(int t, double centre, double width) {
    double d = std::abs(static_cast<double>(t) - centre);
    d = std::min(d, 24.0 - d);
    return std::exp(-0.5 * (d / width) * (d / width));
}

// 0 during night hours, 1 during the day, with one-hour shoulders.
inline double daylight(int t) {
    if (is_night(t)) return 0.0;
    if (t == 6 || t == 21) return 0.5;
    return 1.0;
}

}  // namespace scenario_detail

/// Builds the noiseless base profile, then applies the seeded perturbation.
///
/// complementary-winter: the industrial community draws a high flat
/// electric load exceeding its CHP capacity; the commercial community peaks
/// in the daytime and at night has a light load, no water demand and a wind
/// output matching the load, so in isolation the CHP minimum output forces
/// curtailment; the residential
/// community has an evening heat peak. Only the commercial community has wind.
///
/// decoupled: every community covers its load with its own CHP at an interior
/// operating point and there is no wind, so exchanges bring no saving.
inline ScenarioData generate_scenario(const GeneratorSpec& spec) {
    using namespace scenario_detail;
    spec.validate();
    ScenarioData sc;
    for (int t = 0; t < kSteps; ++t) {
        const double day = daylight(t);
        const double wiggle = 0.04 * std::sin(2.0 * std::numbers::pi * (t + 0.5) / 24.0 * 3.0);
        if (spec.profile == "complementary-winter") {
            // industrial
            sc.at(0, t) = StepData{(5600.0 + 500.0 * day) * (1.0 + wiggle),
                                   (2800.0 + 300.0 * day) * (1.0 - wiggle),
                                   120.0 + 20.0 * day, 0.0};
            // commercial
            const double night_load = 1500.0 * (1.0 + wiggle);
            sc.at(1, t) = StepData{is_night(t) ? night_load : 1500.0 + 2800.0 * day * (0.8 + 0.2 * bump(t, 14.0, 3.0)),
                                   600.0 + 1800.0 * day * (0.8 + 0.2 * bump(t, 12.0, 4.0)),
                                   is_night(t) ? 0.0 : 40.0 + 60.0 * day, is_night(t) ? night_load : 0.0};
            // residential
            sc.at(2, t) = StepData{(2200.0 + 1300.0 * bump(t, 19.5, 2.0) - 500.0 * (1.0 - day)) * (1.0 - wiggle),
                                   2600.0 + 1500.0 * bump(t, 20.0, 2.5) + 400.0 * (1.0 - day),
                                   90.0 + 40.0 * bump(t, 8.0, 2.0) + 40.0 * bump(t, 19.0, 2.0), 0.0};
        } else {
            for (int c = 0; c < kCommunities; ++c) {
                const double base = 2200.0 + 400.0 * c;
                sc.at(c, t) = StepData{(base + 800.0 * day) * (1.0 + wiggle), (1500.0 + 300.0 * c + 500.0 * (1.0 - day)),
                                       60.0 + 20.0 * c + 20.0 * day, 0.0};
            }
        }
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int c = 0; c < kCommunities; ++c) {
        for (int t = 0; t < kSteps; ++t) {
            StepData& s = sc.at(c, t);
            const double np = spec.noise * gauss(rng);
            const double nh = spec.noise * gauss(rng);
            const double nw = spec.noise * gauss(rng);
            s.p_load *= spec.amplitude * (1.0 + np);
            s.h_load *= spec.amplitude * (1.0 + nh);
            s.w_load *= spec.amplitude * (1.0 + nw);
            // Night wind tracks the perturbed night load exactly.
            s.p_wind = (s.p_wind > 0.0) ? s.p_load : 0.0;
        }
    }
    // Round to the CSV precision so generated and re-loaded scenarios agree.
    for (auto& row : sc.data) {
        for (auto& s : row) {
            s.p_load = std::stod(format_value(s.p_load));
            s.h_load = std::stod(format_value(s.h_load));
            s.w_load = std::stod(format_value(s.w_load));
            s.p_wind = std::stod(format_value(s.p_wind));
        }
    }
    return sc;
}

}  // namespace ies
