#include "ies/scenario.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace ies;

namespace {

std::string rows(int n, const std::string& bad_cell = "") {
    std::string s = std::string(kScenarioHeader) + "\n";
    int k = 0;
    for (int c = 1; c <= 3; ++c)
        for (int t = 0; t < kSteps; ++t) {
            if (k++ >= n) return s;
            s += std::to_string(c) + "," + std::to_string(t) + ",1000," + (k == 5 && !bad_cell.empty() ? bad_cell : "500") +
                 ",50,0\n";
        }
    return s;
}

ScenarioData parse(const std::string& text) {
    std::istringstream in(text);
    return parse_scenario(in);
}

}  // namespace

TEST(ScenarioCsv, ParsesFullFile) {
    const ScenarioData sc = parse(rows(72));
    EXPECT_EQ(sc.at(2, 23).p_load, 1000.0);
    EXPECT_EQ(sc.at(0, 4).h_load, 500.0);
}

TEST(ScenarioCsv, ShortCommunityNamesTheCount) {
    try {
        parse(rows(23));
        FAIL() << "expected a schema error";
    } catch (const SchemaError& e) {
        EXPECT_NE(std::string(e.what()).find("expected 24 rows"), std::string::npos) << e.what();
    }
    EXPECT_THROW(parse(rows(71)), SchemaError);
}

TEST(ScenarioCsv, NegativeValueNamesTheCell) {
    try {
        parse(rows(72, "-1"));
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.row(), 6u);
        EXPECT_EQ(e.column(), 4u);
        EXPECT_NE(std::string(e.what()).find("h_load_kw"), std::string::npos);
    }
}

TEST(ScenarioCsv, RejectsMalformedInput) {
    EXPECT_THROW(parse(""), SchemaError);
    EXPECT_THROW(parse("a,b\n"), SchemaError);
    EXPECT_THROW(parse(rows(72, "abc")), ParseError);
    EXPECT_THROW(parse(rows(72) + "1,0,1,1,1,1\n"), ParseError);
    EXPECT_THROW(parse(rows(72) + "4,0,1,1,1,1\n"), ParseError);
    EXPECT_THROW(parse(rows(72) + "1,0,1,1,1\n"), ParseError);
}

TEST(ScenarioCsv, RowOrderDoesNotMatter) {
    const std::string text = rows(72);
    std::istringstream in(text);
    std::string header, line;
    std::getline(in, header);
    std::vector<std::string> body;
    while (std::getline(in, line)) body.push_back(line);
    std::string reversed = header + "\n";
    for (auto it = body.rbegin(); it != body.rend(); ++it) reversed += *it + "\n";
    EXPECT_EQ(parse(reversed), parse(text));
}

TEST(ScenarioCsv, RoundTripAndHash) {
    const ScenarioData sc = generate_scenario(GeneratorSpec{});
    const std::string text = format_scenario(sc);
    EXPECT_EQ(parse(text), sc);
    EXPECT_EQ(format_scenario(parse(text)), text);
    EXPECT_EQ(scenario_hash(sc), scenario_hash(parse(text)));
    ScenarioData other = sc;
    other.at(1, 3).p_load += 1.0;
    EXPECT_NE(scenario_hash(other), scenario_hash(sc));
    EXPECT_EQ(scenario_hash(sc).size(), 16u);
}

TEST(Generator, SameSeedSameBytes) {
    GeneratorSpec g;
    EXPECT_EQ(format_scenario(generate_scenario(g)), format_scenario(generate_scenario(g)));
    GeneratorSpec h = g;
    h.seed = g.seed + 1;
    EXPECT_NE(format_scenario(generate_scenario(g)), format_scenario(generate_scenario(h)));
}

TEST(Generator, ZeroAmplitudeIsAllZero) {
    GeneratorSpec g;
    g.amplitude = 0.0;
    const ScenarioData sc = generate_scenario(g);
    for (const auto& row : sc.data)
        for (const auto& s : row) EXPECT_EQ(s, StepData{});
}

TEST(Generator, ComplementaryStructure) {
    const ScenarioData sc = generate_scenario(GeneratorSpec{});
    for (int t = 0; t < kSteps; ++t) {
        EXPECT_EQ(sc.at(0, t).p_wind, 0.0);
        EXPECT_EQ(sc.at(2, t).p_wind, 0.0);
        // industrial electric load exceeds one CHP
        EXPECT_GT(sc.at(0, t).p_load, 5000.0);
        if (is_night(t)) {
            EXPECT_GE(sc.at(1, t).p_wind, sc.at(1, t).p_load);
            EXPECT_EQ(sc.at(1, t).w_load, 0.0);
        } else {
            EXPECT_EQ(sc.at(1, t).p_wind, 0.0);
        }
    }
}

TEST(Generator, DecoupledHasNoWind) {
    GeneratorSpec g;
    g.profile = "decoupled";
    const ScenarioData sc = generate_scenario(g);
    for (const auto& row : sc.data)
        for (const auto& s : row) {
            EXPECT_EQ(s.p_wind, 0.0);
            EXPECT_GT(s.p_load, 1000.0);
            EXPECT_LT(s.p_load, 5000.0);
        }
}

TEST(Generator, Validation) {
    GeneratorSpec g;
    g.profile = "summer";
    EXPECT_THROW(generate_scenario(g), SchemaError);
    g = GeneratorSpec{};
    g.noise = 0.6;
    EXPECT_THROW(generate_scenario(g), SchemaError);
    g = GeneratorSpec{};
    g.amplitude = -1.0;
    EXPECT_THROW(generate_scenario(g), SchemaError);
}
