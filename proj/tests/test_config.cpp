#include "spinbal/config.hpp"

#include <gtest/gtest.h>

using namespace spinbal;

namespace {

const char* kMinimal = R"({
  "rotor": {"m1": 0.05, "m2": 0.05, "r1": 0.1, "r2": 0.1, "a": 0.5, "b": 0.5,
            "omega": 100, "F": [15, 25], "N": [32.5, 47.5]},
  "phi0": [2.6, 0.6, 2.5, 1.5]
})";

std::string field_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const InvalidArgument& e) {
        return e.field();
    }
    return "";
}

std::string with_rotor(const std::string& extra) {
    return R"({"rotor": {"m1": 0.05, "m2": 0.05, "r1": 0.1, "r2": 0.1, "a": 0.5, "b": 0.5,
              "omega": 100, "F": [15, 25], "N": [32.5, 47.5])" +
           extra + R"(}, "phi0": [2.6, 0.6, 2.5, 1.5]})";
}

}  // namespace

TEST(Config, MinimalLoadsWithDefaults) {
    const RunConfig c = parse_config(kMinimal);
    EXPECT_DOUBLE_EQ(c.rotor.omega, 100.0);
    EXPECT_DOUBLE_EQ(c.rotor.beta, 1.0);
    EXPECT_DOUBLE_EQ(c.rotor.N.y(), 47.5);
    EXPECT_DOUBLE_EQ(c.phi0[3], 1.5);
    EXPECT_DOUBLE_EQ(c.solver.dt_max, 0.01);
    EXPECT_DOUBLE_EQ(c.solver.T_cap, 30.0);
    EXPECT_EQ(c.rl.grid, 128);
    EXPECT_EQ(c.rl.quadrature, "trapezoid");
    EXPECT_EQ(c.analysis.grid, 256);
    EXPECT_EQ(c.seed, 0u);
}

TEST(Config, NegativeMassNamesField) {
    std::string text = kMinimal;
    text.replace(text.find("\"m1\": 0.05"), 10, "\"m1\": -0.05");
    const std::string f = field_of(text);
    EXPECT_EQ(f, "rotor.m1");
    EXPECT_NE(f.find("m1"), std::string::npos);
}

TEST(Config, UnknownKeyIsRejectedByName) {
    EXPECT_EQ(field_of(with_rotor(R"(, "omega_rpm": 955)")), "rotor.omega_rpm");
    EXPECT_EQ(field_of(R"({"rotor": {}, "phi0": [0,0,0,0], "extra": 1})"), "extra");
    EXPECT_EQ(field_of(std::string(kMinimal).insert(1, R"("solver": {"dtmax": 0.1}, )")), "solver.dtmax");
}

TEST(Config, MissingAndMistypedFields) {
    EXPECT_EQ(field_of(R"({"phi0": [0,0,0,0]})"), "rotor");
    EXPECT_EQ(field_of(with_rotor(R"(, "beta": "one")")), "rotor.beta");
    std::string text = kMinimal;
    text.replace(text.find("[2.6, 0.6, 2.5, 1.5]"), 20, "[2.6, 0.6]");
    EXPECT_EQ(field_of(text), "phi0");
    EXPECT_EQ(field_of(std::string(kMinimal).insert(1, R"("rl": {"grid": 64.5}, )")), "rl.grid");
    EXPECT_EQ(field_of(std::string(kMinimal).insert(1, R"("rl": {"quadrature": "simpson"}, )")), "rl.quadrature");
    EXPECT_EQ(field_of(std::string(kMinimal).insert(1, R"("solver": {"T_min": 50}, )")), "solver.T_cap");
    EXPECT_EQ(field_of(std::string(kMinimal).insert(1, R"("seed": -3, )")), "seed");
}

TEST(Config, ParseErrorCarriesLineAndColumn) {
    const std::string text = "{\n  \"rotor\": {\n    \"m1\": 0.05,,\n  }\n}";
    try {
        parse_config(text);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_EQ(e.column(), 16u);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(Config, EchoRoundTrips) {
    RunConfig c = parse_config(kMinimal);
    c.rl.grid = 64;
    c.seed = 99;
    c.out_dir = "somewhere";
    nlohmann::json j = to_json(c);
    EXPECT_EQ(j["format_version"], kConfigFormat);
    j.erase("format_version");
    const RunConfig back = parse_config(j.dump());
    EXPECT_EQ(to_json(back), to_json(c));
}

TEST(Config, LoadMissingFileThrows) {
    EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
    EXPECT_NO_THROW(load_config(std::string(SPINBAL_SOURCE_DIR) + "/configs/demo.json"));
    EXPECT_NO_THROW(load_config(std::string(SPINBAL_SOURCE_DIR) + "/configs/minimal.json"));
}
