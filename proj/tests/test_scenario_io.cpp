#include <string>

#include <gtest/gtest.h>

#include "cvqn/scenario_io.hpp"

using namespace cvqn;

namespace {

const char* kMinimal = R"({
  "n_users": 3,
  "mod_variance_snu": 4.93,
  "distance_km": [5, 10, 15],
  "excess_noise_snu": 0.01847,
  "beta": 0.9578
})";

ErrorKind kind_of(const std::string& text) {
    try {
        parse_scenario(text, "doc.json");
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::IoError;  // sentinel: nothing thrown
}

std::string message_of(const std::string& text) {
    try {
        parse_scenario(text, "doc.json");
    } catch (const Error& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(ScenarioIo, DefaultsAndBroadcast) {
    const auto s = parse_scenario(kMinimal);
    EXPECT_EQ(s.n_users, 3);
    EXPECT_EQ(s.mod_variance_snu, std::vector<double>(3, 4.93));
    EXPECT_DOUBLE_EQ(s.channels[2].distance_km, 15.0);
    EXPECT_DOUBLE_EQ(s.channels[0].attenuation_db_per_km, 0.2);
    EXPECT_DOUBLE_EQ(s.channels[0].det_efficiency, 1.0);
    EXPECT_EQ(s.isolation.kind, IsolationKind::perfect);
    EXPECT_EQ(s.scheme, Scheme::frequency);
    EXPECT_EQ(s.regime.regime, Regime::asymptotic);
    EXPECT_DOUBLE_EQ(s.rep_rate_hz, 1e9);
    EXPECT_DOUBLE_EQ(s.regime.pe_fraction, 0.5);
}

TEST(ScenarioIo, IsolationDbImpliesDecay) {
    std::string text = kMinimal;
    text.insert(text.find("\"beta\""), "\"isolation_db\": -30,\n  ");
    const auto s = parse_scenario(text);
    EXPECT_EQ(s.isolation.kind, IsolationKind::nearest_neighbor_decay);
    EXPECT_DOUBLE_EQ(s.isolation.isolation_db, -30.0);
}

TEST(ScenarioIo, UnknownKeyReportsLine) {
    std::string text = kMinimal;
    text.insert(text.find("\"beta\""), "\"betta\": 1,\n  ");
    EXPECT_EQ(kind_of(text), ErrorKind::ParseError);
    const auto msg = message_of(text);
    EXPECT_NE(msg.find("doc.json:6"), std::string::npos) << msg;
    EXPECT_NE(msg.find("betta"), std::string::npos);
}

TEST(ScenarioIo, MissingRequiredKey) {
    const auto msg = message_of(R"({"n_users": 1, "mod_variance_snu": 4, "distance_km": 5, "excess_noise_snu": 0.01})");
    EXPECT_NE(msg.find("beta"), std::string::npos);
    EXPECT_NE(msg.find("missing"), std::string::npos);
}

TEST(ScenarioIo, ListLengthMustMatch) {
    std::string text = kMinimal;
    text.replace(text.find("[5, 10, 15]"), 11, "[5, 10]");
    EXPECT_EQ(kind_of(text), ErrorKind::ParseError);
    EXPECT_NE(message_of(text).find("doc.json:4"), std::string::npos);
}

TEST(ScenarioIo, MalformedJsonReportsLine) {
    const auto msg = message_of("{\n  \"n_users\": 3,\n  \"beta\": ,\n}");
    EXPECT_NE(msg.find("doc.json:3"), std::string::npos) << msg;
}

TEST(ScenarioIo, BadEnumValue) {
    std::string text = kMinimal;
    text.insert(text.find("\"beta\""), "\"scheme\": \"wavelength\",\n  ");
    EXPECT_NE(message_of(text).find("frequency, temporal, splitter"), std::string::npos);
}

TEST(ScenarioIo, WrongType) {
    std::string text = kMinimal;
    text.replace(text.find("4.93"), 4, "\"4.93\"");
    EXPECT_EQ(kind_of(text), ErrorKind::ParseError);
}

TEST(ScenarioIo, ValidationErrorsKeepTheirKind) {
    std::string text = kMinimal;
    text.insert(text.find("\"beta\""), "\"regime\": \"finite_size\", \"n_block\": 100,\n  ");
    EXPECT_EQ(kind_of(text), ErrorKind::BlockTooSmall);
    std::string neg = kMinimal;
    neg.replace(neg.find("0.01847"), 7, "-0.1");
    EXPECT_EQ(kind_of(neg), ErrorKind::InvalidParameter);
}

TEST(ScenarioIo, NonIntegerUsers) {
    std::string text = kMinimal;
    text.replace(text.find("\"n_users\": 3"), 12, "\"n_users\": 2.5");
    EXPECT_EQ(kind_of(text), ErrorKind::ParseError);
}

TEST(ScenarioIo, RoundTrip) {
    std::string text = kMinimal;
    text.insert(text.find("\"beta\""),
                "\"regime\": \"composable\", \"scheme\": \"temporal\", \"isolation_db\": -40, \"transmittance_override\": "
                "[0.5, 0.4, 0.3], \"det_efficiency\": 0.7, \"det_electronic_noise_snu\": 0.05,\n  ");
    const auto a = parse_scenario(text);
    const auto b = parse_scenario(to_json(a).dump(2));
    EXPECT_EQ(to_json(a), to_json(b));
    EXPECT_DOUBLE_EQ(*b.channels[1].transmittance_override, 0.4);
    EXPECT_EQ(b.scheme, Scheme::temporal);
    EXPECT_EQ(b.regime.regime, Regime::composable);
}

TEST(ScenarioIo, MissingFileIsIoError) {
    try {
        load_scenario("/nonexistent/scenario.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IoError);
        EXPECT_EQ(exit_code(e.kind()), 4);
    }
}
