#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "windclear/model.hpp"

using namespace windclear;

namespace {
std::string case_path(const char* name) { return std::string(WINDCLEAR_CASE_DIR) + "/" + name; }
}

TEST_CASE("bundled illustrative case carries the published data") {
  SystemCase c = load_case(case_path("illustrative.json"));
  REQUIRE(c.generators.size() == 3);
  CHECK(c.generators[0].c2 == 0.01);
  CHECK(c.generators[1].c2 == 0.05);
  CHECK(c.generators[2].c2 == 0.025);
  CHECK(c.generators[0].c1 == 10);
  CHECK(c.generators[1].c1 == 35);
  CHECK(c.generators[2].c1 == 50);
  CHECK(c.generators[0].c_beta == 700);
  CHECK(c.generators[1].c_beta == 300);
  CHECK(c.generators[2].c_beta == 600);
  CHECK(c.generators[0].p_max == 75);
  CHECK(c.generators[1].p_max == 160);
  CHECK(c.generators[2].p_max == 120);
  CHECK(c.demand() == 270);
  CHECK(c.voll == 9000);
  REQUIRE(c.wind.size() == 1);
  CHECK(c.wind[0].forecast == 150);
  CHECK(c.wind[0].std == 50);
  CHECK(c.generators[0].epsilon == 0.05);
  CHECK(c.generators[0].epsilon_ext == 5e-5);
}

TEST_CASE("serialize/load round trip") {
  SystemCase c = load_case(case_path("isone8.json"));
  SystemCase c2 = parse_case(serialize_case(c));
  CHECK(serialize_case(c) == serialize_case(c2));
  CHECK(case_hash(c) == case_hash(c2));
  REQUIRE(c2.network.has_value());
  CHECK(c2.network->lines.size() == 12);
  CHECK(c2.network->nodes.size() == 8);
}

TEST_CASE("aggregate wind") {
  SystemCase c = load_case(case_path("illustrative.json"));
  auto a = aggregate_wind(c);
  CHECK(a.forecast == 150);
  CHECK(a.std == 50);

  c.wind = {{0.0, 3.0, ""}, {0.0, 4.0, ""}};
  CHECK(aggregate_wind(c).std == doctest::Approx(5.0));

  c.wind.clear();
  CHECK(aggregate_wind(c).std == 0.0);
  CHECK(aggregate_wind(c).forecast == 0.0);
}

TEST_CASE("structured validation errors") {
  CHECK_THROWS_AS(parse_case("{\"generators\": []}"), ValidationError);
  CHECK_THROWS_AS(parse_case("not json"), ValidationError);
  CHECK_THROWS_AS(load_case("/nonexistent/file.json"), ValidationError);

  // unknown node referenced by a line
  std::string bad = R"({
    "generators": [{"id": "G", "p_max": 10, "c2": 0.1, "c1": 1, "node": "a"}],
    "wind": [{"forecast": 1, "std": 1, "node": "a"}],
    "network": {"nodes": [{"id": "a", "demand": 5}],
                "lines": [{"from": "a", "to": "zz", "susceptance": 1, "f_max": 5}]},
    "voll": 100})";
  try {
    parse_case(bad);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("zz") != std::string::npos);
    CHECK(e.field().find("lines") != std::string::npos);
  }

  // epsilon_ext must stay below epsilon
  std::string eps = R"({
    "generators": [{"id": "G", "p_max": 10, "c2": 0.1, "c1": 1, "epsilon": 0.05, "epsilon_ext": 0.1}],
    "demand": 5, "voll": 100})";
  CHECK_THROWS_AS(parse_case(eps), ValidationError);

  // p_min above p_max
  std::string pminbad = R"({
    "generators": [{"id": "G", "p_min": 20, "p_max": 10, "c2": 0.1, "c1": 1}],
    "demand": 5, "voll": 100})";
  CHECK_THROWS_AS(parse_case(pminbad), ValidationError);

  // missing demand without a network
  std::string nodem = R"({"generators": [{"id": "G", "p_max": 10, "c2": 0.1, "c1": 1}], "voll": 1})";
  CHECK_THROWS_AS(parse_case(nodem), ValidationError);

  // disconnected network
  std::string island = R"({
    "generators": [{"id": "G", "p_max": 10, "c2": 0.1, "c1": 1, "node": "a"}],
    "wind": [{"forecast": 1, "std": 1, "node": "a"}],
    "network": {"nodes": [{"id": "a", "demand": 5}, {"id": "b", "demand": 5}], "lines": []},
    "voll": 100})";
  CHECK_THROWS_AS(parse_case(island), ValidationError);
}

TEST_CASE("validation never crashes on malformed documents") {
  const char* docs[] = {
      "{}",
      "[]",
      "{\"generators\": 3}",
      "{\"generators\": [{}]}",
      "{\"generators\": [{\"id\": \"G\"}]}",
      "{\"generators\": [{\"id\": \"G\", \"p_max\": \"x\", \"c2\": 0, \"c1\": 0}], \"demand\": 1}",
      "{\"generators\": [{\"id\": \"G\", \"p_max\": 1, \"c2\": 0, \"c1\": 0}], \"demand\": 1, "
      "\"options\": {\"omega_eps_rule\": 12}}",
  };
  for (const char* d : docs) CHECK_THROWS_AS(parse_case(d), ValidationError);
}

TEST_CASE("nodal demand consistency with the aggregate") {
  std::string doc = R"({
    "generators": [{"id": "G", "p_max": 10, "c2": 0.1, "c1": 1, "node": "a"}],
    "wind": [{"forecast": 1, "std": 1, "node": "a"}],
    "network": {"nodes": [{"id": "a", "demand": 5}, {"id": "b", "demand": 5}],
                "lines": [{"from": "a", "to": "b", "susceptance": 1, "f_max": 5}]},
    "demand": 11,
    "voll": 100})";
  CHECK_THROWS_AS(parse_case(doc), ValidationError);
}
