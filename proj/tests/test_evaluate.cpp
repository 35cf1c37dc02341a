#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "windclear/evaluate.hpp"
#include "windclear/probkit.hpp"

using namespace windclear;

namespace {
std::string case_path(const char* name) { return std::string(WINDCLEAR_CASE_DIR) + "/" + name; }
SystemCase illustrative() { return load_case(case_path("illustrative.json")); }
}

TEST_CASE("policy at omega = 0 returns the schedule") {
  SystemCase c = illustrative();
  for (ModelKind k : {ModelKind::CC, ModelKind::LDTCC, ModelKind::LDTWCC}) {
    ClearingResult r = clear(c, k);
    auto out = apply_policy(r, c, 0.0);
    for (const auto& g : c.generators)
      CHECK(out.at(g.id) == doctest::Approx(r.p.at(g.id)).epsilon(1e-9).scale(100));
  }
}

TEST_CASE("cc deficit response hits the binding limit at omega = -sigma_hat") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::CC);
  double sh = sigma_hat(c.generators[0], 50.0);
  auto out = apply_policy(r, c, -sh);
  for (const auto& g : c.generators) {
    double expect = r.p.at(g.id) + r.alpha.at(g.id) * sh;
    CHECK(out.at(g.id) == doctest::Approx(std::min(expect, g.p_max)).epsilon(1e-9).scale(100));
  }
  // the generator with a binding capacity row lands exactly on its limit
  CHECK(out.at("G1") == doctest::Approx(75.0));
}

TEST_CASE("ldt-cc piecewise policy is continuous and covers up to omega star") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::LDTCC);
  double oe = *r.omega_eps;
  auto lo = apply_policy(r, c, -(oe - 1e-9));
  auto hi = apply_policy(r, c, -(oe + 1e-9));
  for (const auto& g : c.generators)
    CHECK(lo.at(g.id) == doctest::Approx(hi.at(g.id)).epsilon(1e-6).scale(100));
  CHECK(r.policy_jump.at("G2") == doctest::Approx(0.0));

  // at the dominant point every unit sits exactly at its maximum
  auto ext = apply_policy(r, c, -235.0);
  for (const auto& g : c.generators)
    CHECK(ext.at(g.id) == doctest::Approx(g.p_max).epsilon(1e-6).scale(100));
}

TEST_CASE("ldt-wcc policy jump is reported, not smoothed") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::LDTWCC);
  double oe = *r.omega_eps;
  auto lo = apply_policy(r, c, -(oe - 1e-9));
  auto hi = apply_policy(r, c, -(oe + 1e-9));
  double jump = std::abs(hi.at("G2") - lo.at("G2"));
  // clipping at capacity may absorb part of the raw jump
  double raw = r.policy_jump.at("G2");
  CHECK(raw == doctest::Approx(r.beta.at("G2") * (*r.omega_star - oe)));
  CHECK(jump <= raw + 1e-9);
  CHECK(raw > 1.0);
}

TEST_CASE("seeded determinism and energy accounting") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::LDTWCC);
  ScenarioReport a = evaluate(r, c, 500, 77);
  ScenarioReport b = evaluate(r, c, 500, 77);
  REQUIRE(a.scenarios.size() == 500);
  for (size_t i = 0; i < a.scenarios.size(); ++i) {
    CHECK(a.scenarios[i].omega == b.scenarios[i].omega);
    CHECK(a.scenarios[i].realized_cost == b.scenarios[i].realized_cost);
  }
  ScenarioReport other = evaluate(r, c, 500, 78);
  CHECK(other.scenarios[0].omega != a.scenarios[0].omega);

  for (const auto& sc : a.scenarios) {
    auto out = apply_policy(r, c, sc.omega);
    double total = 0;
    for (const auto& [id, v] : out) total += v;
    // sum outputs + W + omega + unserved - spill = D
    double lhs = total + 150.0 + sc.omega + sc.unserved - sc.spilled;
    CHECK(lhs == doctest::Approx(270.0).epsilon(1e-9));
    CHECK(sc.unserved >= 0);
    CHECK(sc.spilled >= 0);
  }
}

TEST_CASE("aggregate statistics match the per-scenario list") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::CC);
  ScenarioReport rep = evaluate(r, c, 2000, 5);
  double mean = 0;
  for (const auto& s : rep.scenarios) mean += s.realized_cost;
  mean /= rep.scenarios.size();
  CHECK(rep.mean_cost == doctest::Approx(mean).epsilon(1e-12));
  double var = 0;
  for (const auto& s : rep.scenarios) var += (s.realized_cost - mean) * (s.realized_cost - mean);
  CHECK(rep.std_cost == doctest::Approx(std::sqrt(var / rep.scenarios.size())).epsilon(1e-12));
  CHECK(rep.count == 2000);
}

TEST_CASE("empty and degenerate evaluations") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::CC);
  ScenarioReport empty = evaluate(r, c, 0, 9);
  CHECK(empty.scenarios.empty());
  CHECK(empty.mean_cost == 0.0);

  SystemCase tiny = illustrative();
  tiny.wind[0].std = 1e-9;
  ClearingResult rt = clear(tiny, ModelKind::CC);
  ScenarioReport rep = evaluate(rt, tiny, 200, 3);
  double deterministic = 0;
  for (const auto& g : tiny.generators)
    deterministic += g.c2 * rt.p.at(g.id) * rt.p.at(g.id) + g.c1 * rt.p.at(g.id);
  CHECK(rep.mean_cost == doctest::Approx(deterministic).epsilon(1e-3));
}

TEST_CASE("empirical limit-violation frequency stays inside the binomial band") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::CC);
  ScenarioReport rep = evaluate(r, c, 20000, 123);
  std::map<std::string, int> viol;
  for (const auto& sc : rep.scenarios) {
    double w = -sc.omega;
    for (const auto& g : c.generators)
      if (r.p.at(g.id) + r.alpha.at(g.id) * w > g.p_max + 1e-12) ++viol[g.id];
  }
  for (const auto& g : c.generators) {
    double freq = viol.count(g.id) ? viol[g.id] / 20000.0 : 0.0;
    double band = 3 * std::sqrt(0.05 * 0.95 / 20000.0);
    CHECK(freq <= g.epsilon + band);
  }
}

TEST_CASE("tail dominance of the extreme policy") {
  SystemCase c = illustrative();
  ClearingResult rcc = clear(c, ModelKind::CC);
  ClearingResult rld = clear(c, ModelKind::LDTCC);
  // deep deficits beyond omega*: the ldt schedule serves everything it can
  for (double omega : {-236.0, -260.0, -300.0}) {
    auto occ = apply_policy(rcc, c, omega);
    auto old = apply_policy(rld, c, omega);
    double dcc = 0, dld = 0;
    for (const auto& [id, v] : occ) dcc += v;
    for (const auto& [id, v] : old) dld += v;
    double need = 120.0 - omega;
    double unserved_cc = std::max(0.0, need - dcc);
    double unserved_ld = std::max(0.0, need - dld);
    CHECK(unserved_ld <= unserved_cc + 1e-9);
  }
}

TEST_CASE("csv and json report forms") {
  SystemCase c = illustrative();
  ClearingResult r = clear(c, ModelKind::LDTWCC);
  ScenarioReport rep = evaluate(r, c, 10, 4);
  std::string csv = rep.to_csv();
  CHECK(csv.find("scenario,omega,realized_cost,unserved,spilled,violations") == 0);
  CHECK(rep.to_json().find("mean_cost") != std::string::npos);
}
