#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support/oracles.hpp"
#include "windclear/cuttingplane.hpp"
#include "windclear/formulations.hpp"
#include "windclear/probkit.hpp"

using namespace windclear;

namespace {
std::string case_path(const char* name) { return std::string(WINDCLEAR_CASE_DIR) + "/" + name; }
}

TEST_CASE("no nonlinear constraints: a single base solve") {
  CutProblem cp;
  int x = cp.base.add_variable("x", 0.0, 10.0);
  cp.base.add_linear(x, -1.0);
  auto [sol, log] = solve_with_cuts(cp, 1e-8, 50);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(log.converged);
  CHECK(log.iterations.size() == 1);
  CHECK(sol.primal.at("x") == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("1-d toy: max x subject to a truncated-expectation cap, vs bisection") {
  // min -x s.t. E[max(N(x-1, 0.5^2), 0)] <= 0.05
  CutProblem cp;
  int x = cp.base.add_variable("x", 0.0, 10.0);
  cp.base.add_linear(x, -1.0);
  NonlinearConstraint nc;
  nc.id = "cap";
  nc.rhs = 0.05;
  nc.support = {x};
  nc.value = [x](const Eigen::VectorXd& v) { return expected_overload(v[x] - 1.0, 0.5); };
  nc.gradient = [x](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    g[x] = normal_cdf((v[x] - 1.0) / 0.5);
    return g;
  };
  cp.constraints.push_back(nc);
  auto [sol, log] = solve_with_cuts(cp, 1e-9, 100);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(log.converged);
  double xstar = oracles::bisection(
      [](double t) { return expected_overload(t - 1.0, 0.5) - 0.05; }, 0.0, 10.0, 1e-12);
  CHECK(sol.primal.at("x") == doctest::Approx(xstar).epsilon(1e-6));
}

TEST_CASE("monotone relaxation objective and convergence log") {
  SystemCase c = load_case(case_path("illustrative.json"));
  CutProblem cp = build_wcc(c);
  auto [sol, log] = solve_with_cuts(cp, 1e-9, 100);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(log.converged);
  for (size_t i = 1; i < log.iterations.size(); ++i)
    CHECK(log.iterations[i].objective >= log.iterations[i - 1].objective - 1e-7);
  CHECK(log.to_json().find("iterations") != std::string::npos);
}

TEST_CASE("cut gradients match central finite differences") {
  SystemCase c = load_case(case_path("illustrative.json"));
  double omega_star = derive_omega_star(c);
  CutProblem cp = build_ldtwcc(c, omega_star, select_omega_eps(c, omega_star));
  oracles::Rng rng(4242);
  int checked = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(cp.base.num_variables());
    for (int i = 0; i < 3; ++i) x[i] = rng.uniform(0.0, 150.0);       // p
    for (int i = 3; i < 6; ++i) x[i] = rng.uniform(0.01, 1.0);       // alpha
    for (int i = 6; i < 9; ++i) x[i] = rng.uniform(0.01, 1.0);       // beta
    for (const auto& nc : cp.constraints) {
      Eigen::VectorXd g = nc.gradient(x);
      Eigen::VectorXd fd = oracles::fd_gradient(nc.value, x, 1e-5);
      for (int i : nc.support) {
        if (std::abs(fd[i]) > 1e-7) {
          CHECK(g[i] == doctest::Approx(fd[i]).epsilon(1e-5));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("every generated cut is valid for the exact constraint") {
  SystemCase c = load_case(case_path("illustrative.json"));
  double omega_star = derive_omega_star(c);
  CutProblem cp = build_ldtwcc(c, omega_star, select_omega_eps(c, omega_star));
  const auto& nc = cp.constraints[1];  // G2 max side

  // cuts generated at a spread of violated points
  oracles::Rng rng(7);
  std::vector<Cut> cuts;
  int serial = 0;
  while (cuts.size() < 25) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cp.base.num_variables());
    x[1] = rng.uniform(100.0, 200.0);
    x[4] = rng.uniform(0.0, 1.5);
    x[7] = rng.uniform(0.0, 1.5);
    if (nc.value(x) > nc.rhs) cuts.push_back(make_cut(nc, x, serial++));
  }
  // rejection-sample feasible points; all cuts must hold there
  int feasible = 0;
  while (feasible < 1000) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(cp.base.num_variables());
    x[1] = rng.uniform(0.0, 160.0);
    x[4] = rng.uniform(0.0, 1.0);
    x[7] = rng.uniform(0.0, 1.0);
    if (nc.value(x) > nc.rhs) continue;
    ++feasible;
    for (const auto& cut : cuts) {
      double lhs = cut.row.eval(x);
      CHECK(lhs <= cut.rhs + 1e-9);
    }
  }
}

TEST_CASE("degenerate limit: sigma -> 0 cut approaches the deterministic row") {
  NonlinearConstraint nc;
  nc.id = "deg";
  nc.rhs = 0.05;
  nc.support = {0, 1};
  // mu = x0 - 10, sigma = x1 with x1 pinned at 0
  nc.value = [](const Eigen::VectorXd& v) { return expected_overload(v[0] - 10.0, v[1]); };
  nc.gradient = [](const Eigen::VectorXd& v) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(v.size());
    if (v[1] <= 1e-300) {
      g[0] = v[0] - 10.0 > 0 ? 1.0 : 0.0;
      g[1] = 0.0;
    } else {
      double m = (v[0] - 10.0) / v[1];
      g[0] = normal_cdf(m);
      g[1] = normal_pdf(m);
    }
    return g;
  };
  Eigen::VectorXd x(2);
  x << 12.0, 0.0;
  Cut cut = make_cut(nc, x, 0);
  // exact linear row: (x0 - 10) <= eps
  CHECK(cut.row.terms.size() == 1);
  CHECK(cut.row.terms[0].second == doctest::Approx(1.0));
  CHECK(cut.rhs == doctest::Approx(10.05));

  // vanishing gradient at a violated point must raise
  NonlinearConstraint zero = nc;
  zero.gradient = [](const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(v.size()); };
  CHECK_THROWS_AS(make_cut(zero, x, 1), std::runtime_error);
}

TEST_CASE("aggregated cut duals reproduce the nonlinear multiplier contribution") {
  SystemCase c = load_case(case_path("illustrative.json"));
  double omega_star = derive_omega_star(c);
  CutProblem cp = build_ldtwcc(c, omega_star, select_omega_eps(c, omega_star));
  auto [sol, log] = solve_with_cuts(cp, 1e-9, 100);
  REQUIRE(sol.status == SolveStatus::Optimal);
  REQUIRE(log.converged);
  // stationarity of the alpha block: 2 c2 sigma^2 alpha + sum nu*grad = rho
  double sigma = aggregate_wind(c).std;
  double rho = sol.duals_eq.at("reserve_reg");
  for (int i = 0; i < 3; ++i) {
    double av = sol.x[3 + i];
    if (av < 1e-5) continue;
    double acc = 2 * c.generators[i].c2 * sigma * sigma * av;
    for (const auto& nc : cp.constraints) {
      auto it = sol.duals_ineq.find("nl:" + nc.id);
      if (it == sol.duals_ineq.end() || it->second < 1e-12) continue;
      acc += it->second * nc.gradient(sol.x)[3 + i];
    }
    CHECK(acc == doctest::Approx(rho).epsilon(1e-5));
  }
}
