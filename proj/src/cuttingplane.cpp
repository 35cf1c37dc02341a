#include "windclear/cuttingplane.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace windclear {

std::string CutLog::to_json() const {
  nlohmann::json j;
  j["converged"] = converged;
  j["iterations"] = nlohmann::json::array();
  for (const auto& it : iterations) {
    nlohmann::json ij;
    ij["index"] = it.index;
    ij["objective"] = it.objective;
    ij["cuts_added"] = it.cuts_added;
    ij["violations"] = nlohmann::json::array();
    for (const auto& [id, v] : it.violations) ij["violations"].push_back({{"constraint", id}, {"value", v}});
    j["iterations"].push_back(ij);
  }
  return j.dump(2);
}

Cut make_cut(const NonlinearConstraint& c, const Eigen::VectorXd& x, int serial) {
  double val = c.value(x);
  Eigen::VectorXd g = c.gradient(x);
  double gnorm = 0.0;
  LinearExpr row;
  double shift = 0.0;
  for (int i : c.support) {
    if (g[i] != 0.0) {
      row.add(i, g[i]);
      shift += g[i] * x[i];
      gnorm = std::max(gnorm, std::abs(g[i]));
    }
  }
  if (gnorm < 1e-14)
    throw std::runtime_error("make_cut: vanishing gradient at violated point of " + c.id);
  // value(x) + g.(y - x) <= rhs
  Cut cut;
  cut.row = std::move(row);
  cut.rhs = c.rhs - (val - shift);
  cut.label = "cut:" + c.id + ":" + std::to_string(serial);
  return cut;
}

std::pair<Solution, CutLog> solve_with_cuts(const CutProblem& problem, double tol, int max_iter) {
  ConvexProgram prog = problem.base;  // relaxation grows by cut rows
  CutLog log;
  std::vector<std::pair<std::string, std::string>> cut_owner;  // cut label -> constraint id
  int serial = 0;
  Solution sol;
  for (int it = 0; it < max_iter; ++it) {
    sol = solve(prog);
    if (sol.status == SolveStatus::IterationLimit) {
      // near-parallel cuts can leave the relaxation too degenerate for the
      // tightest settings; one retry a decade looser resolves it
      SolveSettings looser;
      looser.feastol = 1e-8;
      looser.abstol = 1e-8;
      looser.reltol = 1e-9;
      sol = solve(prog, looser);
    }
    if (sol.status != SolveStatus::Optimal) return {sol, log};
    CutIteration entry;
    entry.index = it;
    entry.objective = sol.objective_value;
    for (const auto& c : problem.constraints) {
      double v = c.value(sol.x);
      if (v > c.rhs + tol) {
        entry.violations.emplace_back(c.id, v);
        Cut cut = make_cut(c, sol.x, serial++);
        cut_owner.emplace_back(cut.label, c.id);
        prog.add_inequality(std::move(cut.row), cut.rhs, cut.label);
        ++entry.cuts_added;
      }
    }
    bool done = entry.cuts_added == 0;
    log.iterations.push_back(std::move(entry));
    if (done) {
      log.converged = true;
      // nu recovery: the exact constraint's multiplier is the sum of its cuts'
      for (const auto& c : problem.constraints) sol.duals_ineq["nl:" + c.id] = 0.0;
      for (const auto& [label, id] : cut_owner) {
        auto itd = sol.duals_ineq.find(label);
        if (itd != sol.duals_ineq.end()) sol.duals_ineq["nl:" + id] += itd->second;
      }
      return {sol, log};
    }
  }
  return {sol, log};  // iteration limit: best relaxation + violation report
}

}  // namespace windclear
