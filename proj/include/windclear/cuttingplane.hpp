#pragma once

#include <functional>
#include <string>
#include <vector>

#include "windclear/convexcore.hpp"

namespace windclear {

// Convex scalar constraint value(x) <= rhs handled by outer linearization.
// value/gradient take the full primal vector; support lists the variable
// indices with nonzero gradient entries (cut rows touch only those).
struct NonlinearConstraint {
  std::string id;
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;  // dense, full length
  double rhs = 0.0;
  std::vector<int> support;
};

struct CutProblem {
  ConvexProgram base;
  std::vector<NonlinearConstraint> constraints;
};

struct CutIteration {
  int index = 0;
  std::vector<std::pair<std::string, double>> violations;  // constraint id -> value
  int cuts_added = 0;
  double objective = 0.0;
};

struct CutLog {
  std::vector<CutIteration> iterations;
  bool converged = false;
  std::string to_json() const;
};

struct Cut {
  LinearExpr row;
  double rhs;
  std::string label;
};

// First-order cut of `c` at point x (spec: value(x) > rhs). Throws
// std::runtime_error on a vanishing gradient at a violated point.
Cut make_cut(const NonlinearConstraint& c, const Eigen::VectorXd& x, int serial);

// Outer-approximation loop. On success the returned Solution additionally
// carries aggregated multipliers of each nonlinear constraint's active cuts
// under duals_ineq["nl:" + id].
std::pair<Solution, CutLog> solve_with_cuts(const CutProblem& problem, double tol, int max_iter);

}  // namespace windclear
