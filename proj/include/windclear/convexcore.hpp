#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace windclear {

// Sparse linear form sum coef_k * x[var_k] + constant.
struct LinearExpr {
  std::vector<std::pair<int, double>> terms;
  double constant = 0.0;

  LinearExpr& add(int var, double coef) {
    terms.emplace_back(var, coef);
    return *this;
  }
  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (auto [i, c] : terms) v += c * x[i];
    return v;
  }
};

struct Constraint {
  LinearExpr row;
  double rhs = 0.0;
  std::string label;
};

// || scale * (rows . x + consts) ||_2 <= bound . x + bound_const
struct SocBlock {
  double scale = 1.0;
  std::vector<LinearExpr> rows;
  LinearExpr bound;
  std::string label;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

struct Solution {
  SolveStatus status = SolveStatus::IterationLimit;
  Eigen::VectorXd x;  // primal, program variable order
  std::map<std::string, double> primal;
  // duals_eq[label] = d(optimal cost)/d(rhs) of that equality row.
  std::map<std::string, double> duals_eq;
  // duals_ineq[label] = KKT multiplier of the <= row (>= 0).
  std::map<std::string, double> duals_ineq;
  // per-SOC-block dual cone vector (z0, z1...).
  std::map<std::string, std::vector<double>> soc_duals;
  double objective_value = 0.0;
  double duality_gap = 0.0;  // relative
  int iterations = 0;
  // nonzero phase-1 elastic weight per row label when status == Infeasible
  std::map<std::string, double> infeasibility_certificate;
};

struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

class ConvexProgram {
 public:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  int add_variable(const std::string& name, double lb = -kInf, double ub = kInf);
  int variable(const std::string& name) const;
  int num_variables() const { return static_cast<int>(names_.size()); }
  const std::string& variable_name(int i) const { return names_[i]; }

  void add_quadratic(int var, double coef);          // coef * x^2, coef >= 0
  void add_quad_cross(int vi, int vj, double coef);  // coef * xi * xj
  void add_linear(int var, double coef);
  void add_constant(double c) { constant_ += c; }

  void add_equality(LinearExpr row, double rhs, const std::string& label);
  void add_inequality(LinearExpr row, double rhs, const std::string& label);  // row <= rhs
  void add_soc(SocBlock block);

  double objective_at(const Eigen::VectorXd& x) const;
  std::string dump() const;

  const std::vector<Constraint>& equalities() const { return eqs_; }
  const std::vector<Constraint>& inequalities() const { return ineqs_; }
  const std::vector<SocBlock>& soc_blocks() const { return socs_; }
  double lower_bound(int i) const { return lb_[i]; }
  double upper_bound(int i) const { return ub_[i]; }
  const std::map<int, double>& quad_diag() const { return quad_; }
  const std::vector<std::tuple<int, int, double>>& quad_cross() const { return cross_; }
  const std::map<int, double>& linear() const { return lin_; }
  double constant() const { return constant_; }

 private:
  void check_label(const std::string& label);

  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  std::vector<double> lb_, ub_;
  std::map<int, double> quad_;
  std::vector<std::tuple<int, int, double>> cross_;
  std::map<int, double> lin_;
  double constant_ = 0.0;
  std::vector<Constraint> eqs_, ineqs_;
  std::vector<SocBlock> socs_;
  std::map<std::string, int> labels_;
};

struct SolveSettings {
  double feastol = 1e-9;
  double abstol = 1e-9;
  double reltol = 1e-10;
  int max_iterations = 100;
};

// Dense primal-dual interior-point solve (Nesterov-Todd scaled, Mehrotra
// predictor-corrector). Deterministic: no randomized pivoting, fixed schedule.
Solution solve(const ConvexProgram& p, double tol = 1e-9);
Solution solve(const ConvexProgram& p, const SolveSettings& settings);

KktResiduals kkt_residuals(const ConvexProgram& p, const Solution& s);

}  // namespace windclear
