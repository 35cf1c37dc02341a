#pragma once

#include <map>
#include <optional>
#include <string>

#include "windclear/cuttingplane.hpp"
#include "windclear/model.hpp"

namespace windclear {

enum class ModelKind { CC, WCC, LDTCC, LDTWCC };

std::string model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& name);

class InfeasibleError : public std::runtime_error {
 public:
  explicit InfeasibleError(const std::string& what, std::map<std::string, double> cert = {})
      : std::runtime_error(what), certificate(std::move(cert)) {}
  std::map<std::string, double> certificate;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ClearingResult {
  ModelKind model = ModelKind::CC;
  std::vector<std::string> gen_ids;
  std::map<std::string, double> p;      // MW
  std::map<std::string, double> alpha;  // regular participation
  std::map<std::string, double> beta;   // extreme participation (LDT models)
  std::optional<double> omega_star;
  std::optional<double> omega_eps;
  double scheduled_cost = 0.0;
  // reporting convention: value = d(cost)/d(rhs); "balance", "reserve_reg",
  // "reserve_ext", "ext:<id>", "reg:<id>", bound rows "_lb:...".
  std::map<std::string, double> duals;
  std::map<std::string, double> cut_duals;  // aggregated nonlinear multipliers
  int cut_count = 0;
  std::map<std::string, double> lambda_star;
  double sigma = 0.0;
  double sigma_hat = 0.0;
  std::string anchor;  // extreme provider whose capacity equality carries no premium
  bool ldt_bound_ok = true;
  std::map<std::string, double> policy_jump;
  std::string case_hash;

  void validate(const SystemCase& c) const;
  std::string to_json() const;
  static ClearingResult from_json(const std::string& text);
};

// Expected scheduled cost of a candidate point under the quadratic cost model.
double expected_cost(const SystemCase& c, const std::map<std::string, double>& p,
                     const std::map<std::string, double>& alpha,
                     const std::map<std::string, double>& beta);

// sigma_hat_n = Phi^{-1}(1 - eps_n) * sigma_Omega
double sigma_hat(const Generator& g, double sigma);

// Omega* = sum p_max - (D - W_hat). Throws InfeasibleError when negative.
double derive_omega_star(const SystemCase& c);

ConvexProgram build_cc(const SystemCase& c);
CutProblem build_wcc(const SystemCase& c);
ConvexProgram build_ldtcc(const SystemCase& c);
CutProblem build_ldtwcc(const SystemCase& c, double omega_star, double omega_eps);

// Resolve the region boundary for the piecewise policy per case options.
double select_omega_eps(const SystemCase& c, double omega_star);

// The omitted extreme capacity equality leaves the equality duals defined only
// up to a one-parameter family; pin it so the marginal extreme provider's
// equality carries zero premium. `balance_labels` lists every energy balance
// row the shift touches (one per node on network programs).
void rebase_extreme_duals(ClearingResult& r, const SystemCase& c, double omega_star,
                          const std::vector<std::string>& balance_labels);

ClearingResult clear(const SystemCase& c, ModelKind kind);

}  // namespace windclear
