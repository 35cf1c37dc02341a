#include "windclear/formulations.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "windclear/probkit.hpp"

namespace windclear {

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::CC: return "cc";
    case ModelKind::WCC: return "wcc";
    case ModelKind::LDTCC: return "ldt-cc";
    case ModelKind::LDTWCC: return "ldt-wcc";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "cc") return ModelKind::CC;
  if (name == "wcc") return ModelKind::WCC;
  if (name == "ldt-cc" || name == "ldtcc") return ModelKind::LDTCC;
  if (name == "ldt-wcc" || name == "ldtwcc") return ModelKind::LDTWCC;
  throw std::invalid_argument("unknown model kind: " + name);
}

double sigma_hat(const Generator& g, double sigma) {
  return normal_quantile(1.0 - g.epsilon) * sigma;
}

double expected_cost(const SystemCase& c, const std::map<std::string, double>& p,
                     const std::map<std::string, double>& alpha,
                     const std::map<std::string, double>& beta) {
  double sigma = aggregate_wind(c).std;
  double total = 0.0;
  for (const auto& g : c.generators) {
    double pv = p.count(g.id) ? p.at(g.id) : 0.0;
    double av = alpha.count(g.id) ? alpha.at(g.id) : 0.0;
    total += g.c2 * (pv * pv + sigma * sigma * av * av) + g.c1 * pv;
    if (beta.count(g.id)) total += g.c_beta * beta.at(g.id);
  }
  return total;
}

double derive_omega_star(const SystemCase& c) {
  double cap = 0.0;
  for (const auto& g : c.generators) cap += g.p_max;
  double net = c.demand() - aggregate_wind(c).forecast;
  double omega = cap - net;
  if (omega < 0)
    throw InfeasibleError("aggregate infeasibility: net demand exceeds total capacity");
  return omega;
}

double select_omega_eps(const SystemCase& c, double omega_star) {
  double sigma = aggregate_wind(c).std;
  double oe;
  if (c.options.omega_eps_rule == OmegaEpsRule::FractionOfOmegaStar) {
    oe = c.options.omega_eps_fraction * omega_star;
  } else {
    // regular-coverage boundary; epsilon is uniform across the bundled cases,
    // take the max so the boundary covers every generator's regular band
    double z = 0.0;
    for (const auto& g : c.generators) z = std::max(z, normal_quantile(1.0 - g.epsilon));
    oe = z * sigma;
  }
  if (!(oe < omega_star))
    throw std::invalid_argument("omega_eps must lie strictly below omega_star");
  return oe;
}

namespace {

constexpr double kTieBreak = 1e-9;

struct VarLayout {
  int n = 0;
  bool has_beta = false;
  int p(int i) const { return i; }
  int a(int i) const { return n + i; }
  int b(int i) const { return 2 * n + i; }
};

VarLayout add_dispatch_vars(ConvexProgram& prog, const SystemCase& c, bool with_beta) {
  VarLayout L;
  L.n = static_cast<int>(c.generators.size());
  L.has_beta = with_beta;
  double sigma = aggregate_wind(c).std;
  for (const auto& g : c.generators) prog.add_variable("p:" + g.id, 0.0);
  for (const auto& g : c.generators) prog.add_variable("a:" + g.id, 0.0);
  if (with_beta)
    for (const auto& g : c.generators) prog.add_variable("b:" + g.id, 0.0);
  for (int i = 0; i < L.n; ++i) {
    const auto& g = c.generators[i];
    prog.add_quadratic(L.p(i), g.c2);
    prog.add_linear(L.p(i), g.c1);
    prog.add_quadratic(L.a(i), g.c2 * sigma * sigma);
    prog.add_linear(L.a(i), kTieBreak * (i + 1));
    if (with_beta) {
      prog.add_linear(L.b(i), g.c_beta + kTieBreak * (i + 1));
    }
  }
  return L;
}

void add_balance_rows(ConvexProgram& prog, const SystemCase& c, const VarLayout& L,
                      bool include_energy_balance) {
  if (include_energy_balance) {
    LinearExpr bal;
    for (int i = 0; i < L.n; ++i) bal.add(L.p(i), 1.0);
    prog.add_equality(std::move(bal), c.demand() - aggregate_wind(c).forecast, "balance");
  }
  LinearExpr ra;
  for (int i = 0; i < L.n; ++i) ra.add(L.a(i), 1.0);
  prog.add_equality(std::move(ra), 1.0, L.has_beta ? "reserve_reg" : "reserve");
  if (L.has_beta) {
    LinearExpr rb;
    for (int i = 0; i < L.n; ++i) rb.add(L.b(i), 1.0);
    prog.add_equality(std::move(rb), 1.0, "reserve_ext");
  }
}

}  // namespace

ConvexProgram build_cc(const SystemCase& c) {
  ConvexProgram prog;
  VarLayout L = add_dispatch_vars(prog, c, false);
  add_balance_rows(prog, c, L, true);
  double sigma = aggregate_wind(c).std;
  for (int i = 0; i < L.n; ++i) {
    const auto& g = c.generators[i];
    double sh = sigma_hat(g, sigma);
    LinearExpr row;
    row.add(L.p(i), 1.0).add(L.a(i), sh);
    prog.add_inequality(std::move(row), g.p_max, "reg:" + g.id);
    if (c.options.enforce_min_side) {
      LinearExpr mrow;
      mrow.add(L.p(i), -1.0).add(L.a(i), sh);
      prog.add_inequality(std::move(mrow), -g.p_min, "reg_min:" + g.id);
    }
  }
  return prog;
}

ConvexProgram build_ldtcc(const SystemCase& c) {
  ConvexProgram prog;
  VarLayout L = add_dispatch_vars(prog, c, true);
  double sigma = aggregate_wind(c).std;
  if (!(sigma > 0)) throw std::invalid_argument("LDT models require sigma > 0");
  double omega_star = derive_omega_star(c);
  // Summing the per-generator extreme equalities with both reserve balances
  // reproduces the energy balance, so the last generator's row is implied and
  // omitted; its capacity-equality premium is the dual anchor.
  add_balance_rows(prog, c, L, true);
  for (int i = 0; i < L.n; ++i) {
    const auto& g = c.generators[i];
    double sh = sigma_hat(g, sigma);
    if (i + 1 < L.n) {
      LinearExpr ext;
      ext.add(L.p(i), 1.0).add(L.a(i), sh).add(L.b(i), omega_star - sh);
      prog.add_equality(std::move(ext), g.p_max, "ext:" + g.id);
    }
    LinearExpr reg;
    reg.add(L.p(i), 1.0).add(L.a(i), sh);
    prog.add_inequality(std::move(reg), g.p_max, "reg:" + g.id);
    if (c.options.enforce_min_side) {
      LinearExpr mrow;
      mrow.add(L.p(i), -1.0).add(L.a(i), sh);
      prog.add_inequality(std::move(mrow), -g.p_min, "reg_min:" + g.id);
    }
  }
  return prog;
}

namespace {

// Truncated-expectation capacity constraint pieces. The conditional moments
// are taken at the dominant point's standardized coordinate; the two policy
// regions are weighted by their probability mass at the boundary Omega_eps.
struct WccTerm {
  double w = 1.0;       // region probability
  double base = 0.0;    // p-free part of mu~ (limit and policy constants)
  double p_sign = 1.0;  // +1 max side, -1 min side
  double a_mu = 0.0;    // d mu~ / d alpha
  double b_mu = 0.0;    // d mu~ / d beta
  double a_sig = 0.0;   // sigma~ = |a_sig*alpha + b_sig*beta|
  double b_sig = 0.0;

  double mu(double pv, double av, double bv) const {
    return p_sign * pv + base + a_mu * av + b_mu * bv;
  }
  double sig(double av, double bv) const { return std::abs(a_sig * av + b_sig * bv); }
};

struct DG {
  double gm, gs;  // dg/dmu = Phi(m), dg/dsigma = phi(m)
};

DG dg_at(double mu, double sig) {
  if (sig <= 1e-300) return {mu > 0 ? 1.0 : 0.0, 0.0};
  double m = mu / sig;
  return {normal_cdf(m), normal_pdf(m)};
}

NonlinearConstraint make_wcc_constraint(std::string id, std::vector<WccTerm> terms, double rhs,
                                        int pi, int ai, int bi) {
  NonlinearConstraint nc;
  nc.id = std::move(id);
  nc.rhs = rhs;
  nc.support = {pi, ai};
  if (bi >= 0) nc.support.push_back(bi);
  nc.value = [terms, pi, ai, bi](const Eigen::VectorXd& x) {
    double pv = x[pi], av = x[ai], bv = bi >= 0 ? x[bi] : 0.0;
    double v = 0.0;
    for (const auto& t : terms) v += t.w * expected_overload(t.mu(pv, av, bv), t.sig(av, bv));
    return v;
  };
  nc.gradient = [terms, pi, ai, bi](const Eigen::VectorXd& x) {
    double pv = x[pi], av = x[ai], bv = bi >= 0 ? x[bi] : 0.0;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (const auto& t : terms) {
      double inner = t.a_sig * av + t.b_sig * bv;
      double sgn = inner > 0 ? 1.0 : (inner < 0 ? -1.0 : 0.0);
      DG d = dg_at(t.mu(pv, av, bv), t.sig(av, bv));
      g[pi] += t.w * d.gm * t.p_sign;
      g[ai] += t.w * (d.gm * t.a_mu + d.gs * sgn * t.a_sig);
      if (bi >= 0) g[bi] += t.w * (d.gm * t.b_mu + d.gs * sgn * t.b_sig);
    }
    return g;
  };
  return nc;
}

}  // namespace

CutProblem build_wcc(const SystemCase& c) {
  CutProblem cp;
  VarLayout L = add_dispatch_vars(cp.base, c, false);
  add_balance_rows(cp.base, c, L, true);
  double sigma = aggregate_wind(c).std;
  for (int i = 0; i < L.n; ++i) {
    const auto& g = c.generators[i];
    LinearExpr det;
    det.add(L.p(i), 1.0);
    cp.base.add_inequality(std::move(det), g.p_max, "det:" + g.id);
    WccTerm max_t;
    max_t.base = -g.p_max;
    max_t.a_sig = sigma;
    cp.constraints.push_back(
        make_wcc_constraint("wcc:" + g.id + ":max", {max_t}, g.epsilon, L.p(i), L.a(i), -1));
    if (c.options.enforce_min_side) {
      WccTerm min_t;
      min_t.base = g.p_min;
      min_t.p_sign = -1.0;
      min_t.a_sig = sigma;
      cp.constraints.push_back(
          make_wcc_constraint("wcc:" + g.id + ":min", {min_t}, g.epsilon, L.p(i), L.a(i), -1));
    }
  }
  return cp;
}

CutProblem build_ldtwcc(const SystemCase& c, double omega_star, double omega_eps) {
  if (!(omega_eps < omega_star))
    throw std::invalid_argument("build_ldtwcc: omega_eps must lie below omega_star");
  CutProblem cp;
  VarLayout L = add_dispatch_vars(cp.base, c, true);
  add_balance_rows(cp.base, c, L, true);
  double sigma = aggregate_wind(c).std;
  if (!(sigma > 0)) throw std::invalid_argument("LDT models require sigma > 0");
  double zs = omega_star / sigma;
  double hb = normal_hazard_lower(zs);
  double ha = normal_hazard_upper(zs);
  double vb = std::sqrt(std::max(1.0 - zs * hb - hb * hb, 0.0));
  double va = std::sqrt(std::max(1.0 + zs * ha - ha * ha, 0.0));
  double wb = normal_cdf(omega_eps / sigma);
  double wa = 1.0 - wb;

  for (int i = 0; i < L.n; ++i) {
    const auto& g = c.generators[i];
    LinearExpr det;
    det.add(L.p(i), 1.0);
    cp.base.add_inequality(std::move(det), g.p_max, "det:" + g.id);

    WccTerm below;  // regular-policy region
    below.w = wb;
    below.base = -g.p_max;
    below.a_mu = -sigma * hb;
    below.a_sig = sigma * vb;
    WccTerm above;  // extreme-policy region: shift beta*Omega*, slope alpha-beta
    above.w = wa;
    above.base = -g.p_max;
    above.a_mu = sigma * ha;
    above.b_mu = omega_star - sigma * ha;
    above.a_sig = sigma * va;
    above.b_sig = -sigma * va;
    cp.constraints.push_back(make_wcc_constraint("ldtwcc:" + g.id + ":max", {below, above},
                                                 g.epsilon, L.p(i), L.a(i), L.b(i)));
    if (c.options.enforce_min_side) {
      WccTerm mbelow = below, mabove = above;
      mbelow.base = g.p_min;
      mbelow.p_sign = -1.0;
      mabove.base = g.p_min;
      mabove.p_sign = -1.0;
      cp.constraints.push_back(make_wcc_constraint("ldtwcc:" + g.id + ":min", {mbelow, mabove},
                                                   g.epsilon, L.p(i), L.a(i), L.b(i)));
    }
  }
  return cp;
}

void ClearingResult::validate(const SystemCase& c) const {
  double net = c.demand() - aggregate_wind(c).forecast;
  double sp = 0, sa = 0, sb = 0;
  for (const auto& g : c.generators) {
    sp += p.at(g.id);
    sa += alpha.at(g.id);
    if (!beta.empty()) sb += beta.at(g.id);
  }
  double scale = std::max(1.0, std::abs(net));
  if (std::abs(sp - net) > 1e-8 * scale)
    throw std::logic_error("clearing result violates the energy balance");
  if (std::abs(sa - 1.0) > 1e-8)
    throw std::logic_error("clearing result violates the regular reserve balance");
  if (!beta.empty() && std::abs(sb - 1.0) > 1e-8)
    throw std::logic_error("clearing result violates the extreme reserve balance");
  double ec = expected_cost(c, p, alpha, beta);
  if (std::abs(ec - scheduled_cost) > 1e-8 * std::max(1.0, std::abs(ec)))
    throw std::logic_error("scheduled cost does not match the cost model");
}

namespace {

ClearingResult extract_result(const SystemCase& c, ModelKind kind, const Solution& sol,
                              bool with_beta) {
  ClearingResult r;
  r.model = kind;
  r.case_hash = case_hash_hex(c);
  auto agg = aggregate_wind(c);
  r.sigma = agg.std;
  for (const auto& g : c.generators) {
    r.gen_ids.push_back(g.id);
    r.p[g.id] = sol.primal.at("p:" + g.id);
    r.alpha[g.id] = sol.primal.at("a:" + g.id);
    if (with_beta) r.beta[g.id] = sol.primal.at("b:" + g.id);
    r.sigma_hat = std::max(r.sigma_hat, sigma_hat(g, agg.std));
  }
  r.duals = sol.duals_eq;
  for (const auto& [label, v] : sol.duals_ineq) {
    if (label.rfind("nl:", 0) == 0)
      r.cut_duals[label] = v;
    else
      r.duals[label] = v;
  }
  r.scheduled_cost = expected_cost(c, r.p, r.alpha, r.beta);
  return r;
}

}  // namespace

// Shift so the marginal extreme provider (largest c_beta among active
// providers) carries zero capacity-equality premium.
void rebase_extreme_duals(ClearingResult& r, const SystemCase& c, double omega_star,
                          const std::vector<std::string>& balance_labels) {
  double sigma = aggregate_wind(c).std;
  const Generator* anchor = nullptr;
  for (const auto& g : c.generators) {
    if (r.beta.at(g.id) > 1e-6 && (!anchor || g.c_beta >= anchor->c_beta)) anchor = &g;
  }
  if (!anchor) return;
  r.anchor = anchor->id;
  // KKT multiplier of an ext row = -reported dual; the dropped row has mu = 0.
  auto mu_of = [&](const std::string& id) {
    auto it = r.duals.find("ext:" + id);
    return it == r.duals.end() ? 0.0 : -it->second;
  };
  double t = -mu_of(anchor->id);
  for (const auto& g : c.generators) r.duals["ext:" + g.id] = -(mu_of(g.id) + t);
  for (const auto& bl : balance_labels) r.duals[bl] += t;
  double sh_anchor = sigma_hat(*anchor, sigma);
  r.duals["reserve_reg"] += sh_anchor * t;
  r.duals["reserve_ext"] += (omega_star - sh_anchor) * t;
}

namespace {

void recover_lambda_star(ClearingResult& r, double omega_star, double sigma) {
  for (const auto& [id, bv] : r.beta) {
    if (bv > 1e-6) r.lambda_star[id] = omega_star / (sigma * sigma * bv);
  }
}

}  // namespace

ClearingResult clear(const SystemCase& c, ModelKind kind) {
  c.validate();
  if (c.wind.empty()) throw std::invalid_argument("no uncertainty to balance: case has no wind");
  auto agg = aggregate_wind(c);

  auto run_plain = [&](const ConvexProgram& prog) {
    Solution sol = solve(prog);
    if (sol.status == SolveStatus::Infeasible)
      throw InfeasibleError("market clearing is infeasible", sol.infeasibility_certificate);
    if (sol.status != SolveStatus::Optimal)
      throw ConvergenceError("solver hit the iteration limit");
    return sol;
  };
  auto run_cuts = [&](const CutProblem& cp) {
    auto [sol, log] = solve_with_cuts(cp, c.options.cut_tolerance, c.options.max_cut_iterations);
    if (sol.status == SolveStatus::Infeasible)
      throw InfeasibleError("market clearing is infeasible", sol.infeasibility_certificate);
    if (sol.status != SolveStatus::Optimal || !log.converged)
      throw ConvergenceError("cutting-plane loop did not converge");
    return std::make_pair(sol, log);
  };

  switch (kind) {
    case ModelKind::CC: {
      ClearingResult r = extract_result(c, kind, run_plain(build_cc(c)), false);
      r.validate(c);
      return r;
    }
    case ModelKind::WCC: {
      auto [sol, log] = run_cuts(build_wcc(c));
      ClearingResult r = extract_result(c, kind, sol, false);
      r.cut_count = static_cast<int>(log.iterations.size());
      r.validate(c);
      return r;
    }
    case ModelKind::LDTCC: {
      double omega_star = derive_omega_star(c);
      ClearingResult r = extract_result(c, kind, run_plain(build_ldtcc(c)), true);
      r.omega_star = omega_star;
      r.omega_eps = agg.std > 0 ? std::min(r.sigma_hat, omega_star) : 0.0;
      double zext = 0.0;
      for (const auto& g : c.generators) zext = std::max(zext, normal_quantile(1.0 - g.epsilon_ext));
      r.ldt_bound_ok = agg.std > 0 && omega_star / agg.std >= zext;
      rebase_extreme_duals(r, c, omega_star, {"balance"});
      recover_lambda_star(r, omega_star, agg.std);
      for (const auto& g : c.generators) r.policy_jump[g.id] = 0.0;
      r.validate(c);
      return r;
    }
    case ModelKind::LDTWCC: {
      double omega_star = derive_omega_star(c);
      double omega_eps = select_omega_eps(c, omega_star);
      auto [sol, log] = run_cuts(build_ldtwcc(c, omega_star, omega_eps));
      ClearingResult r = extract_result(c, kind, sol, true);
      r.omega_star = omega_star;
      r.omega_eps = omega_eps;
      r.cut_count = static_cast<int>(log.iterations.size());
      recover_lambda_star(r, omega_star, agg.std);
      for (const auto& g : c.generators)
        r.policy_jump[g.id] = r.beta.at(g.id) * (omega_star - omega_eps);
      r.validate(c);
      return r;
    }
  }
  throw std::logic_error("unreachable");
}

std::string ClearingResult::to_json() const {
  nlohmann::json j;
  j["model"] = model_kind_name(model);
  j["generators"] = gen_ids;
  j["p"] = p;
  j["alpha"] = alpha;
  if (!beta.empty()) j["beta"] = beta;
  if (omega_star) j["omega_star"] = *omega_star;
  if (omega_eps) j["omega_eps"] = *omega_eps;
  j["scheduled_cost"] = scheduled_cost;
  j["duals"] = duals;
  if (!cut_duals.empty()) j["cut_duals"] = cut_duals;
  j["cut_count"] = cut_count;
  if (!lambda_star.empty()) j["lambda_star"] = lambda_star;
  j["sigma"] = sigma;
  j["sigma_hat"] = sigma_hat;
  if (!anchor.empty()) j["anchor"] = anchor;
  j["ldt_bound_ok"] = ldt_bound_ok;
  if (!policy_jump.empty()) j["policy_jump"] = policy_jump;
  j["case_hash"] = case_hash;
  return j.dump(2);
}

ClearingResult ClearingResult::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ClearingResult r;
  r.model = parse_model_kind(j.at("model").get<std::string>());
  r.gen_ids = j.at("generators").get<std::vector<std::string>>();
  r.p = j.at("p").get<std::map<std::string, double>>();
  r.alpha = j.at("alpha").get<std::map<std::string, double>>();
  if (j.contains("beta")) r.beta = j["beta"].get<std::map<std::string, double>>();
  if (j.contains("omega_star")) r.omega_star = j["omega_star"].get<double>();
  if (j.contains("omega_eps")) r.omega_eps = j["omega_eps"].get<double>();
  r.scheduled_cost = j.at("scheduled_cost").get<double>();
  r.duals = j.at("duals").get<std::map<std::string, double>>();
  if (j.contains("cut_duals")) r.cut_duals = j["cut_duals"].get<std::map<std::string, double>>();
  r.cut_count = j.value("cut_count", 0);
  if (j.contains("lambda_star")) r.lambda_star = j["lambda_star"].get<std::map<std::string, double>>();
  r.sigma = j.value("sigma", 0.0);
  r.sigma_hat = j.value("sigma_hat", 0.0);
  r.anchor = j.value("anchor", std::string());
  r.ldt_bound_ok = j.value("ldt_bound_ok", true);
  if (j.contains("policy_jump")) r.policy_jump = j["policy_jump"].get<std::map<std::string, double>>();
  r.case_hash = j.value("case_hash", std::string());
  return r;
}

}  // namespace windclear
