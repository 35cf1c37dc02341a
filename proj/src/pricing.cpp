#include "windclear/pricing.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "windclear/probkit.hpp"

namespace windclear {

namespace {

constexpr double kActTol = 1e-6;  // activity threshold for interior checks

double dual_or_zero(const std::map<std::string, double>& d, const std::string& k) {
  auto it = d.find(k);
  return it == d.end() ? 0.0 : it->second;
}

void check_close(double a, double b, double rel, const std::string& what) {
  if (std::abs(a - b) > rel * std::max({1.0, std::abs(a), std::abs(b)}))
    throw std::runtime_error("stale or inconsistent duals: " + what + " formula gives " +
                             std::to_string(b) + " but dual is " + std::to_string(a));
}

// Rebuild the nonlinear capacity constraints to evaluate Prop.-2 style
// stationarity terms at the dispatched point.
std::map<std::string, Eigen::VectorXd> wcc_gradients(const ClearingResult& r, const SystemCase& c,
                                                     Eigen::VectorXd& x) {
  CutProblem cp = r.model == ModelKind::WCC
                      ? build_wcc(c)
                      : build_ldtwcc(c, *r.omega_star, *r.omega_eps);
  int n = static_cast<int>(c.generators.size());
  x = Eigen::VectorXd::Zero(cp.base.num_variables());
  for (int i = 0; i < n; ++i) {
    const auto& id = c.generators[i].id;
    x[i] = r.p.at(id);
    x[n + i] = r.alpha.at(id);
    if (!r.beta.empty()) x[2 * n + i] = r.beta.at(id);
  }
  std::map<std::string, Eigen::VectorXd> grads;
  for (const auto& nc : cp.constraints) grads[nc.id] = nc.gradient(x);
  return grads;
}

}  // namespace

double PriceSet::energy_price_at(const std::string& node) const {
  if (pi) return *pi;
  auto it = lmp.find(node);
  if (it == lmp.end()) throw std::invalid_argument("no energy price for node '" + node + "'");
  return it->second;
}

PriceSet extract_prices(const ClearingResult& r, const SystemCase& c) {
  PriceSet ps;
  if (r.duals.count("balance")) {
    ps.pi = r.duals.at("balance");
  } else {
    for (const auto& [k, v] : r.duals)
      if (k.rfind("balance:", 0) == 0) ps.lmp[k.substr(8)] = v;
    if (ps.lmp.empty()) throw std::runtime_error("result carries no balance dual");
  }
  ps.rho = r.duals.count("reserve_reg") ? r.duals.at("reserve_reg")
                                        : dual_or_zero(r.duals, "reserve");
  if (r.duals.count("reserve_ext")) ps.chi = r.duals.at("reserve_ext");

  double sigma = r.sigma;
  int n = static_cast<int>(c.generators.size());

  // Stationarity cross-check on generators interior in the relevant variable.
  if (r.model == ModelKind::CC || r.model == ModelKind::LDTCC) {
    for (int i = 0; i < n; ++i) {
      const auto& g = c.generators[i];
      double pv = r.p.at(g.id), av = r.alpha.at(g.id);
      double sh = sigma_hat(g, sigma);
      double delta = dual_or_zero(r.duals, "reg:" + g.id);
      double mu = r.model == ModelKind::LDTCC ? -dual_or_zero(r.duals, "ext:" + g.id) : 0.0;
      double pi_g = ps.energy_price_at(g.node);
      if (pv > kActTol) check_close(pi_g, 2 * g.c2 * pv + g.c1 + mu + delta, 1e-4, "pi@" + g.id);
      if (av > kActTol)
        check_close(ps.rho, 2 * g.c2 * sigma * sigma * av + (mu + delta) * sh, 1e-4, "rho@" + g.id);
      if (!r.beta.empty() && r.beta.at(g.id) > kActTol && r.omega_star)
        check_close(*ps.chi, g.c_beta + mu * (*r.omega_star - sh), 1e-4, "chi@" + g.id);
    }
  } else {
    Eigen::VectorXd x;
    auto grads = wcc_gradients(r, c, x);
    std::string tag = r.model == ModelKind::WCC ? "wcc:" : "ldtwcc:";
    for (int i = 0; i < n; ++i) {
      const auto& g = c.generators[i];
      double pv = r.p.at(g.id), av = r.alpha.at(g.id);
      double nu_max = dual_or_zero(r.cut_duals, "nl:" + tag + g.id + ":max");
      double nu_min = dual_or_zero(r.cut_duals, "nl:" + tag + g.id + ":min");
      double det = dual_or_zero(r.duals, "det:" + g.id);
      Eigen::VectorXd gmax = grads.count(tag + g.id + ":max")
                                 ? grads.at(tag + g.id + ":max")
                                 : Eigen::VectorXd::Zero(x.size());
      Eigen::VectorXd gmin = grads.count(tag + g.id + ":min")
                                 ? grads.at(tag + g.id + ":min")
                                 : Eigen::VectorXd::Zero(x.size());
      double pi_g = ps.energy_price_at(g.node);
      if (pv > kActTol && det < kActTol)
        check_close(pi_g, 2 * g.c2 * pv + g.c1 + nu_max * gmax[i] + nu_min * gmin[i], 1e-4,
                    "pi@" + g.id);
      if (av > kActTol)
        check_close(ps.rho,
                    2 * g.c2 * sigma * sigma * av + nu_max * gmax[n + i] + nu_min * gmin[n + i],
                    1e-4, "rho@" + g.id);
      if (!r.beta.empty() && r.beta.at(g.id) > kActTol)
        check_close(*ps.chi, g.c_beta + nu_max * gmax[2 * n + i] + nu_min * gmin[2 * n + i], 1e-4,
                    "chi@" + g.id);
    }
  }
  return ps;
}

PriceSet closed_form_prices_ldtcc(const ClearingResult& r, const SystemCase& c) {
  if (r.model != ModelKind::LDTCC)
    throw std::invalid_argument("closed_form_prices_ldtcc: not an LDT-CC result");
  double sigma = r.sigma;
  double omega_star = *r.omega_star;
  double inv_sum = 0.0, num_pi = 0.0, inv_sum_a = 0.0, num_rho = 0.0;
  double net = c.demand() - aggregate_wind(c).forecast;
  for (const auto& g : c.generators) {
    if (!(g.c2 > 0)) throw std::domain_error("closed form requires c2 > 0 for every generator");
    double mu = -dual_or_zero(r.duals, "ext:" + g.id);
    double delta = dual_or_zero(r.duals, "reg:" + g.id);
    double lam_p = dual_or_zero(r.duals, "_lb:p:" + g.id);
    double lam_a = dual_or_zero(r.duals, "_lb:a:" + g.id);
    double sh = sigma_hat(g, sigma);
    inv_sum += 1.0 / (2 * g.c2);
    num_pi += (g.c1 + mu + delta - lam_p) / (2 * g.c2);
    inv_sum_a += 1.0 / (2 * g.c2 * sigma * sigma);
    num_rho += ((mu + delta) * sh - lam_a) / (2 * g.c2 * sigma * sigma);
  }
  PriceSet ps;
  ps.pi = (net + num_pi) / inv_sum;
  ps.rho = (1.0 + num_rho) / inv_sum_a;
  // chi at the providers of extreme reserve; the per-provider expressions must
  // agree at the optimum
  std::optional<double> chi;
  for (const auto& g : c.generators) {
    if (r.beta.at(g.id) <= kActTol) continue;
    double mu = -dual_or_zero(r.duals, "ext:" + g.id);
    double val = g.c_beta + mu * (omega_star - sigma_hat(g, sigma));
    if (chi && std::abs(val - *chi) > 1e-3 * std::max(1.0, std::abs(*chi)))
      throw std::runtime_error("chi expressions disagree across providers");
    chi = chi ? std::max(*chi, val) : val;
  }
  ps.chi = chi;
  return ps;
}

Settlement settle(const ClearingResult& r, const PriceSet& prices, const SystemCase& c) {
  Settlement s;
  double sigma = r.sigma;
  double gamma_total = 0.0;
  for (const auto& g : c.generators) {
    ProducerAccount acc;
    acc.id = g.id;
    double pv = r.p.at(g.id), av = r.alpha.at(g.id);
    double bv = r.beta.empty() ? 0.0 : r.beta.at(g.id);
    double chi = prices.chi.value_or(0.0);
    acc.revenue = prices.energy_price_at(g.node) * pv + prices.rho * av + chi * bv;
    acc.cost = g.c1 * pv + g.c2 * (pv * pv + sigma * sigma * av * av) + g.c_beta * bv;
    acc.profit = acc.revenue - acc.cost;
    gamma_total += acc.revenue;
    s.producers.push_back(acc);
  }
  double energy_payment = 0.0, wind_credit = 0.0;
  if (prices.pi) {
    energy_payment = *prices.pi * c.demand();
    wind_credit = *prices.pi * aggregate_wind(c).forecast;
  } else {
    for (const auto& nd : c.network->nodes) energy_payment += prices.lmp.at(nd.id) * nd.demand;
    for (const auto& w : c.wind) wind_credit += prices.lmp.at(w.node) * w.forecast;
  }
  s.consumer_payment = energy_payment - wind_credit;
  s.deficit = std::max(0.0, gamma_total - s.consumer_payment);
  return s;
}

EquilibriumReport verify_equilibrium(const ClearingResult& r, const PriceSet& prices,
                                     const SystemCase& c, double tol) {
  EquilibriumReport rep;
  double sigma = r.sigma;
  for (const auto& g : c.generators) {
    double pi_g = prices.energy_price_at(g.node);
    double chi = prices.chi.value_or(0.0);
    double pv = r.p.at(g.id), av = r.alpha.at(g.id);
    double bv = r.beta.empty() ? 0.0 : r.beta.at(g.id);
    double central =
        pi_g * pv + prices.rho * av + chi * bv -
        (g.c1 * pv + g.c2 * (pv * pv + sigma * sigma * av * av) + g.c_beta * bv);

    // producer's own problem: maximize profit at posted prices subject to its
    // private constraint set (minimize the negated profit)
    bool with_beta = !r.beta.empty();
    ConvexProgram prog;
    int ip = prog.add_variable("p", 0.0);
    int ia = prog.add_variable("a", 0.0);
    int ib = with_beta ? prog.add_variable("b", 0.0) : -1;
    prog.add_quadratic(ip, g.c2);
    prog.add_quadratic(ia, g.c2 * sigma * sigma);
    prog.add_linear(ip, g.c1 - pi_g);
    prog.add_linear(ia, -prices.rho);
    if (with_beta) prog.add_linear(ib, g.c_beta - chi);
    double sh = sigma_hat(g, sigma);

    double best;
    if (r.model == ModelKind::CC || r.model == ModelKind::LDTCC) {
      LinearExpr reg;
      reg.add(ip, 1.0).add(ia, sh);
      prog.add_inequality(std::move(reg), g.p_max, "reg");
      if (c.options.enforce_min_side) {
        LinearExpr mrow;
        mrow.add(ip, -1.0).add(ia, sh);
        prog.add_inequality(std::move(mrow), -g.p_min, "reg_min");
      }
      if (r.model == ModelKind::LDTCC) {
        LinearExpr ext;
        ext.add(ip, 1.0).add(ia, sh).add(ib, *r.omega_star - sh);
        prog.add_equality(std::move(ext), g.p_max, "ext");
        // fixed lambda* pins the provider's extreme share
        auto it = r.lambda_star.find(g.id);
        if (it != r.lambda_star.end()) {
          LinearExpr pin;
          pin.add(ib, 1.0);
          prog.add_equality(std::move(pin), *r.omega_star / (sigma * sigma * it->second), "pin");
        }
      }
      Solution sol = solve(prog);
      if (sol.status != SolveStatus::Optimal)
        throw ConvergenceError("producer problem failed for " + g.id);
      best = -sol.objective_value;
    } else {
      CutProblem cp;
      cp.base = prog;
      LinearExpr det;
      det.add(ip, 1.0);
      cp.base.add_inequality(std::move(det), g.p_max, "det");
      SystemCase single = c;
      single.generators = {g};
      CutProblem tmpl = r.model == ModelKind::WCC
                            ? build_wcc(single)
                            : build_ldtwcc(single, *r.omega_star, *r.omega_eps);
      for (auto& nc : tmpl.constraints) cp.constraints.push_back(nc);  // same layout: p,a[,b]
      auto [sol, log] = solve_with_cuts(cp, c.options.cut_tolerance, c.options.max_cut_iterations);
      if (sol.status != SolveStatus::Optimal || !log.converged)
        throw ConvergenceError("producer problem failed for " + g.id);
      best = -sol.objective_value;
    }
    EquilibriumEntry e;
    e.id = g.id;
    e.central_profit = central;
    e.best_response_profit = best;
    e.gap = best - central;
    rep.max_gap = std::max(rep.max_gap, e.gap);
    rep.producers.push_back(e);
  }
  rep.ok = rep.max_gap <= tol;
  return rep;
}

std::string settlement_csv(const Settlement& s) {
  std::ostringstream os;
  os << "producer,revenue,cost,profit\n";
  char buf[160];
  for (const auto& a : s.producers) {
    std::snprintf(buf, sizeof(buf), "%s,%.2f,%.2f,%.2f\n", a.id.c_str(), a.revenue, a.cost,
                  a.profit);
    os << buf;
  }
  return os.str();
}

std::string prices_json(const PriceSet& p) {
  nlohmann::json j;
  if (p.pi) j["pi"] = *p.pi;
  if (!p.lmp.empty()) j["lmp"] = p.lmp;
  j["rho"] = p.rho;
  if (p.chi) j["chi"] = *p.chi;
  return j.dump(2);
}

}  // namespace windclear
