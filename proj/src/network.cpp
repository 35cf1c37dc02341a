#include "windclear/network.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "windclear/probkit.hpp"

namespace windclear {

std::string line_key(const NetworkLine& l) { return l.from + "->" + l.to; }

namespace {

constexpr double kTieBreak = 1e-9;

struct NodeWind {
  std::string node;
  double forecast = 0.0;
  double var = 0.0;
  double std() const { return std::sqrt(var); }
};

std::vector<NodeWind> wind_by_node(const SystemCase& c) {
  std::vector<NodeWind> out;
  for (const auto& w : c.wind) {
    auto it = std::find_if(out.begin(), out.end(), [&](const NodeWind& x) { return x.node == w.node; });
    if (it == out.end()) {
      out.push_back({w.node, w.forecast, w.std * w.std});
    } else {
      it->forecast += w.forecast;
      it->var += w.std * w.std;
    }
  }
  return out;
}

void require_network(const SystemCase& c) {
  if (!c.network) throw std::invalid_argument("case has no network section");
  if (c.wind.empty()) throw std::invalid_argument("no uncertainty to balance: case has no wind");
}

// Adds theta, flow variables plus nodal balances, flow definitions and limits.
// Returns the index of the first theta variable.
void add_flow_structure(ConvexProgram& prog, const SystemCase& c,
                        const std::vector<int>& gen_pvar) {
  const auto& net = *c.network;
  std::map<std::string, int> theta;
  for (const auto& nd : net.nodes) theta[nd.id] = prog.add_variable("theta:" + nd.id);
  std::map<std::string, int> fvar;
  for (const auto& l : net.lines)
    fvar[line_key(l)] = prog.add_variable("f:" + line_key(l), -l.f_max, l.f_max);

  std::map<std::string, double> wind_at;
  for (const auto& w : c.wind) wind_at[w.node] += w.forecast;

  for (const auto& nd : net.nodes) {
    LinearExpr bal;
    for (size_t gi = 0; gi < c.generators.size(); ++gi)
      if (c.generators[gi].node == nd.id) bal.add(gen_pvar[gi], 1.0);
    for (const auto& l : net.lines) {
      if (l.to == nd.id) bal.add(fvar[line_key(l)], 1.0);
      if (l.from == nd.id) bal.add(fvar[line_key(l)], -1.0);
    }
    double rhs = nd.demand - (wind_at.count(nd.id) ? wind_at[nd.id] : 0.0);
    prog.add_equality(std::move(bal), rhs, "balance:" + nd.id);
  }
  for (const auto& l : net.lines) {
    LinearExpr def;
    def.add(theta[l.from], l.susceptance).add(theta[l.to], -l.susceptance).add(fvar[line_key(l)], -1.0);
    prog.add_equality(std::move(def), 0.0, "flowdef:" + line_key(l));
    LinearExpr up;
    up.add(fvar[line_key(l)], 1.0);
    prog.add_inequality(std::move(up), l.f_max, "flow_pos:" + line_key(l));
    LinearExpr dn;
    dn.add(fvar[line_key(l)], -1.0);
    prog.add_inequality(std::move(dn), l.f_max, "flow_neg:" + line_key(l));
  }
  LinearExpr slack;
  slack.add(theta[net.nodes.front().id], 1.0);
  prog.add_equality(std::move(slack), 0.0, "slack");
}

void fill_network_fields(NetworkClearingResult& r, const SystemCase& c, const Solution& sol) {
  for (const auto& nd : c.network->nodes) {
    r.lmp[nd.id] = r.duals.at("balance:" + nd.id);
    r.angles[nd.id] = sol.primal.at("theta:" + nd.id);
  }
  for (const auto& l : c.network->lines) {
    std::string k = line_key(l);
    r.flows[k] = sol.primal.at("f:" + k);
    r.congestion_duals[k] = {r.duals.count("flow_pos:" + k) ? r.duals.at("flow_pos:" + k) : 0.0,
                             r.duals.count("flow_neg:" + k) ? r.duals.at("flow_neg:" + k) : 0.0};
  }
}

std::vector<std::string> balance_labels(const SystemCase& c) {
  std::vector<std::string> out;
  for (const auto& nd : c.network->nodes) out.push_back("balance:" + nd.id);
  return out;
}

}  // namespace

ConvexProgram build_network_ldtcc(const SystemCase& c) {
  require_network(c);
  ConvexProgram prog;
  double sigma = aggregate_wind(c).std;
  if (!(sigma > 0)) throw std::invalid_argument("LDT models require sigma > 0");
  double omega_star = derive_omega_star(c);
  int n = static_cast<int>(c.generators.size());
  std::vector<int> pv, av, bv;
  for (const auto& g : c.generators) pv.push_back(prog.add_variable("p:" + g.id, 0.0));
  for (const auto& g : c.generators) av.push_back(prog.add_variable("a:" + g.id, 0.0));
  for (const auto& g : c.generators) bv.push_back(prog.add_variable("b:" + g.id, 0.0));
  for (int i = 0; i < n; ++i) {
    const auto& g = c.generators[i];
    prog.add_quadratic(pv[i], g.c2);
    prog.add_linear(pv[i], g.c1);
    prog.add_quadratic(av[i], g.c2 * sigma * sigma);
    prog.add_linear(av[i], kTieBreak * (i + 1));
    prog.add_linear(bv[i], g.c_beta + kTieBreak * (i + 1));
  }
  LinearExpr ra, rb;
  for (int i = 0; i < n; ++i) ra.add(av[i], 1.0);
  for (int i = 0; i < n; ++i) rb.add(bv[i], 1.0);
  prog.add_equality(std::move(ra), 1.0, "reserve_reg");
  prog.add_equality(std::move(rb), 1.0, "reserve_ext");
  for (int i = 0; i < n; ++i) {
    const auto& g = c.generators[i];
    double sh = sigma_hat(g, sigma);
    if (i + 1 < n) {  // last row implied; see rebase_extreme_duals
      LinearExpr ext;
      ext.add(pv[i], 1.0).add(av[i], sh).add(bv[i], omega_star - sh);
      prog.add_equality(std::move(ext), g.p_max, "ext:" + g.id);
    }
    LinearExpr reg;
    reg.add(pv[i], 1.0).add(av[i], sh);
    prog.add_inequality(std::move(reg), g.p_max, "reg:" + g.id);
    if (c.options.enforce_min_side) {
      LinearExpr mrow;
      mrow.add(pv[i], -1.0).add(av[i], sh);
      prog.add_inequality(std::move(mrow), -g.p_min, "reg_min:" + g.id);
    }
  }
  add_flow_structure(prog, c, pv);
  return prog;
}

NetworkClearingResult clear_network_ldtcc(const SystemCase& c) {
  c.validate();
  require_network(c);
  ConvexProgram prog = build_network_ldtcc(c);
  Solution sol = solve(prog);
  if (sol.status == SolveStatus::Infeasible)
    throw InfeasibleError("network clearing is infeasible", sol.infeasibility_certificate);
  if (sol.status != SolveStatus::Optimal) throw ConvergenceError("network solve did not converge");

  NetworkClearingResult r;
  r.model = ModelKind::LDTCC;
  r.case_hash = case_hash_hex(c);
  auto agg = aggregate_wind(c);
  r.sigma = agg.std;
  double omega_star = derive_omega_star(c);
  r.omega_star = omega_star;
  for (const auto& g : c.generators) {
    r.gen_ids.push_back(g.id);
    r.p[g.id] = sol.primal.at("p:" + g.id);
    r.alpha[g.id] = sol.primal.at("a:" + g.id);
    r.beta[g.id] = sol.primal.at("b:" + g.id);
    r.sigma_hat = std::max(r.sigma_hat, sigma_hat(g, agg.std));
    r.policy_jump[g.id] = 0.0;
  }
  r.omega_eps = std::min(r.sigma_hat, omega_star);
  r.duals = sol.duals_eq;
  for (const auto& [k, v] : sol.duals_ineq) r.duals[k] = v;
  r.scheduled_cost = expected_cost(c, r.p, r.alpha, r.beta);
  double zext = 0.0;
  for (const auto& g : c.generators) zext = std::max(zext, normal_quantile(1.0 - g.epsilon_ext));
  r.ldt_bound_ok = omega_star / agg.std >= zext;
  rebase_extreme_duals(r, c, omega_star, balance_labels(c));
  for (const auto& [id, bvx] : r.beta)
    if (bvx > 1e-6) r.lambda_star[id] = omega_star / (agg.std * agg.std * bvx);
  fill_network_fields(r, c, sol);
  r.validate(c);
  return r;
}

ConvexProgram build_locational_ldtcc(const SystemCase& c) {
  require_network(c);
  ConvexProgram prog;
  auto winds = wind_by_node(c);
  if (winds.empty()) throw std::invalid_argument("locational model needs at least one wind node");
  int n = static_cast<int>(c.generators.size());
  int nw = static_cast<int>(winds.size());
  bool pinned = nw == 1;
  double sigma_agg = aggregate_wind(c).std;
  if (!(sigma_agg > 0)) throw std::invalid_argument("LDT models require sigma > 0");

  std::vector<double> omega_star(nw);
  if (pinned) {
    omega_star[0] = derive_omega_star(c);
  } else {
    // per-node LDT bound fallback; recorded in the result metadata
    double zext = 0.0;
    for (const auto& g : c.generators) zext = std::max(zext, normal_quantile(1.0 - g.epsilon_ext));
    for (int k = 0; k < nw; ++k) omega_star[k] = winds[k].std() * zext;
  }

  std::vector<int> pv;
  for (const auto& g : c.generators) pv.push_back(prog.add_variable("p:" + g.id, 0.0));
  std::vector<std::vector<int>> Av(n), Bv(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < nw; ++k)
      Av[i].push_back(prog.add_variable("A:" + c.generators[i].id + "@" + winds[k].node, 0.0, 1.0));
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < nw; ++k)
      Bv[i].push_back(prog.add_variable("B:" + c.generators[i].id + "@" + winds[k].node, 0.0, 1.0));
  }
  for (int i = 0; i < n; ++i) {
    const auto& g = c.generators[i];
    prog.add_quadratic(pv[i], g.c2);
    prog.add_linear(pv[i], g.c1);
    for (int k = 0; k < nw; ++k) {
      prog.add_quadratic(Av[i][k], g.c2 * winds[k].var);
      prog.add_linear(Av[i][k], kTieBreak * (i + 1));
      prog.add_linear(Bv[i][k], g.c_beta + kTieBreak * (i + 1));
    }
  }
  for (int k = 0; k < nw; ++k) {
    LinearExpr ra, rb;
    for (int i = 0; i < n; ++i) ra.add(Av[i][k], 1.0);
    for (int i = 0; i < n; ++i) rb.add(Bv[i][k], 1.0);
    prog.add_equality(std::move(ra), 1.0, "reserve_reg:" + winds[k].node);
    prog.add_equality(std::move(rb), 1.0, "reserve_ext:" + winds[k].node);
  }
  for (int i = 0; i < n; ++i) {
    const auto& g = c.generators[i];
    double z = normal_quantile(1.0 - g.epsilon);
    // cone capacity row: p + || z * diag(sigma_k) A_n || <= p_max
    SocBlock blk;
    blk.scale = z;
    for (int k = 0; k < nw; ++k) {
      LinearExpr row;
      row.add(Av[i][k], winds[k].std());
      blk.rows.push_back(std::move(row));
    }
    blk.bound.add(pv[i], -1.0);
    blk.bound.constant = g.p_max;
    blk.label = "soccap:" + g.id;
    prog.add_soc(std::move(blk));

    // extreme capacity row, signed scalarization of the share vectors
    LinearExpr ext;
    ext.add(pv[i], 1.0);
    for (int k = 0; k < nw; ++k) {
      double sh_k = z * winds[k].std();
      ext.add(Av[i][k], sh_k);
      ext.add(Bv[i][k], omega_star[k] - sh_k);
    }
    if (pinned) {
      if (i + 1 < n) prog.add_equality(std::move(ext), g.p_max, "ext:" + g.id);
    } else {
      prog.add_inequality(std::move(ext), g.p_max, "ext:" + g.id);
    }
  }
  add_flow_structure(prog, c, pv);
  return prog;
}

NetworkClearingResult clear_locational_ldtcc(const SystemCase& c) {
  c.validate();
  require_network(c);
  auto winds = wind_by_node(c);
  ConvexProgram prog = build_locational_ldtcc(c);
  Solution sol = solve(prog);
  if (sol.status == SolveStatus::Infeasible)
    throw InfeasibleError("locational clearing is infeasible", sol.infeasibility_certificate);
  if (sol.status != SolveStatus::Optimal)
    throw ConvergenceError("locational solve did not converge");

  NetworkClearingResult r;
  r.model = ModelKind::LDTCC;
  r.case_hash = case_hash_hex(c);
  auto agg = aggregate_wind(c);
  r.sigma = agg.std;
  bool pinned = winds.size() == 1;
  r.omega_mode = pinned ? "pinned" : "bound";
  double zext = 0.0;
  for (const auto& g : c.generators) zext = std::max(zext, normal_quantile(1.0 - g.epsilon_ext));
  for (size_t k = 0; k < winds.size(); ++k)
    r.omega_star_node[winds[k].node] = pinned ? derive_omega_star(c) : winds[k].std() * zext;

  for (const auto& g : c.generators) {
    r.gen_ids.push_back(g.id);
    r.p[g.id] = sol.primal.at("p:" + g.id);
    double asum = 0.0, bsum = 0.0;
    for (const auto& w : winds) {
      double a = sol.primal.at("A:" + g.id + "@" + w.node);
      double b = sol.primal.at("B:" + g.id + "@" + w.node);
      r.A[g.id][w.node] = a;
      r.B[g.id][w.node] = b;
      asum += a * (w.std() / std::max(agg.std, 1e-300));
      bsum += b * (w.std() / std::max(agg.std, 1e-300));
    }
    // aggregate-equivalent shares (exact when a single wind node exists)
    r.alpha[g.id] = pinned ? r.A[g.id].begin()->second : asum;
    r.beta[g.id] = pinned ? r.B[g.id].begin()->second : bsum;
    r.sigma_hat = std::max(r.sigma_hat, sigma_hat(g, agg.std));
    r.policy_jump[g.id] = 0.0;
  }
  if (pinned) r.omega_star = r.omega_star_node.begin()->second;
  r.duals = sol.duals_eq;
  for (const auto& [k, v] : sol.duals_ineq) r.duals[k] = v;
  for (const auto& [k, v] : sol.soc_duals) r.cut_duals["soc:" + k] = v.empty() ? 0.0 : v[0];
  r.scheduled_cost = sol.objective_value;
  if (pinned)
    rebase_extreme_duals(r, c, *r.omega_star, balance_labels(c));
  fill_network_fields(r, c, sol);
  return r;
}

std::map<std::string, double> extract_lmps(const NetworkClearingResult& r) { return r.lmp; }

std::string NetworkClearingResult::to_json() const {
  nlohmann::json j = nlohmann::json::parse(ClearingResult::to_json());
  j["lmp"] = lmp;
  j["angles"] = angles;
  j["flows"] = flows;
  nlohmann::json cd;
  for (const auto& [k, v] : congestion_duals) cd[k] = {{"pos", v.first}, {"neg", v.second}};
  j["congestion_duals"] = cd;
  if (!A.empty()) {
    j["A"] = A;
    j["B"] = B;
    j["omega_star_node"] = omega_star_node;
    j["omega_mode"] = omega_mode;
  }
  return j.dump(2);
}

}  // namespace windclear
