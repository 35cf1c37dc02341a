#include "windclear/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "windclear/probkit.hpp"

namespace windclear {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Kahan-compensated accumulator; aggregation stays order-independent.
struct Accum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

}  // namespace

double uniform_stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t h = splitmix64(seed ^ splitmix64(index + 0x51ed2701ull));
  // 53-bit mantissa, shifted into the open interval (0, 1)
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

double normal_stream(std::uint64_t seed, std::uint64_t index) {
  return normal_quantile(uniform_stream(seed, index));
}

std::map<std::string, double> apply_policy(const ClearingResult& r, const SystemCase& c,
                                           double omega) {
  // deficit coordinate: positive when wind under-delivers
  double w = -omega;
  bool ldt = r.model == ModelKind::LDTCC || r.model == ModelKind::LDTWCC;
  double oeps = ldt ? r.omega_eps.value_or(r.sigma_hat) : 0.0;
  double ostar = r.omega_star.value_or(0.0);
  std::map<std::string, double> out;
  for (const auto& g : c.generators) {
    double pv = r.p.at(g.id);
    double av = r.alpha.at(g.id);
    double bv = r.beta.empty() ? 0.0 : r.beta.at(g.id);
    double gout;
    if (!ldt || std::abs(w) <= oeps) {
      gout = pv + av * w;
    } else if (r.model == ModelKind::LDTWCC) {
      gout = w > 0 ? pv + bv * ostar + (av - bv) * w : pv - bv * ostar + (av - bv) * w;
    } else {  // LDT-CC extreme policy: slope beta beyond the regular band
      double sh = r.sigma_hat;
      gout = w > 0 ? pv + (av - bv) * sh + bv * w : pv - (av - bv) * sh + bv * w;
    }
    out[g.id] = std::clamp(gout, g.p_min, g.p_max);
  }
  return out;
}

ScenarioReport evaluate(const ClearingResult& r, const SystemCase& c, int n_scenarios,
                        std::uint64_t seed) {
  if (n_scenarios < 0) throw std::invalid_argument("n_scenarios must be >= 0");
  double sigma = aggregate_wind(c).std;
  if (!(sigma > 0)) throw std::invalid_argument("evaluate requires sigma > 0");
  double net = c.demand() - aggregate_wind(c).forecast;

  // standby payments for extreme reserve are committed regardless of the draw
  double standby = 0.0;
  if (!r.beta.empty())
    for (const auto& g : c.generators) standby += g.c_beta * r.beta.at(g.id);

  ScenarioReport rep;
  rep.count = n_scenarios;
  rep.seed = seed;
  rep.policy_jump = r.policy_jump;
  rep.scenarios.reserve(n_scenarios);
  for (int k = 0; k < n_scenarios; ++k) {
    double omega = sigma * normal_stream(seed, static_cast<std::uint64_t>(k));
    auto outputs = apply_policy(r, c, omega);
    ScenarioOutcome sc;
    sc.omega = omega;
    double total = 0.0, cost = standby;
    for (const auto& g : c.generators) {
      double gv = outputs.at(g.id);
      total += gv;
      cost += g.c2 * gv * gv + g.c1 * gv;
      // count clip events against the unclipped policy value
      double w = -omega;
      bool ldt = r.model == ModelKind::LDTCC || r.model == ModelKind::LDTWCC;
      double oeps = ldt ? r.omega_eps.value_or(r.sigma_hat) : 0.0;
      double bv = r.beta.empty() ? 0.0 : r.beta.at(g.id);
      double av = r.alpha.at(g.id);
      double raw;
      if (!ldt || std::abs(w) <= oeps) {
        raw = r.p.at(g.id) + av * w;
      } else if (r.model == ModelKind::LDTWCC) {
        raw = r.p.at(g.id) + (w > 0 ? bv : -bv) * r.omega_star.value_or(0.0) + (av - bv) * w;
      } else {
        raw = r.p.at(g.id) + (w > 0 ? 1.0 : -1.0) * (av - bv) * r.sigma_hat + bv * w;
      }
      if (raw > g.p_max + 1e-9 || raw < g.p_min - 1e-9) ++sc.violations;
    }
    double shortfall = (net - omega) - total;
    if (shortfall > 0) {
      sc.unserved = shortfall;
      cost += c.voll * shortfall;
    } else {
      sc.spilled = -shortfall;
    }
    sc.realized_cost = cost;
    rep.scenarios.push_back(sc);
  }
  Accum mean;
  for (const auto& sc : rep.scenarios) mean.add(sc.realized_cost);
  rep.mean_cost = n_scenarios ? mean.sum / n_scenarios : 0.0;
  Accum var;
  for (const auto& sc : rep.scenarios) {
    double d = sc.realized_cost - rep.mean_cost;
    var.add(d * d);
  }
  rep.std_cost = n_scenarios ? std::sqrt(var.sum / n_scenarios) : 0.0;
  return rep;
}

std::string ScenarioReport::to_json() const {
  nlohmann::json j;
  j["count"] = count;
  j["seed"] = seed;
  j["mean_cost"] = mean_cost;
  j["std_cost"] = std_cost;
  j["policy_jump"] = policy_jump;
  return j.dump(2);
}

std::string ScenarioReport::to_csv() const {
  std::ostringstream os;
  os << "scenario,omega,realized_cost,unserved,spilled,violations\n";
  os.precision(10);
  for (size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    os << i << ',' << s.omega << ',' << s.realized_cost << ',' << s.unserved << ',' << s.spilled
       << ',' << s.violations << "\n";
  }
  return os.str();
}

}  // namespace windclear
