#include "windclear/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace windclear {

using nlohmann::json;

double SystemCase::demand() const {
  if (network) {
    double d = 0.0;
    for (const auto& n : network->nodes) d += n.demand;
    return d;
  }
  return total_demand.value_or(0.0);
}

void SystemCase::validate() const {
  if (generators.empty()) throw ValidationError("generators", "at least one generator required");
  std::set<std::string> gids;
  for (size_t i = 0; i < generators.size(); ++i) {
    const auto& g = generators[i];
    std::string fld = "generators[" + std::to_string(i) + "]";
    if (g.id.empty()) throw ValidationError(fld + ".id", "must be non-empty");
    if (!gids.insert(g.id).second) throw ValidationError(fld + ".id", "duplicate id '" + g.id + "'");
    if (!(g.p_min <= g.p_max)) throw ValidationError(fld + ".p_min", "p_min must be <= p_max");
    if (g.c2 < 0) throw ValidationError(fld + ".c2", "must be >= 0");
    if (!(g.epsilon > 0 && g.epsilon < 1)) throw ValidationError(fld + ".epsilon", "must lie in (0,1)");
    if (!(g.epsilon_ext > 0 && g.epsilon_ext < g.epsilon))
      throw ValidationError(fld + ".epsilon_ext", "must lie in (0, epsilon)");
    for (double v : {g.p_min, g.p_max, g.c2, g.c1, g.c_beta})
      if (!std::isfinite(v)) throw ValidationError(fld, "non-finite numeric field");
  }
  for (size_t i = 0; i < wind.size(); ++i) {
    const auto& w = wind[i];
    std::string fld = "wind[" + std::to_string(i) + "]";
    if (w.std < 0) throw ValidationError(fld + ".std", "must be >= 0");
    if (w.forecast < 0) throw ValidationError(fld + ".forecast", "must be >= 0");
  }
  if (voll < 0) throw ValidationError("voll", "must be >= 0");
  if (!(options.cut_tolerance > 0)) throw ValidationError("options.cut_tolerance", "must be > 0");
  if (!(options.duality_gap_tol > 0)) throw ValidationError("options.duality_gap_tol", "must be > 0");
  if (options.omega_eps_rule == OmegaEpsRule::FractionOfOmegaStar &&
      !(options.omega_eps_fraction > 0 && options.omega_eps_fraction < 1))
    throw ValidationError("options.omega_eps_fraction", "must lie in (0,1)");

  if (network) {
    const auto& net = *network;
    if (net.nodes.empty()) throw ValidationError("network.nodes", "must be non-empty");
    std::set<std::string> nids;
    for (size_t i = 0; i < net.nodes.size(); ++i) {
      if (net.nodes[i].id.empty())
        throw ValidationError("network.nodes[" + std::to_string(i) + "].id", "must be non-empty");
      if (!nids.insert(net.nodes[i].id).second)
        throw ValidationError("network.nodes[" + std::to_string(i) + "].id", "duplicate node id");
    }
    std::set<std::pair<std::string, std::string>> lkeys;
    for (size_t i = 0; i < net.lines.size(); ++i) {
      const auto& l = net.lines[i];
      std::string fld = "network.lines[" + std::to_string(i) + "]";
      if (!nids.count(l.from)) throw ValidationError(fld + ".from", "unknown node '" + l.from + "'");
      if (!nids.count(l.to)) throw ValidationError(fld + ".to", "unknown node '" + l.to + "'");
      if (l.from == l.to) throw ValidationError(fld, "self-loop line");
      if (!(l.f_max > 0)) throw ValidationError(fld + ".f_max", "must be > 0");
      if (!(l.susceptance > 0)) throw ValidationError(fld + ".susceptance", "must be > 0");
      auto key = std::minmax(l.from, l.to);
      if (!lkeys.insert({key.first, key.second}).second)
        throw ValidationError(fld, "duplicate line between '" + l.from + "' and '" + l.to + "'");
    }
    // connectivity
    std::set<std::string> seen;
    std::vector<std::string> stack{net.nodes.front().id};
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      if (!seen.insert(u).second) continue;
      for (const auto& l : net.lines) {
        if (l.from == u) stack.push_back(l.to);
        if (l.to == u) stack.push_back(l.from);
      }
    }
    if (seen.size() != nids.size()) throw ValidationError("network", "graph is not connected");
    for (const auto& g : generators)
      if (!g.node.empty() && !nids.count(g.node))
        throw ValidationError("generators", "generator '" + g.id + "' references unknown node '" + g.node + "'");
    for (size_t i = 0; i < wind.size(); ++i)
      if (!wind[i].node.empty() && !nids.count(wind[i].node))
        throw ValidationError("wind[" + std::to_string(i) + "].node", "unknown node '" + wind[i].node + "'");
    if (total_demand) {
      double nodal = 0.0;
      for (const auto& n : net.nodes) nodal += n.demand;
      if (std::abs(nodal - *total_demand) > 1e-6 * std::max(1.0, std::abs(*total_demand)))
        throw ValidationError("demand", "total_demand inconsistent with nodal demands");
    }
  } else {
    if (!total_demand) throw ValidationError("demand", "required when no network is given");
    if (!std::isfinite(*total_demand) || *total_demand < 0)
      throw ValidationError("demand", "must be finite and >= 0");
  }
}

namespace {

double need_num(const json& j, const std::string& fld) {
  if (!j.contains(fld.substr(fld.rfind('.') + 1))) throw ValidationError(fld, "missing");
  const json& v = j.at(fld.substr(fld.rfind('.') + 1));
  if (!v.is_number()) throw ValidationError(fld, "must be a number");
  return v.get<double>();
}

double opt_num(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ValidationError(key, "must be a number");
  return j.at(key).get<double>();
}

std::string need_str(const json& j, const std::string& fld) {
  auto key = fld.substr(fld.rfind('.') + 1);
  if (!j.contains(key)) throw ValidationError(fld, "missing");
  if (!j.at(key).is_string()) throw ValidationError(fld, "must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

SystemCase parse_case(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError("document", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("document", "top level must be an object");

  SystemCase c;
  if (!j.contains("generators") || !j["generators"].is_array())
    throw ValidationError("generators", "missing or not an array");
  size_t gi = 0;
  for (const auto& gj : j["generators"]) {
    std::string fld = "generators[" + std::to_string(gi++) + "]";
    if (!gj.is_object()) throw ValidationError(fld, "must be an object");
    Generator g;
    g.id = need_str(gj, fld + ".id");
    g.p_min = opt_num(gj, "p_min", 0.0);
    g.p_max = need_num(gj, fld + ".p_max");
    g.c2 = need_num(gj, fld + ".c2");
    g.c1 = need_num(gj, fld + ".c1");
    g.c_beta = opt_num(gj, "c_beta", 0.0);
    g.epsilon = opt_num(gj, "epsilon", 0.05);
    g.epsilon_ext = opt_num(gj, "epsilon_ext", 5e-5);
    if (gj.contains("node")) g.node = need_str(gj, fld + ".node");
    c.generators.push_back(std::move(g));
  }
  if (j.contains("wind")) {
    if (!j["wind"].is_array()) throw ValidationError("wind", "must be an array");
    size_t wi = 0;
    for (const auto& wj : j["wind"]) {
      std::string fld = "wind[" + std::to_string(wi++) + "]";
      WindSpec w;
      w.forecast = need_num(wj, fld + ".forecast");
      w.std = need_num(wj, fld + ".std");
      if (wj.contains("node")) w.node = need_str(wj, fld + ".node");
      c.wind.push_back(w);
    }
  }
  if (j.contains("network") && !j["network"].is_null()) {
    const auto& nj = j["network"];
    if (!nj.is_object()) throw ValidationError("network", "must be an object");
    NetworkSpec net;
    if (!nj.contains("nodes") || !nj["nodes"].is_array())
      throw ValidationError("network.nodes", "missing or not an array");
    for (const auto& node : nj["nodes"]) {
      NetworkNode n;
      n.id = need_str(node, "network.nodes[].id");
      n.demand = opt_num(node, "demand", 0.0);
      net.nodes.push_back(std::move(n));
    }
    if (nj.contains("lines")) {
      for (const auto& line : nj["lines"]) {
        NetworkLine l;
        l.from = need_str(line, "network.lines[].from");
        l.to = need_str(line, "network.lines[].to");
        l.susceptance = need_num(line, "network.lines[].susceptance");
        l.f_max = need_num(line, "network.lines[].f_max");
        net.lines.push_back(std::move(l));
      }
    }
    c.network = std::move(net);
  }
  if (j.contains("demand")) {
    if (!j["demand"].is_number()) throw ValidationError("demand", "must be a number");
    c.total_demand = j["demand"].get<double>();
  }
  c.voll = opt_num(j, "voll", 9000.0);
  if (j.contains("options")) {
    const auto& oj = j["options"];
    if (!oj.is_object()) throw ValidationError("options", "must be an object");
    auto& o = c.options;
    if (oj.contains("enforce_min_side")) {
      if (!oj["enforce_min_side"].is_boolean())
        throw ValidationError("options.enforce_min_side", "must be a boolean");
      o.enforce_min_side = oj["enforce_min_side"].get<bool>();
    }
    if (oj.contains("omega_eps_rule")) {
      const auto& rj = oj["omega_eps_rule"];
      if (rj.is_string() && rj.get<std::string>() == "regular_boundary") {
        o.omega_eps_rule = OmegaEpsRule::RegularBoundary;
      } else if (rj.is_object() && rj.contains("fraction_of_omega_star")) {
        o.omega_eps_rule = OmegaEpsRule::FractionOfOmegaStar;
        o.omega_eps_fraction = rj["fraction_of_omega_star"].get<double>();
      } else {
        throw ValidationError("options.omega_eps_rule",
                              "expected \"regular_boundary\" or {\"fraction_of_omega_star\": kappa}");
      }
    }
    o.cut_tolerance = opt_num(oj, "cut_tolerance", o.cut_tolerance);
    if (oj.contains("max_cut_iterations")) o.max_cut_iterations = oj["max_cut_iterations"].get<int>();
    o.duality_gap_tol = opt_num(oj, "duality_gap_tol", o.duality_gap_tol);
  }
  c.validate();
  return c;
}

SystemCase load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("file", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

std::string serialize_case(const SystemCase& c) {
  json j;
  j["generators"] = json::array();
  for (const auto& g : c.generators) {
    json gj;
    gj["id"] = g.id;
    gj["p_min"] = g.p_min;
    gj["p_max"] = g.p_max;
    gj["c2"] = g.c2;
    gj["c1"] = g.c1;
    gj["c_beta"] = g.c_beta;
    gj["epsilon"] = g.epsilon;
    gj["epsilon_ext"] = g.epsilon_ext;
    if (!g.node.empty()) gj["node"] = g.node;
    j["generators"].push_back(gj);
  }
  j["wind"] = json::array();
  for (const auto& w : c.wind) {
    json wj;
    wj["forecast"] = w.forecast;
    wj["std"] = w.std;
    if (!w.node.empty()) wj["node"] = w.node;
    j["wind"].push_back(wj);
  }
  if (c.network) {
    json nj;
    nj["nodes"] = json::array();
    for (const auto& n : c.network->nodes) nj["nodes"].push_back({{"id", n.id}, {"demand", n.demand}});
    nj["lines"] = json::array();
    for (const auto& l : c.network->lines)
      nj["lines"].push_back(
          {{"from", l.from}, {"to", l.to}, {"susceptance", l.susceptance}, {"f_max", l.f_max}});
    j["network"] = nj;
  }
  if (c.total_demand) j["demand"] = *c.total_demand;
  j["voll"] = c.voll;
  json oj;
  oj["enforce_min_side"] = c.options.enforce_min_side;
  if (c.options.omega_eps_rule == OmegaEpsRule::RegularBoundary)
    oj["omega_eps_rule"] = "regular_boundary";
  else
    oj["omega_eps_rule"] = {{"fraction_of_omega_star", c.options.omega_eps_fraction}};
  oj["cut_tolerance"] = c.options.cut_tolerance;
  oj["max_cut_iterations"] = c.options.max_cut_iterations;
  oj["duality_gap_tol"] = c.options.duality_gap_tol;
  j["options"] = oj;
  return j.dump(2);
}

AggregateWind aggregate_wind(const SystemCase& c) {
  AggregateWind a;
  double var = 0.0;
  for (const auto& w : c.wind) {
    a.forecast += w.forecast;
    var += w.std * w.std;  // independent farms
  }
  a.std = std::sqrt(var);
  return a;
}

std::uint64_t case_hash(const SystemCase& c) {
  std::string s = serialize_case(c);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string case_hash_hex(const SystemCase& c) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(case_hash(c)));
  return buf;
}

}  // namespace windclear
