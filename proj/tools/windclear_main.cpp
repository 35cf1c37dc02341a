#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "windclear/evaluate.hpp"
#include "windclear/network.hpp"
#include "windclear/pricing.hpp"

namespace fs = std::filesystem;
using namespace windclear;

namespace {

constexpr const char* kVersion = "0.1.0";

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string now_iso() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

std::string fmt2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void print_dispatch_table(std::ostream& os, const std::vector<ClearingResult>& results) {
  if (results.empty()) return;
  os << "model      variable ";
  for (const auto& id : results.front().gen_ids) os << "  " << id;
  os << "\n";
  for (const auto& r : results) {
    auto row = [&](const std::string& name, const std::map<std::string, double>& vals,
                   double scale) {
      char head[64];
      std::snprintf(head, sizeof(head), "%-10s %-8s", model_kind_name(r.model).c_str(),
                    name.c_str());
      os << head;
      for (const auto& id : r.gen_ids) os << "  " << fmt2(vals.at(id) * scale);
      os << "\n";
    };
    row("p[MW]", r.p, 1.0);
    row("alpha[%]", r.alpha, 100.0);
    if (!r.beta.empty()) row("beta[%]", r.beta, 100.0);
  }
}

void print_price_table(std::ostream& os, const std::vector<ClearingResult>& results,
                       const SystemCase& c) {
  os << "model      pi        rho       chi       total_cost\n";
  for (const auto& r : results) {
    PriceSet ps = extract_prices(r, c);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-10s %-9s %-9s %-9s %s\n", model_kind_name(r.model).c_str(),
                  ps.pi ? fmt2(*ps.pi).c_str() : "-", fmt2(ps.rho).c_str(),
                  ps.chi ? fmt2(*ps.chi).c_str() : "-", fmt2(r.scheduled_cost).c_str());
    os << buf;
  }
}

void print_lmp_table(std::ostream& os, const NetworkClearingResult& r) {
  os << "node        lmp\n";
  for (const auto& [node, v] : r.lmp) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%-10s %s\n", node.c_str(), fmt2(v).c_str());
    os << buf;
  }
}

nlohmann::json manifest(const std::string& case_path, const SystemCase& c,
                        const std::string& model, const std::vector<std::string>& outputs) {
  nlohmann::json m;
  m["case"] = case_path;
  m["case_hash"] = case_hash_hex(c);
  m["model"] = model;
  m["options"] = nlohmann::json::parse(serialize_case(c))["options"];
  m["tool_version"] = kVersion;
  m["timestamp"] = now_iso();
  m["outputs"] = outputs;
  return m;
}

int run_solve(const std::string& case_path, const std::string& model, bool network, bool min_side,
              bool table, bool json_out, const std::string& out_dir) {
  SystemCase c = load_case(case_path);
  if (min_side) c.options.enforce_min_side = true;
  fs::create_directories(out_dir);
  std::vector<std::string> outputs;

  if (network) {
    ModelKind kind = parse_model_kind(model);
    if (kind != ModelKind::LDTCC)
      throw std::invalid_argument("network clearing supports --model ldt-cc");
    NetworkClearingResult r = clear_network_ldtcc(c);
    PriceSet ps = extract_prices(r, c);
    Settlement s = settle(r, ps, c);
    write_file(fs::path(out_dir) / "result.json", r.to_json());
    write_file(fs::path(out_dir) / "prices.json", prices_json(ps));
    write_file(fs::path(out_dir) / "settlement.csv", settlement_csv(s));
    outputs = {"result.json", "prices.json", "settlement.csv"};
    write_file(fs::path(out_dir) / "manifest.json",
               manifest(case_path, c, model + "+network", outputs).dump(2));
    if (table) {
      print_dispatch_table(std::cout, {r});
      print_lmp_table(std::cout, r);
    }
    if (json_out) std::cout << r.to_json() << "\n";
    return 0;
  }

  ClearingResult r = clear(c, parse_model_kind(model));
  PriceSet ps = extract_prices(r, c);
  Settlement s = settle(r, ps, c);
  write_file(fs::path(out_dir) / "result.json", r.to_json());
  write_file(fs::path(out_dir) / "prices.json", prices_json(ps));
  write_file(fs::path(out_dir) / "settlement.csv", settlement_csv(s));
  outputs = {"result.json", "prices.json", "settlement.csv"};
  write_file(fs::path(out_dir) / "manifest.json", manifest(case_path, c, model, outputs).dump(2));
  if (table) {
    print_dispatch_table(std::cout, {r});
    print_price_table(std::cout, {r}, c);
  }
  if (json_out) std::cout << r.to_json() << "\n";
  return 0;
}

int run_evaluate(const std::string& case_path, const std::string& result_path, int scenarios,
                 std::uint64_t seed, bool summary, const std::string& out_dir) {
  SystemCase c = load_case(case_path);
  std::ifstream in(result_path);
  if (!in) throw ValidationError("result", "cannot open '" + result_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ClearingResult r = ClearingResult::from_json(ss.str());
  if (r.case_hash != case_hash_hex(c))
    throw ValidationError("result", "case hash mismatch: result was produced from a different case");
  ScenarioReport rep = evaluate(r, c, scenarios, seed);
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "report.json", rep.to_json());
  write_file(fs::path(out_dir) / "report.csv", rep.to_csv());
  if (summary) {
    std::cout << model_kind_name(r.model) << ": mean=" << fmt2(rep.mean_cost)
              << " std=" << fmt2(rep.std_cost) << " scenarios=" << rep.count << "\n";
  }
  return 0;
}

int run_compare(const std::string& case_path, std::vector<std::string> models, bool network,
                bool min_side, const std::string& out_dir) {
  SystemCase c = load_case(case_path);
  if (min_side) c.options.enforce_min_side = true;
  fs::create_directories(out_dir);

  if (network) {
    NetworkClearingResult r = clear_network_ldtcc(c);
    print_dispatch_table(std::cout, {r});
    print_lmp_table(std::cout, r);
    write_file(fs::path(out_dir) / "compare_network.json", r.to_json());
    return 0;
  }

  std::vector<std::future<ClearingResult>> futs;
  for (const auto& m : models) {
    ModelKind kind = parse_model_kind(m);
    futs.push_back(std::async(std::launch::async, [&c, kind] { return clear(c, kind); }));
  }
  std::vector<ClearingResult> results;
  for (auto& f : futs) results.push_back(f.get());
  print_dispatch_table(std::cout, results);
  print_price_table(std::cout, results, c);

  std::ostringstream csv;
  csv << "model,pi,rho,chi,total_cost\n";
  for (const auto& r : results) {
    PriceSet ps = extract_prices(r, c);
    csv << model_kind_name(r.model) << ',' << (ps.pi ? fmt2(*ps.pi) : "") << ',' << fmt2(ps.rho)
        << ',' << (ps.chi ? fmt2(*ps.chi) : "") << ',' << fmt2(r.scheduled_cost) << "\n";
  }
  write_file(fs::path(out_dir) / "compare.csv", csv.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"windclear: stochastic market clearing under wind uncertainty"};
  app.require_subcommand(1);

  std::string case_path, model = "cc", out_dir = ".", result_path;
  bool network = false, min_side = false, table = false, json_out = false, summary = false;
  int scenarios = 1000;
  std::uint64_t seed = 1;

  auto* solve_cmd = app.add_subcommand("solve", "clear a market case");
  solve_cmd->add_option("case", case_path, "case JSON file")->required();
  solve_cmd->add_option("--model", model, "cc|wcc|ldt-cc|ldt-wcc")->required();
  solve_cmd->add_flag("--network", network, "DC-network clearing (ldt-cc)");
  solve_cmd->add_flag("--min-side", min_side, "enforce minimum-output constraints");
  solve_cmd->add_flag("--table", table, "print dispatch and price tables");
  solve_cmd->add_flag("--json", json_out, "print the result JSON");
  solve_cmd->add_option("--out", out_dir, "output directory");

  auto* eval_cmd = app.add_subcommand("evaluate", "out-of-sample scenario evaluation");
  eval_cmd->add_option("case", case_path, "case JSON file")->required();
  eval_cmd->add_option("result", result_path, "result.json from solve")->required();
  eval_cmd->add_option("--scenarios", scenarios, "number of scenarios");
  eval_cmd->add_option("--seed", seed, "random stream seed");
  eval_cmd->add_flag("--summary", summary, "print mean/std summary");
  eval_cmd->add_option("--out", out_dir, "output directory");

  auto* cmp_cmd = app.add_subcommand("compare", "run several models side by side");
  cmp_cmd->add_option("case", case_path, "case JSON file")->required();
  std::vector<std::string> models;
  cmp_cmd->add_option("--models", models, "comma-separated model list")->delimiter(',');
  cmp_cmd->add_flag("--network", network, "DC-network clearing (ldt-cc)");
  cmp_cmd->add_flag("--min-side", min_side, "enforce minimum-output constraints");
  cmp_cmd->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(solve_cmd))
      return run_solve(case_path, model, network, min_side, table, json_out, out_dir);
    if (app.got_subcommand(eval_cmd))
      return run_evaluate(case_path, result_path, scenarios, seed, summary, out_dir);
    if (app.got_subcommand(cmp_cmd)) {
      if (models.empty()) models = {"cc", "ldt-wcc", "ldt-cc"};
      return run_compare(case_path, models, network, min_side, out_dir);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    for (const auto& [row, v] : e.certificate)
      std::cerr << "  relax " << row << " by " << v << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "no convergence: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
