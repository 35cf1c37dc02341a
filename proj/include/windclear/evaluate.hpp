#pragma once

#include <cstdint>

#include "windclear/formulations.hpp"

namespace windclear {

struct ScenarioOutcome {
  double omega = 0.0;          // realized wind forecast error (MW, surplus > 0)
  double realized_cost = 0.0;  // $
  double unserved = 0.0;       // MWh
  double spilled = 0.0;        // MWh
  int violations = 0;          // generators clipped at a limit
};

struct ScenarioReport {
  std::vector<ScenarioOutcome> scenarios;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  int count = 0;
  std::uint64_t seed = 0;
  std::map<std::string, double> policy_jump;  // per-generator boundary gap

  std::string to_json() const;
  std::string to_csv() const;
};

// Deterministic counter-based uniform/normal stream; identical across
// platforms and thread counts.
double uniform_stream(std::uint64_t seed, std::uint64_t index);
double normal_stream(std::uint64_t seed, std::uint64_t index);

// Generator outputs under the result's recourse policy at wind error omega,
// clipped to capacity (the clipped energy is booked by the caller).
std::map<std::string, double> apply_policy(const ClearingResult& r, const SystemCase& c,
                                           double omega);

ScenarioReport evaluate(const ClearingResult& r, const SystemCase& c, int n_scenarios,
                        std::uint64_t seed);

}  // namespace windclear
