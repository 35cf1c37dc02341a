#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "windclear/probkit.hpp"

namespace windclear {

// Thrown for schema/invariant failures while loading a case. Always names the
// offending field.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& reason)
      : std::runtime_error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Generator {
  std::string id;
  double p_min = 0.0;
  double p_max = 0.0;
  double c2 = 0.0;      // $/MWh^2
  double c1 = 0.0;      // $/MWh
  double c_beta = 0.0;  // $ per unit of extreme participation
  double epsilon = 0.05;
  double epsilon_ext = 5e-5;
  std::string node;  // empty on single-node cases
};

struct WindSpec {
  double forecast = 0.0;  // MW
  double std = 0.0;       // MW
  std::string node;
};

struct NetworkNode {
  std::string id;
  double demand = 0.0;
};

struct NetworkLine {
  std::string from;
  std::string to;
  double susceptance = 0.0;
  double f_max = 0.0;
};

struct NetworkSpec {
  std::vector<NetworkNode> nodes;
  std::vector<NetworkLine> lines;
};

enum class OmegaEpsRule { RegularBoundary, FractionOfOmegaStar };

struct ModelOptions {
  bool enforce_min_side = false;
  OmegaEpsRule omega_eps_rule = OmegaEpsRule::RegularBoundary;
  double omega_eps_fraction = 0.0;  // kappa, used by FractionOfOmegaStar
  double cut_tolerance = 1e-7;
  int max_cut_iterations = 100;
  double duality_gap_tol = 1e-6;
};

struct SystemCase {
  std::vector<Generator> generators;
  std::vector<WindSpec> wind;
  std::optional<NetworkSpec> network;
  std::optional<double> total_demand;  // required when network absent
  double voll = 9000.0;                // $/MWh
  ModelOptions options;

  double demand() const;  // aggregate demand
  void validate() const;
};

// Load/serialize the single-document JSON case format.
SystemCase load_case(const std::string& path);
SystemCase parse_case(const std::string& json_text);
std::string serialize_case(const SystemCase& c);

// Zero-mean aggregate forecast-error spec plus total forecast, assuming
// independence across farms. Returns std = 0 via the .std field being 0 is not
// representable by GaussianSpec, so the pair form is used.
struct AggregateWind {
  double forecast = 0.0;
  double std = 0.0;
};
AggregateWind aggregate_wind(const SystemCase& c);

// FNV-1a over the canonical serialization; ties results to their case.
std::uint64_t case_hash(const SystemCase& c);
std::string case_hash_hex(const SystemCase& c);

}  // namespace windclear
