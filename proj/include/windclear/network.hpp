#pragma once

#include "windclear/formulations.hpp"

namespace windclear {

struct NetworkClearingResult : ClearingResult {
  std::map<std::string, double> lmp;     // node -> $/MWh
  std::map<std::string, double> angles;  // node -> rad
  std::map<std::string, double> flows;   // "from->to" -> MW
  std::map<std::string, std::pair<double, double>> congestion_duals;  // eta+, eta-
  // locational clearing only:
  std::map<std::string, std::map<std::string, double>> A;  // gen -> wind node share
  std::map<std::string, std::map<std::string, double>> B;
  std::map<std::string, double> omega_star_node;
  std::string omega_mode;  // "pinned" (single wind node) or "bound" fallback

  std::string to_json() const;
};

std::string line_key(const NetworkLine& l);

// System-wide reserves with DC power flow; LMP per node.
ConvexProgram build_network_ldtcc(const SystemCase& c);
NetworkClearingResult clear_network_ldtcc(const SystemCase& c);

// Location-specific reserves: share matrices A, B over wind nodes, cone
// capacity rows. Non-diagonal covariance is out of scope by construction.
ConvexProgram build_locational_ldtcc(const SystemCase& c);
NetworkClearingResult clear_locational_ldtcc(const SystemCase& c);

std::map<std::string, double> extract_lmps(const NetworkClearingResult& r);

}  // namespace windclear
