#pragma once

#include "windclear/formulations.hpp"

namespace windclear {

struct PriceSet {
  std::optional<double> pi;            // uniform energy price (single node)
  std::map<std::string, double> lmp;   // nodal energy prices (network clearing)
  double rho = 0.0;                    // regular reserve price
  std::optional<double> chi;           // extreme reserve price (LDT models)

  double energy_price_at(const std::string& node) const;
};

struct ProducerAccount {
  std::string id;
  double revenue = 0.0;
  double cost = 0.0;
  double profit = 0.0;
};

struct Settlement {
  std::vector<ProducerAccount> producers;
  double consumer_payment = 0.0;  // energy payment net of the wind credit
  double deficit = 0.0;           // market revenue deficit Delta*
};

struct EquilibriumEntry {
  std::string id;
  double central_profit = 0.0;
  double best_response_profit = 0.0;
  double gap = 0.0;
};

struct EquilibriumReport {
  std::vector<EquilibriumEntry> producers;
  double max_gap = 0.0;
  bool ok = false;
};

// Prices from the stored duals, cross-checked against the stationarity
// formulas at the dispatched point (1e-4 relative). Throws on disagreement.
PriceSet extract_prices(const ClearingResult& r, const SystemCase& c);

// Closed-form price expressions for the fixed-point LDT-CC program; requires
// strictly convex costs. Includes the active bound multipliers.
PriceSet closed_form_prices_ldtcc(const ClearingResult& r, const SystemCase& c);

Settlement settle(const ClearingResult& r, const PriceSet& prices, const SystemCase& c);

// Re-solves each producer's profit maximization at the posted prices and
// compares with the centrally dispatched profit.
EquilibriumReport verify_equilibrium(const ClearingResult& r, const PriceSet& prices,
                                     const SystemCase& c, double tol);

std::string settlement_csv(const Settlement& s);
std::string prices_json(const PriceSet& p);

}  // namespace windclear
