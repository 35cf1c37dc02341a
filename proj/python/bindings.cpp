#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "windclear/evaluate.hpp"
#include "windclear/network.hpp"
#include "windclear/pricing.hpp"

namespace py = pybind11;
using namespace windclear;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic market clearing under wind uncertainty";

  // probability kernels
  m.def("normal_pdf", &normal_pdf);
  m.def("normal_cdf", &normal_cdf);
  m.def("normal_quantile", &normal_quantile);
  m.def("expected_overload", &expected_overload, py::arg("mu"), py::arg("sigma"));
  m.def(
      "truncated_moments",
      [](double mean, double std, double cut, const std::string& side) {
        auto tm = truncated_moments(GaussianSpec(mean, std), cut,
                                    side == "below" ? TruncSide::Below : TruncSide::Above);
        return std::make_pair(tm.mean, tm.variance);
      },
      py::arg("mean"), py::arg("std"), py::arg("cut"), py::arg("side"));
  m.def("rate_function",
        [](double mean, double std, double omega) {
          return rate_function(GaussianSpec(mean, std), omega);
        });

  py::register_exception<ValidationError>(m, "CaseValidationError");
  py::register_exception<InfeasibleError>(m, "InfeasibleError");
  py::register_exception<ConvergenceError>(m, "NoConvergenceError");

  py::class_<SystemCase>(m, "SystemCase")
      .def_static("load", &load_case, py::arg("path"))
      .def_static("parse", &parse_case, py::arg("json_text"))
      .def("serialize", &serialize_case)
      .def_property_readonly("demand", &SystemCase::demand)
      .def_property_readonly("num_generators",
                             [](const SystemCase& c) { return c.generators.size(); })
      .def_property_readonly("generator_ids", [](const SystemCase& c) {
        std::vector<std::string> ids;
        for (const auto& g : c.generators) ids.push_back(g.id);
        return ids;
      });
  m.def("aggregate_wind", [](const SystemCase& c) {
    auto a = aggregate_wind(c);
    return std::make_pair(a.forecast, a.std);
  });
  m.def("derive_omega_star", &derive_omega_star);

  py::class_<ClearingResult>(m, "ClearingResult")
      .def_property_readonly("model", [](const ClearingResult& r) { return model_kind_name(r.model); })
      .def_readonly("p", &ClearingResult::p)
      .def_readonly("alpha", &ClearingResult::alpha)
      .def_readonly("beta", &ClearingResult::beta)
      .def_property_readonly("omega_star",
                             [](const ClearingResult& r) { return r.omega_star; })
      .def_property_readonly("omega_eps", [](const ClearingResult& r) { return r.omega_eps; })
      .def_readonly("scheduled_cost", &ClearingResult::scheduled_cost)
      .def_readonly("duals", &ClearingResult::duals)
      .def_readonly("cut_count", &ClearingResult::cut_count)
      .def_readonly("lambda_star", &ClearingResult::lambda_star)
      .def("to_json", &ClearingResult::to_json);

  m.def(
      "clear",
      [](const SystemCase& c, const std::string& model) { return clear(c, parse_model_kind(model)); },
      py::arg("case"), py::arg("model"));

  py::class_<NetworkClearingResult, ClearingResult>(m, "NetworkClearingResult")
      .def_readonly("lmp", &NetworkClearingResult::lmp)
      .def_readonly("flows", &NetworkClearingResult::flows)
      .def_readonly("angles", &NetworkClearingResult::angles)
      .def_readonly("A", &NetworkClearingResult::A)
      .def_readonly("B", &NetworkClearingResult::B)
      .def("to_json", &NetworkClearingResult::to_json);
  m.def("clear_network_ldtcc", &clear_network_ldtcc);
  m.def("clear_locational_ldtcc", &clear_locational_ldtcc);

  py::class_<PriceSet>(m, "PriceSet")
      .def_property_readonly("pi", [](const PriceSet& p) { return p.pi; })
      .def_readonly("lmp", &PriceSet::lmp)
      .def_readonly("rho", &PriceSet::rho)
      .def_property_readonly("chi", [](const PriceSet& p) { return p.chi; });
  m.def("extract_prices", &extract_prices);
  m.def("closed_form_prices_ldtcc", &closed_form_prices_ldtcc);

  py::class_<ProducerAccount>(m, "ProducerAccount")
      .def_readonly("id", &ProducerAccount::id)
      .def_readonly("revenue", &ProducerAccount::revenue)
      .def_readonly("cost", &ProducerAccount::cost)
      .def_readonly("profit", &ProducerAccount::profit);
  py::class_<Settlement>(m, "Settlement")
      .def_readonly("producers", &Settlement::producers)
      .def_readonly("consumer_payment", &Settlement::consumer_payment)
      .def_readonly("deficit", &Settlement::deficit);
  m.def("settle", &settle);

  py::class_<EquilibriumEntry>(m, "EquilibriumEntry")
      .def_readonly("id", &EquilibriumEntry::id)
      .def_readonly("central_profit", &EquilibriumEntry::central_profit)
      .def_readonly("best_response_profit", &EquilibriumEntry::best_response_profit)
      .def_readonly("gap", &EquilibriumEntry::gap);
  py::class_<EquilibriumReport>(m, "EquilibriumReport")
      .def_readonly("producers", &EquilibriumReport::producers)
      .def_readonly("max_gap", &EquilibriumReport::max_gap)
      .def_readonly("ok", &EquilibriumReport::ok);
  m.def("verify_equilibrium", &verify_equilibrium, py::arg("result"), py::arg("prices"),
        py::arg("case"), py::arg("tol") = 1e-3);

  py::class_<ScenarioOutcome>(m, "ScenarioOutcome")
      .def_readonly("omega", &ScenarioOutcome::omega)
      .def_readonly("realized_cost", &ScenarioOutcome::realized_cost)
      .def_readonly("unserved", &ScenarioOutcome::unserved)
      .def_readonly("spilled", &ScenarioOutcome::spilled)
      .def_readonly("violations", &ScenarioOutcome::violations);
  py::class_<ScenarioReport>(m, "ScenarioReport")
      .def_readonly("scenarios", &ScenarioReport::scenarios)
      .def_readonly("mean_cost", &ScenarioReport::mean_cost)
      .def_readonly("std_cost", &ScenarioReport::std_cost)
      .def_readonly("count", &ScenarioReport::count)
      .def("to_json", &ScenarioReport::to_json)
      .def("to_csv", &ScenarioReport::to_csv);
  m.def("apply_policy", &apply_policy, py::arg("result"), py::arg("case"), py::arg("omega"));
  m.def("evaluate", &evaluate, py::arg("result"), py::arg("case"), py::arg("n_scenarios"),
        py::arg("seed"));

  m.attr("__version__") = "0.1.0";
}
