#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehpush/dp.hpp"
#include "ehpush/experiment.hpp"
#include "ehpush/sim.hpp"

namespace py = pybind11;
using namespace ehpush;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Content-push policy toolkit for an energy-harvesting small cell";

  py::enum_<Action>(m, "Action")
      .value("SLEEP", Action::Sleep)
      .value("UNICAST", Action::Unicast)
      .value("PUSH", Action::Push);

  py::enum_<PolicyKind>(m, "PolicyKind")
      .value("POTB", PolicyKind::PushOnly)
      .value("APTB", PolicyKind::AlwaysPush)
      .value("EETB", PolicyKind::EnergyEfficient)
      .value("GOTB", PolicyKind::GreedyThreshold)
      .value("SOD", PolicyKind::ServiceOnDemand)
      .value("DP", PolicyKind::DpOptimal);

  py::class_<Fading>(m, "Fading")
      .def(py::init<>())
      .def_readwrite("mean_power", &Fading::mean_power);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("bandwidth_hz", &ChannelParams::bandwidth_hz)
      .def_readwrite("target_rate_bps", &ChannelParams::target_rate_bps)
      .def_readwrite("pathloss_const", &ChannelParams::pathloss_const)
      .def_readwrite("pathloss_exp", &ChannelParams::pathloss_exp)
      .def_readwrite("noise_plus_interf_w", &ChannelParams::noise_plus_interf_w)
      .def_readwrite("cell_radius_m", &ChannelParams::cell_radius_m)
      .def_readwrite("edge_tx_power_w", &ChannelParams::edge_tx_power_w)
      .def_readwrite("slot_seconds", &ChannelParams::slot_seconds)
      .def("validate", &ChannelParams::validate)
      .def_static("calibrated", &ChannelParams::calibrated, py::arg("bandwidth_hz"),
                  py::arg("target_rate_bps"), py::arg("pathloss_const"),
                  py::arg("pathloss_exp"), py::arg("cell_radius_m"),
                  py::arg("edge_tx_power_w"), py::arg("slot_seconds"),
                  py::arg("fading") = Fading{});

  py::class_<DistanceGrid>(m, "DistanceGrid")
      .def_readonly("boundaries_m", &DistanceGrid::boundaries_m)
      .def_readonly("multipliers", &DistanceGrid::multipliers)
      .def_readonly("unit_energy_j", &DistanceGrid::unit_energy_j)
      .def("area_fraction", &DistanceGrid::area_fraction)
      .def("classes", &DistanceGrid::classes);

  m.def("expected_rate", &expected_rate, py::arg("params"), py::arg("tx_power_w"),
        py::arg("distance_m"));
  m.def("required_power", &required_power, py::arg("params"), py::arg("distance_m"));
  m.def("build_distance_grid",
        py::overload_cast<const ChannelParams&, int>(&build_distance_grid),
        py::arg("params"), py::arg("classes"));
  m.def("mean_unicast_energy", &mean_unicast_energy);

  m.def("zipf_popularity", &zipf_popularity, py::arg("n"), py::arg("skew"));
  py::class_<Catalog>(m, "Catalog")
      .def_static("zipf", &Catalog::zipf, py::arg("n"), py::arg("skew"),
                  py::arg("update_prob"))
      .def_readonly("size", &Catalog::size)
      .def_readonly("popularity", &Catalog::popularity)
      .def_readonly("update_prob", &Catalog::update_prob);
  m.def("head_mass", &head_mass, py::arg("catalog"), py::arg("count"));

  py::class_<EnergyArrival>(m, "EnergyArrival")
      .def_static("poisson", &EnergyArrival::poisson, py::arg("mean"),
                  py::arg("support_len"))
      .def_static("point_mass", &EnergyArrival::point_mass, py::arg("value"))
      .def_readonly("pmf", &EnergyArrival::pmf)
      .def_readonly("mean", &EnergyArrival::mean);

  py::class_<SystemState>(m, "SystemState")
      .def(py::init([](int e, int q, int i, int c) {
             return SystemState{e, q, i, c};
           }),
           py::arg("energy"), py::arg("request"), py::arg("near_flag"),
           py::arg("pushed"))
      .def_readwrite("energy", &SystemState::energy)
      .def_readwrite("request", &SystemState::request)
      .def_readwrite("near_flag", &SystemState::near_flag)
      .def_readwrite("pushed", &SystemState::pushed)
      .def("__repr__", [](const SystemState& s) {
        return "SystemState(E=" + std::to_string(s.energy) +
               ", Q=" + std::to_string(s.request) +
               ", I=" + std::to_string(s.near_flag) +
               ", C=" + std::to_string(s.pushed) + ")";
      });

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("battery_units", &ModelParams::battery_units)
      .def_readwrite("push_units", &ModelParams::push_units)
      .def_readwrite("request_prob", &ModelParams::request_prob)
      .def_readwrite("catalog", &ModelParams::catalog)
      .def_readwrite("grid", &ModelParams::grid)
      .def_readwrite("arrival", &ModelParams::arrival)
      .def("validate", [](const ModelParams& p) {
        std::vector<std::string> warnings;
        p.validate(&warnings);
        return warnings;
      });

  py::class_<StateSpace>(m, "StateSpace")
      .def(py::init<int, int, int>(), py::arg("battery_units"), py::arg("classes"),
           py::arg("catalog_size"))
      .def("size", &StateSpace::size)
      .def("index", &StateSpace::index)
      .def("state", &StateSpace::state);

  m.def("feasible_actions", [](const SystemState& s, const ModelParams& p) {
    std::vector<Action> out;
    const ActionSet set = feasible_actions(s, p);
    for (Action a : {Action::Sleep, Action::Unicast, Action::Push})
      if (set.contains(a)) out.push_back(a);
    return out;
  });
  m.def("stage_cost", &stage_cost, py::arg("state"), py::arg("action"));
  m.def("energy_transition", &energy_transition, py::arg("energy"),
        py::arg("request"), py::arg("action"), py::arg("params"));
  m.def("push_count_transition", &push_count_transition, py::arg("pushed"),
        py::arg("action"), py::arg("params"));
  m.def("request_transition", [](int pushed_next, const ModelParams& p) {
    std::vector<std::tuple<int, int, double>> out;
    for (const auto& o : request_transition(pushed_next, p))
      out.emplace_back(o.request, o.near_flag, o.prob);
    return out;
  });
  m.def("transition", &transition, py::arg("state"), py::arg("action"),
        py::arg("params"));

  py::class_<TransitionKernel>(m, "TransitionKernel")
      .def(py::init<ModelParams>())
      .def("size", [](const TransitionKernel& k) { return k.space().size(); })
      .def("row", py::overload_cast<int, Action>(&TransitionKernel::row,
                                                 py::const_));

  py::class_<EvaluationResult>(m, "EvaluationResult")
      .def_readonly("average_cost", &EvaluationResult::average_cost)
      .def_readonly("h", &EvaluationResult::h)
      .def_readonly("anchor", &EvaluationResult::anchor)
      .def_readonly("max_residual", &EvaluationResult::max_residual);

  py::class_<IterationRecord>(m, "IterationRecord")
      .def_readonly("iteration", &IterationRecord::iteration)
      .def_readonly("average_cost", &IterationRecord::average_cost)
      .def_readonly("changed_states", &IterationRecord::changed_states);

  py::class_<PolicyIterationResult>(m, "PolicyIterationResult")
      .def_readonly("policy", &PolicyIterationResult::policy)
      .def_readonly("evaluation", &PolicyIterationResult::evaluation)
      .def_readonly("trace", &PolicyIterationResult::trace)
      .def_readonly("bellman_residual", &PolicyIterationResult::bellman_residual);

  m.def("policy_evaluation", &policy_evaluation, py::arg("policy"),
        py::arg("kernel"), py::arg("residual_tol") = 1e-9);
  m.def(
      "policy_iteration",
      [](const TransitionKernel& kernel, int max_iterations) {
        PolicyIterationOptions options;
        options.max_iterations = max_iterations;
        return policy_iteration(kernel, {}, options);
      },
      py::arg("kernel"), py::arg("max_iterations") = 1000);

  py::enum_<Provenance>(m, "Provenance")
      .value("CLOSED_FORM", Provenance::ClosedForm)
      .value("FSMC", Provenance::Fsmc)
      .value("MONTE_CARLO", Provenance::MonteCarlo);
  py::class_<BlockingReport>(m, "BlockingReport")
      .def_readonly("blocking", &BlockingReport::blocking)
      .def_readonly("provenance", &BlockingReport::provenance)
      .def_readonly("samples", &BlockingReport::samples)
      .def_readonly("ci_radius", &BlockingReport::ci_radius);

  py::class_<PolicyAnalysis>(m, "PolicyAnalysis")
      .def_readonly("blocking", &PolicyAnalysis::blocking)
      .def_readonly("action_frequency", &PolicyAnalysis::action_frequency)
      .def_readonly("mean_battery", &PolicyAnalysis::mean_battery)
      .def_readonly("balance_residual", &PolicyAnalysis::balance_residual);
  m.def("analyze_policy", &analyze_policy, py::arg("policy"), py::arg("kernel"));
  m.def("fsmc_report", &fsmc_report, py::arg("analysis"));
  m.def("mc_report", &mc_report, py::arg("report"));

  m.def("steady_push_probability", &steady_push_probability,
        py::arg("push_threshold"), py::arg("update_prob"), py::arg("catalog_size"));
  m.def("blocking_lower_bound", &blocking_lower_bound, py::arg("params"),
        py::arg("push_threshold"));
  m.def("push_only_threshold", &push_only_threshold);
  m.def("push_only_blocking_limit", &push_only_blocking_limit);
  m.def("energy_efficient_threshold", &energy_efficient_threshold);
  m.def("energy_efficient_blocking_limit", &energy_efficient_blocking_limit);
  m.def("threshold_blocking_prediction", &threshold_blocking_prediction,
        py::arg("params"), py::arg("push_threshold"));

  py::class_<UnicastCutoff>(m, "UnicastCutoff")
      .def_readonly("class_cutoff", &UnicastCutoff::class_cutoff)
      .def_readonly("eta", &UnicastCutoff::eta)
      .def_readonly("push_budget", &UnicastCutoff::push_budget);
  m.def("unicast_cutoff", &unicast_cutoff, py::arg("params"),
        py::arg("push_threshold"));

  py::class_<ThresholdPolicySpec>(m, "ThresholdPolicySpec")
      .def_readonly("kind", &ThresholdPolicySpec::kind)
      .def_readonly("push_threshold", &ThresholdPolicySpec::push_threshold)
      .def_readonly("unicast_cutoff_class", &ThresholdPolicySpec::unicast_cutoff_class)
      .def_readonly("eta", &ThresholdPolicySpec::eta)
      .def_readonly("predicted_blocking", &ThresholdPolicySpec::predicted_blocking);
  m.def("make_threshold_spec", &make_threshold_spec, py::arg("kind"),
        py::arg("params"));
  m.def("build_policy", &build_policy, py::arg("spec"), py::arg("params"));
  m.def("greedy_threshold_search", &greedy_threshold_search, py::arg("params"));

  py::class_<SimReport>(m, "SimReport")
      .def_readonly("blocked", &SimReport::blocked)
      .def_readonly("counted_slots", &SimReport::counted_slots)
      .def_readonly("requests", &SimReport::requests)
      .def_readonly("blocking_per_slot", &SimReport::blocking_per_slot)
      .def_readonly("blocking_per_request", &SimReport::blocking_per_request)
      .def_readonly("action_frequency", &SimReport::action_frequency)
      .def_readonly("mean_battery", &SimReport::mean_battery)
      .def_readonly("ci_radius_95", &SimReport::ci_radius_95);
  m.def(
      "simulate",
      [](const TransitionKernel& kernel, const StationaryPolicy& policy,
         std::uint64_t horizon, std::uint64_t warmup, std::uint64_t seed) {
        return run(kernel, policy, horizon, warmup, seed);
      },
      py::arg("kernel"), py::arg("policy"), py::arg("horizon"),
      py::arg("warmup") = 10'000, py::arg("seed") = 1);

  py::class_<ScenarioSpec>(m, "ScenarioSpec")
      .def(py::init<>())
      .def_static("paper_v", &ScenarioSpec::paper_v)
      .def_readwrite("classes", &ScenarioSpec::classes)
      .def_readwrite("catalog", &ScenarioSpec::catalog)
      .def_readwrite("zipf_skew", &ScenarioSpec::zipf_skew)
      .def_readwrite("battery_units", &ScenarioSpec::battery_units)
      .def_readwrite("push_units", &ScenarioSpec::push_units)
      .def_readwrite("request_prob", &ScenarioSpec::request_prob)
      .def_readwrite("update_prob", &ScenarioSpec::update_prob)
      .def_readwrite("arrival_mean", &ScenarioSpec::arrival_mean)
      .def_readwrite("arrival", &ScenarioSpec::arrival)
      .def("build", [](const ScenarioSpec& s) { return s.build(nullptr); })
      .def("state_count", &ScenarioSpec::state_count);
}
