#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ehpush/dp.hpp"
#include "ehpush/sim.hpp"
#include "ehpush/thresholds.hpp"

namespace ehpush {

// Flat scenario description: every knob a config file or CLI flag can set.
struct ScenarioSpec {
  // channel
  double bandwidth_hz = 1.0;
  double spectral_efficiency = 1.0;  // target rate / bandwidth
  double pathloss_const_db = 10.0;
  double pathloss_exp = 2.0;
  double cell_radius_m = 50.0;
  double edge_tx_power_w = 1.0;
  double slot_seconds = 1.0;
  // system
  int classes = 5;          // M
  int catalog = 20;         // N
  double zipf_skew = 1.0;   // v
  int battery_units = 50;   // E_max
  int push_units = 5;       // E_p
  double request_prob = 0.9;
  double update_prob = 0.2;
  double arrival_mean = 1.0;        // energy units per slot
  std::string arrival = "poisson";  // "poisson" or "point:<k>"

  // The simulation defaults: 50 m cell, unit spectral efficiency, 10 dB
  // pathloss constant, square-law decay, 1 W edge power, five distance
  // classes, push energy equal to the cell-edge unicast cost, catalog of 20
  // with unit Zipf skew, Poisson arrivals.
  static ScenarioSpec paper_v();

  ModelParams build(std::vector<std::string>* warnings = nullptr) const;
  int state_count() const;
};

std::optional<ScenarioSpec> named_preset(std::string_view name);

// key=value lines; '#' starts a comment. Unknown keys are errors.
void apply_config_line(ScenarioSpec& scenario, std::string_view line);
void load_config_file(ScenarioSpec& scenario, const std::string& path);

enum class SweepAxis { UpdateProb, ArrivalMean, RequestProb, BatteryUnits };
const char* sweep_axis_name(SweepAxis axis);  // "pc", "A", "pu", "emax"
std::optional<SweepAxis> parse_sweep_axis(std::string_view name);

enum class Method { ClosedForm, Fsmc, MonteCarlo, Dp };
const char* method_name(Method method);
std::optional<Method> parse_method(std::string_view name);

struct ExperimentSpec {
  ScenarioSpec scenario;
  SweepAxis axis = SweepAxis::UpdateProb;
  std::vector<double> values;
  std::vector<PolicyKind> policies;
  std::vector<Method> methods;
  std::uint64_t slots = 1'000'000;
  std::uint64_t warmup = 10'000;
  std::uint64_t seed = 1;
  std::size_t dp_state_cap = 50'000;

  void validate() const;
};

struct ResultRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  PolicyKind policy = PolicyKind::ServiceOnDemand;
  Method method = Method::Fsmc;
  double blocking = 0.0;  // NaN when the method does not apply or failed
  double ci_radius = 0.0;
  int push_threshold = -1;        // -1 leaves the CSV cell empty
  int unicast_cutoff_class = -1;
  std::uint64_t seed = 0;
  std::uint64_t slots = 0;
};

// One row per (sweep value, policy, method), in that nesting order. Sweep
// values run concurrently up to the EHPUSH_WORKERS cap; output order is
// deterministic. Per-row failures become NaN rows and the run continues.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

// Fixed column schema:
// sweep_param,sweep_value,policy,method,blocking,ci_radius,c_thr,m_thr,seed,slots
void write_csv(std::ostream& out, std::span<const ResultRow> rows);
void write_csv_file(const std::string& path, std::span<const ResultRow> rows);

struct CompareReport {
  struct Entry {
    PolicyKind policy;
    double blocking;
  };
  struct Group {
    double sweep_value;
    Method method;
    std::vector<Entry> ranking;  // ascending blocking
  };
  std::vector<Group> groups;
  std::vector<std::string> anomalies;
};

// Ranks policies per (sweep value, method) and flags violations of the
// dominance order dp <= gotb <= other policies (within statistical slack).
CompareReport compare_report(std::span<const ResultRow> rows);
void write_compare_report(std::ostream& out, const CompareReport& report);

// Policy file: text header carrying the state-order contract, then one ASCII
// action byte per state ('0' sleep, '1' unicast, '2' push).
void save_policy_file(const std::string& path, const StationaryPolicy& policy,
                      const ModelParams& params);
struct LoadedPolicy {
  int battery_units = 0;
  int classes = 0;
  int catalog = 0;
  StationaryPolicy policy;
};
LoadedPolicy load_policy_file(const std::string& path);

std::size_t worker_cap();  // EHPUSH_WORKERS env override, else hw concurrency

}  // namespace ehpush
