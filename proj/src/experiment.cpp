#include "ehpush/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ehpush {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// splitmix64; decorrelates per-row simulation seeds from the base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (a + 1) +
                    0xbf58476d1ce4e5b9ULL * (b + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

ScenarioSpec ScenarioSpec::paper_v() { return ScenarioSpec{}; }

std::optional<ScenarioSpec> named_preset(std::string_view name) {
  if (name == "paper-v") return ScenarioSpec::paper_v();
  return std::nullopt;
}

int ScenarioSpec::state_count() const {
  return (battery_units + 1) * (2 * classes + 1) * (catalog + 1);
}

ModelParams ScenarioSpec::build(std::vector<std::string>* warnings) const {
  const double beta = std::pow(10.0, pathloss_const_db / 10.0);
  const ChannelParams channel = ChannelParams::calibrated(
      bandwidth_hz, bandwidth_hz * spectral_efficiency, beta, pathloss_exp,
      cell_radius_m, edge_tx_power_w, slot_seconds);

  ModelParams params;
  params.grid = build_distance_grid(channel, classes);
  params.catalog = Catalog::zipf(catalog, zipf_skew, update_prob);
  params.battery_units = battery_units;
  params.push_units = push_units;
  params.request_prob = request_prob;

  const int support =
      battery_units + std::max(push_units, params.grid.max_multiplier()) + 2;
  if (arrival == "poisson") {
    params.arrival = EnergyArrival::poisson(arrival_mean, support);
  } else if (arrival.rfind("point:", 0) == 0) {
    params.arrival = EnergyArrival::point_mass(std::stoi(arrival.substr(6)));
  } else {
    throw std::invalid_argument("scenario: unknown arrival model '" + arrival + "'");
  }
  params.validate(warnings);
  return params;
}

void apply_config_line(ScenarioSpec& s, std::string_view line) {
  const auto hash = line.find('#');
  if (hash != std::string_view::npos) line = line.substr(0, hash);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front())))
    line.remove_prefix(1);
  while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back())))
    line.remove_suffix(1);
  if (line.empty()) return;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos)
    throw std::invalid_argument("config: expected key=value, got '" +
                                std::string(line) + "'");
  const std::string key(line.substr(0, eq));
  const std::string value(line.substr(eq + 1));
  const auto as_double = [&] { return std::stod(value); };
  const auto as_int = [&] { return std::stoi(value); };

  if (key == "bandwidth_hz") s.bandwidth_hz = as_double();
  else if (key == "spectral_efficiency") s.spectral_efficiency = as_double();
  else if (key == "pathloss_const_db") s.pathloss_const_db = as_double();
  else if (key == "pathloss_exp") s.pathloss_exp = as_double();
  else if (key == "cell_radius_m") s.cell_radius_m = as_double();
  else if (key == "edge_tx_power_w") s.edge_tx_power_w = as_double();
  else if (key == "slot_seconds") s.slot_seconds = as_double();
  else if (key == "classes") s.classes = as_int();
  else if (key == "catalog") s.catalog = as_int();
  else if (key == "zipf_skew") s.zipf_skew = as_double();
  else if (key == "battery_units") s.battery_units = as_int();
  else if (key == "push_units") s.push_units = as_int();
  else if (key == "request_prob") s.request_prob = as_double();
  else if (key == "update_prob") s.update_prob = as_double();
  else if (key == "arrival_mean") s.arrival_mean = as_double();
  else if (key == "arrival") s.arrival = value;
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

void load_config_file(ScenarioSpec& scenario, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) apply_config_line(scenario, line);
}

const char* sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::UpdateProb: return "pc";
    case SweepAxis::ArrivalMean: return "A";
    case SweepAxis::RequestProb: return "pu";
    case SweepAxis::BatteryUnits: return "emax";
  }
  return "?";
}

std::optional<SweepAxis> parse_sweep_axis(std::string_view name) {
  for (SweepAxis a : {SweepAxis::UpdateProb, SweepAxis::ArrivalMean,
                      SweepAxis::RequestProb, SweepAxis::BatteryUnits})
    if (name == sweep_axis_name(a)) return a;
  return std::nullopt;
}

const char* method_name(Method method) {
  switch (method) {
    case Method::ClosedForm: return "closed-form";
    case Method::Fsmc: return "fsmc";
    case Method::MonteCarlo: return "mc";
    case Method::Dp: return "dp";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::ClosedForm, Method::Fsmc, Method::MonteCarlo, Method::Dp})
    if (name == method_name(m)) return m;
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("experiment: no sweep values");
  if (policies.empty()) throw std::invalid_argument("experiment: no policies");
  if (methods.empty()) throw std::invalid_argument("experiment: no methods");
  if (slots == 0 || warmup >= slots)
    throw std::invalid_argument("experiment: need slots > warmup");
  for (double v : values) {
    switch (axis) {
      case SweepAxis::UpdateProb:
      case SweepAxis::RequestProb:
        if (v < 0.0 || v > 1.0)
          throw std::invalid_argument("experiment: probability sweep value outside [0, 1]");
        break;
      case SweepAxis::ArrivalMean:
        if (v < 0.0) throw std::invalid_argument("experiment: negative arrival mean");
        break;
      case SweepAxis::BatteryUnits:
        if (v < 1.0 || v != std::floor(v))
          throw std::invalid_argument("experiment: battery sweep values must be positive integers");
        break;
    }
  }
}

std::size_t worker_cap() {
  if (const char* env = std::getenv("EHPUSH_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<std::size_t>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

namespace {

ScenarioSpec scenario_at(const ExperimentSpec& spec, double value) {
  ScenarioSpec s = spec.scenario;
  switch (spec.axis) {
    case SweepAxis::UpdateProb: s.update_prob = value; break;
    case SweepAxis::ArrivalMean: s.arrival_mean = value; break;
    case SweepAxis::RequestProb: s.request_prob = value; break;
    case SweepAxis::BatteryUnits: s.battery_units = static_cast<int>(value); break;
  }
  return s;
}

// Everything the rows of one sweep value share.
struct ValueWork {
  std::optional<TransitionKernel> kernel;
  std::map<PolicyKind, ThresholdPolicySpec> specs;
  std::map<PolicyKind, StationaryPolicy> policies;
  double dp_cost = kNan;
  bool dp_solved = false;
  std::string error;
};

ValueWork prepare_value(const ExperimentSpec& spec, double value) {
  ValueWork work;
  try {
    const ScenarioSpec scenario = scenario_at(spec, value);
    work.kernel.emplace(scenario.build());
    const ModelParams& params = work.kernel->params();
    bool want_dp_policy = false;
    for (PolicyKind kind : spec.policies) {
      if (kind == PolicyKind::DpOptimal) {
        want_dp_policy = true;
        continue;
      }
      const ThresholdPolicySpec tspec = make_threshold_spec(kind, params);
      work.specs.emplace(kind, tspec);
      work.policies.emplace(kind, build_policy(tspec, params));
    }
    if (want_dp_policy) {
      if (static_cast<std::size_t>(work.kernel->space().size()) > spec.dp_state_cap) {
        std::cerr << "warning: skipping dp at " << sweep_axis_name(spec.axis)
                  << "=" << value << ": " << work.kernel->space().size()
                  << " states exceed the cap of " << spec.dp_state_cap << "\n";
      } else {
        PolicyIterationResult dp = policy_iteration(*work.kernel);
        work.dp_cost = dp.evaluation.average_cost;
        work.policies.emplace(PolicyKind::DpOptimal, std::move(dp.policy));
        work.dp_solved = true;
      }
    }
  } catch (const std::exception& e) {
    work.error = e.what();
  }
  return work;
}

ResultRow compute_row(const ExperimentSpec& spec, double value,
                      std::size_t value_index, PolicyKind kind,
                      std::size_t policy_index, Method method,
                      const ValueWork& work) {
  ResultRow row;
  row.sweep_param = sweep_axis_name(spec.axis);
  row.sweep_value = value;
  row.policy = kind;
  row.method = method;
  row.blocking = kNan;
  if (!work.error.empty()) return row;

  const auto spec_it = work.specs.find(kind);
  if (spec_it != work.specs.end()) {
    row.push_threshold = spec_it->second.push_threshold;
    row.unicast_cutoff_class = spec_it->second.unicast_cutoff_class;
  }
  const auto policy_it = work.policies.find(kind);

  try {
    switch (method) {
      case Method::ClosedForm:
        if (spec_it != work.specs.end())
          row.blocking = spec_it->second.predicted_blocking;
        break;
      case Method::Fsmc:
        if (policy_it != work.policies.end()) {
          const BlockingReport report =
              fsmc_report(analyze_policy(policy_it->second, *work.kernel));
          row.blocking = report.blocking;
          row.ci_radius = report.ci_radius;
        }
        break;
      case Method::MonteCarlo: {
        if (policy_it == work.policies.end()) break;
        row.seed = mix_seed(spec.seed, value_index, policy_index);
        row.slots = spec.slots;
        const BlockingReport report = mc_report(
            run(*work.kernel, policy_it->second, spec.slots, spec.warmup, row.seed));
        row.blocking = report.blocking;
        row.ci_radius = report.ci_radius;
        break;
      }
      case Method::Dp:
        if (kind == PolicyKind::DpOptimal && work.dp_solved)
          row.blocking = work.dp_cost;
        break;
    }
  } catch (const std::exception& e) {
    std::cerr << "warning: " << method_name(method) << "/"
              << policy_kind_name(kind) << " at " << row.sweep_param << "="
              << value << " failed: " << e.what() << "\n";
    row.blocking = kNan;
  }
  return row;
}

}  // namespace

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t n_values = spec.values.size();
  std::vector<ValueWork> works(n_values);

  const std::size_t workers = std::min(worker_cap(), n_values);
  std::atomic<std::size_t> next{0};
  auto run_values = [&] {
    for (std::size_t i = next.fetch_add(1); i < n_values; i = next.fetch_add(1))
      works[i] = prepare_value(spec, spec.values[i]);
  };
  if (workers <= 1) {
    run_values();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(run_values);
    for (auto& t : pool) t.join();
  }

  std::vector<ResultRow> rows;
  rows.reserve(n_values * spec.policies.size() * spec.methods.size());
  for (std::size_t vi = 0; vi < n_values; ++vi) {
    if (!works[vi].error.empty())
      std::cerr << "warning: sweep value " << spec.values[vi]
                << " failed: " << works[vi].error << "\n";
    for (std::size_t pi = 0; pi < spec.policies.size(); ++pi)
      for (Method method : spec.methods)
        rows.push_back(compute_row(spec, spec.values[vi], vi, spec.policies[pi],
                                   pi, method, works[vi]));
  }
  return rows;
}

void write_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "sweep_param,sweep_value,policy,method,blocking,ci_radius,c_thr,m_thr,"
         "seed,slots\n";
  for (const ResultRow& row : rows) {
    out << row.sweep_param << ',' << format_double(row.sweep_value) << ','
        << policy_kind_name(row.policy) << ',' << method_name(row.method) << ','
        << format_double(row.blocking) << ',' << format_double(row.ci_radius)
        << ',';
    if (row.push_threshold >= 0) out << row.push_threshold;
    out << ',';
    if (row.unicast_cutoff_class >= 0) out << row.unicast_cutoff_class;
    out << ',' << row.seed << ',' << row.slots << '\n';
  }
}

void write_csv_file(const std::string& path, std::span<const ResultRow> rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_csv(out, rows);
}

CompareReport compare_report(std::span<const ResultRow> rows) {
  CompareReport report;
  std::map<std::pair<double, Method>, std::vector<const ResultRow*>> groups;
  for (const ResultRow& row : rows)
    if (!std::isnan(row.blocking))
      groups[{row.sweep_value, row.method}].push_back(&row);

  for (const auto& [key, members] : groups) {
    CompareReport::Group group;
    group.sweep_value = key.first;
    group.method = key.second;
    for (const ResultRow* row : members)
      group.ranking.push_back({row->policy, row->blocking});
    std::sort(group.ranking.begin(), group.ranking.end(),
              [](const auto& a, const auto& b) { return a.blocking < b.blocking; });

    if (key.second == Method::Fsmc || key.second == Method::MonteCarlo) {
      const auto find = [&](PolicyKind kind) -> const ResultRow* {
        for (const ResultRow* row : members)
          if (row->policy == kind) return row;
        return nullptr;
      };
      const auto slack = [&](const ResultRow* a, const ResultRow* b) {
        const double stat = 3.0 * (a->ci_radius + b->ci_radius) / 1.96;
        return std::max(stat, 1e-8);
      };
      const ResultRow* dp = find(PolicyKind::DpOptimal);
      const ResultRow* gotb = find(PolicyKind::GreedyThreshold);
      for (const ResultRow* row : members) {
        if (dp && row != dp && dp->blocking > row->blocking + slack(dp, row))
          report.anomalies.push_back(
              std::string("dp above ") + policy_kind_name(row->policy) + " at " +
              row->sweep_param + "=" + format_double(row->sweep_value) + " (" +
              method_name(key.second) + ")");
        if (gotb && row != gotb && row != dp &&
            gotb->blocking > row->blocking + slack(gotb, row))
          report.anomalies.push_back(
              std::string("gotb above ") + policy_kind_name(row->policy) +
              " at " + row->sweep_param + "=" + format_double(row->sweep_value) +
              " (" + method_name(key.second) + ")");
      }
    }
    report.groups.push_back(std::move(group));
  }
  return report;
}

void write_compare_report(std::ostream& out, const CompareReport& report) {
  for (const auto& group : report.groups) {
    out << method_name(group.method) << " @ " << format_double(group.sweep_value)
        << ":";
    for (const auto& entry : group.ranking)
      out << ' ' << policy_kind_name(entry.policy) << '='
          << format_double(entry.blocking);
    out << '\n';
  }
  if (report.anomalies.empty()) {
    out << "no dominance anomalies\n";
  } else {
    for (const auto& anomaly : report.anomalies) out << "anomaly: " << anomaly << '\n';
  }
}

void save_policy_file(const std::string& path, const StationaryPolicy& policy,
                      const ModelParams& params) {
  const int e = params.battery_units, m = params.classes(), n = params.catalog_size();
  const std::size_t expected =
      static_cast<std::size_t>((e + 1) * (2 * m + 1) * (n + 1));
  if (policy.size() != expected)
    throw std::invalid_argument("save_policy_file: policy length mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << "ehpush-policy v1\n";
  out << "battery_units=" << e << " classes=" << m << " catalog=" << n << "\n";
  out << "order=battery-major,request-axis,pushed-minor\n";
  out << "request_axis=(0,0)->0,(q,0)->2q-1,(q,1)->2q\n";
  out << "index=(energy*(2*classes+1)+request_axis)*(catalog+1)+pushed\n";
  out << "states=" << policy.size() << "\n";
  out << "actions=0:sleep,1:unicast,2:push\n";
  for (Action a : policy) out.put(static_cast<char>('0' + static_cast<int>(a)));
  out.put('\n');
}

LoadedPolicy load_policy_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "ehpush-policy v1")
    throw std::runtime_error("policy file: bad magic line");
  LoadedPolicy loaded;
  std::size_t states = 0;
  while (std::getline(in, line)) {
    if (line.rfind("battery_units=", 0) == 0) {
      std::istringstream fields(line);
      std::string field;
      while (fields >> field) {
        const auto eq = field.find('=');
        const std::string key = field.substr(0, eq);
        const int value = std::stoi(field.substr(eq + 1));
        if (key == "battery_units") loaded.battery_units = value;
        else if (key == "classes") loaded.classes = value;
        else if (key == "catalog") loaded.catalog = value;
      }
    } else if (line.rfind("states=", 0) == 0) {
      states = std::stoul(line.substr(7));
    } else if (line.rfind("actions=", 0) == 0) {
      break;
    }
  }
  const std::size_t expected =
      static_cast<std::size_t>((loaded.battery_units + 1) *
                               (2 * loaded.classes + 1) * (loaded.catalog + 1));
  if (states == 0 || states != expected)
    throw std::runtime_error("policy file: missing or inconsistent dimensions");
  loaded.policy.reserve(states);
  for (std::size_t i = 0; i < states; ++i) {
    const int ch = in.get();
    if (ch < '0' || ch > '2')
      throw std::runtime_error("policy file: bad action byte at state " +
                               std::to_string(i));
    loaded.policy.push_back(static_cast<Action>(ch - '0'));
  }
  return loaded;
}

}  // namespace ehpush
