#include "ehpush/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehpush {

EnergyArrival EnergyArrival::poisson(double mean, int support_len) {
  if (mean < 0.0) throw std::invalid_argument("poisson arrival: mean must be >= 0");
  if (support_len < 1) throw std::invalid_argument("poisson arrival: empty support");
  EnergyArrival a;
  a.mean = mean;
  a.pmf.resize(support_len);
  double p = std::exp(-mean);
  for (int i = 0; i < support_len; ++i) {
    a.pmf[i] = p;
    p *= mean / (i + 1);
  }
  return a;
}

EnergyArrival EnergyArrival::point_mass(int value) {
  if (value < 0) throw std::invalid_argument("point mass arrival: negative value");
  EnergyArrival a;
  a.mean = value;
  a.pmf.assign(value + 1, 0.0);
  a.pmf[value] = 1.0;
  return a;
}

void EnergyArrival::validate() const {
  if (pmf.empty()) throw std::invalid_argument("arrival: empty pmf");
  double total = 0.0;
  for (double p : pmf) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("arrival: pmf entry outside [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("arrival: pmf does not sum to 1");
}

void ModelParams::validate(std::vector<std::string>* warnings) const {
  if (battery_units < 0) throw std::invalid_argument("params: negative battery capacity");
  if (push_units < 0) throw std::invalid_argument("params: negative push energy");
  if (push_units > battery_units)
    throw std::invalid_argument("params: push energy exceeds battery capacity");
  if (request_prob < 0.0 || request_prob > 1.0)
    throw std::invalid_argument("params: request probability outside [0, 1]");
  catalog.validate();
  grid.validate();
  arrival.validate();
  if (grid.max_multiplier() > battery_units)
    throw std::invalid_argument("params: outermost unicast cost exceeds battery capacity");
  if (warnings && push_units != grid.max_multiplier())
    warnings->push_back(
        "push energy (" + std::to_string(push_units) +
        " units) differs from the outermost unicast cost (" +
        std::to_string(grid.max_multiplier()) + " units)");
}

StateSpace::StateSpace(int battery_units, int classes, int catalog_size)
    : e_max_(battery_units), m_(classes), n_(catalog_size) {
  if (e_max_ < 0 || m_ < 1 || n_ < 1)
    throw std::invalid_argument("state space: bad dimensions");
  qi_count_ = 2 * m_ + 1;
  c_count_ = n_ + 1;
  size_ = (e_max_ + 1) * qi_count_ * c_count_;
}

int StateSpace::request_axis(int request, int near_flag) const {
  if (request == 0) return 0;
  return 2 * request - 1 + near_flag;
}

int StateSpace::index(const SystemState& s) const {
  if (s.energy < 0 || s.energy > e_max_ || s.request < 0 || s.request > m_ ||
      s.near_flag < 0 || s.near_flag > 1 || (s.request == 0 && s.near_flag != 0) ||
      s.pushed < 0 || s.pushed > n_)
    throw std::invalid_argument("state space: state out of range");
  return (s.energy * qi_count_ + request_axis(s.request, s.near_flag)) * c_count_ +
         s.pushed;
}

SystemState StateSpace::state(int index) const {
  if (index < 0 || index >= size_)
    throw std::invalid_argument("state space: index out of range");
  SystemState s;
  s.pushed = index % c_count_;
  const int rest = index / c_count_;
  const int qi = rest % qi_count_;
  s.energy = rest / qi_count_;
  if (qi == 0) {
    s.request = 0;
    s.near_flag = 0;
  } else {
    s.request = (qi + 1) / 2;
    s.near_flag = (qi + 1) % 2;
  }
  return s;
}

std::vector<SystemState> enumerate_states(const ModelParams& params) {
  StateSpace space(params.battery_units, params.classes(), params.catalog_size());
  std::vector<SystemState> states;
  states.reserve(space.size());
  for (int i = 0; i < space.size(); ++i) states.push_back(space.state(i));
  return states;
}

ActionSet feasible_actions(const SystemState& s, const ModelParams& params) {
  ActionSet set;
  set.sleep = true;
  if (s.request > 0 && s.energy >= params.grid.multipliers[s.request - 1])
    set.unicast = true;
  if (s.energy >= params.push_units && s.pushed < params.catalog_size())
    set.push = true;
  return set;
}

int stage_cost(const SystemState& s, Action a) {
  if (s.request == 0) return 0;
  if (a == Action::Unicast) return 0;
  if (a == Action::Push && s.near_flag == 1) return 0;
  return 1;
}

namespace {

int spend_units(int request, Action a, const ModelParams& params) {
  switch (a) {
    case Action::Sleep: return 0;
    case Action::Unicast:
      if (request < 1)
        throw std::invalid_argument("transition: unicast without a request");
      return params.grid.multipliers[request - 1];
    case Action::Push: return params.push_units;
  }
  return 0;
}

}  // namespace

std::vector<double> energy_transition(int energy, int request, Action a,
                                      const ModelParams& params) {
  const int e_max = params.battery_units;
  if (energy < 0 || energy > e_max)
    throw std::invalid_argument("energy_transition: level out of range");
  const int spend = spend_units(request, a, params);
  if (spend > energy)
    throw std::invalid_argument("energy_transition: action spends more than the battery holds");
  const int remaining = energy - spend;
  std::vector<double> pmf(e_max + 1, 0.0);
  double below = 0.0;
  for (int next = remaining; next < e_max; ++next) {
    const int arrived = next - remaining;
    const double p =
        arrived < static_cast<int>(params.arrival.pmf.size()) ? params.arrival.pmf[arrived] : 0.0;
    pmf[next] = p;
    below += p;
  }
  pmf[e_max] = 1.0 - below;
  return pmf;
}

std::vector<std::pair<int, double>> push_count_transition(int pushed, Action a,
                                                          const ModelParams& params) {
  const int n = params.catalog_size();
  if (pushed < 0 || pushed > n)
    throw std::invalid_argument("push_count_transition: count out of range");
  if (a == Action::Push && pushed >= n)
    throw std::invalid_argument("push_count_transition: cannot push with a full pushed list");
  const double leave = params.catalog.update_prob * pushed / n;
  std::vector<std::pair<int, double>> pmf;
  if (a == Action::Push) {
    if (leave > 0.0) pmf.emplace_back(pushed, leave);
    if (1.0 - leave > 0.0) pmf.emplace_back(pushed + 1, 1.0 - leave);
  } else {
    const double stay = 1.0 - (pushed >= 1 ? leave : 0.0);
    if (pushed >= 1 && leave > 0.0) pmf.emplace_back(pushed - 1, leave);
    if (stay > 0.0) pmf.emplace_back(pushed, stay);
  }
  return pmf;
}

std::vector<RequestOutcome> request_transition(int pushed_next,
                                               const ModelParams& params) {
  const int n = params.catalog_size();
  if (pushed_next < 0 || pushed_next > n)
    throw std::invalid_argument("request_transition: pushed count out of range");
  std::vector<RequestOutcome> pmf;
  const double p_u = params.request_prob;
  if (pushed_next == n || p_u == 0.0) {
    pmf.push_back({0, 0, 1.0});
    return pmf;
  }
  const double head = head_mass(params.catalog, pushed_next);
  const double head_next = head_mass(params.catalog, pushed_next + 1);
  const double f_next = params.catalog.popularity[pushed_next];
  const double idle = (1.0 - p_u) + p_u * head;
  if (idle > 0.0) pmf.push_back({0, 0, idle});
  for (int m = 1; m <= params.classes(); ++m) {
    const double area = params.grid.area_fraction(m);
    const double beyond = p_u * (1.0 - head_next) * area;
    if (beyond > 0.0) pmf.push_back({m, 0, beyond});
    const double at_next = p_u * f_next * area;
    if (at_next > 0.0) pmf.push_back({m, 1, at_next});
  }
  return pmf;
}

SparseRow transition(const SystemState& s, Action a, const ModelParams& params) {
  if (!feasible_actions(s, params).contains(a))
    throw std::invalid_argument("transition: infeasible action");
  StateSpace space(params.battery_units, params.classes(), params.catalog_size());
  const auto energy_pmf = energy_transition(s.energy, s.request, a, params);
  const auto push_pmf = push_count_transition(s.pushed, a, params);
  SparseRow row;
  for (int next_e = 0; next_e <= params.battery_units; ++next_e) {
    if (energy_pmf[next_e] == 0.0) continue;
    for (const auto& [next_c, pc] : push_pmf) {
      for (const auto& outcome : request_transition(next_c, params)) {
        const int idx =
            space.index({next_e, outcome.request, outcome.near_flag, next_c});
        row.emplace_back(idx, energy_pmf[next_e] * pc * outcome.prob);
      }
    }
  }
  std::sort(row.begin(), row.end());
  return row;
}

TransitionKernel::TransitionKernel(ModelParams params)
    : params_(std::move(params)),
      space_(params_.battery_units, params_.classes(), params_.catalog_size()) {
  const int e_max = params_.battery_units;
  arrival_prefix_.resize(params_.arrival.pmf.size() + 1, 0.0);
  for (std::size_t i = 0; i < params_.arrival.pmf.size(); ++i)
    arrival_prefix_[i + 1] = arrival_prefix_[i] + params_.arrival.pmf[i];

  energy_rows_.resize(e_max + 1);
  for (int remaining = 0; remaining <= e_max; ++remaining) {
    SparseRow& row = energy_rows_[remaining];
    double below = 0.0;
    for (int next = remaining; next < e_max; ++next) {
      const int arrived = next - remaining;
      const double p = arrived < static_cast<int>(params_.arrival.pmf.size())
                           ? params_.arrival.pmf[arrived]
                           : 0.0;
      below += p;
      if (p >= 1e-18) row.emplace_back(next, p);
    }
    if (1.0 - below > 0.0) row.emplace_back(e_max, 1.0 - below);
  }

  request_rows_.resize(params_.catalog_size() + 1);
  for (int c = 0; c <= params_.catalog_size(); ++c)
    request_rows_[c] = request_transition(c, params_);
}

int TransitionKernel::spend(int request, Action a) const {
  return spend_units(request, a, params_);
}

ActionSet TransitionKernel::feasible(int state_index) const {
  return feasible_actions(space_.state(state_index), params_);
}

int TransitionKernel::cost(int state_index, Action a) const {
  return stage_cost(space_.state(state_index), a);
}

const SparseRow& TransitionKernel::energy_row(int remaining) const {
  return energy_rows_.at(remaining);
}

const std::vector<RequestOutcome>& TransitionKernel::request_row(int pushed_next) const {
  return request_rows_.at(pushed_next);
}

std::vector<std::pair<int, double>> TransitionKernel::push_row(int pushed,
                                                               Action a) const {
  return push_count_transition(pushed, a, params_);
}

void TransitionKernel::row(int state_index, Action a, SparseRow& out) const {
  const SystemState s = space_.state(state_index);
  if (!feasible_actions(s, params_).contains(a))
    throw std::invalid_argument("kernel row: infeasible action");
  const int remaining = s.energy - spend_units(s.request, a, params_);
  const auto& energy = energy_rows_[remaining];
  const auto push = push_count_transition(s.pushed, a, params_);
  out.clear();
  // Index order is (E, QI, C) major-to-minor, so iterating energy outermost
  // and sorting the (QI, C) block per level emits ascending indices.
  for (const auto& [next_e, pe] : energy) {
    // Gather the (QI, C) block for this energy level in axis order.
    // Request outcomes for each candidate C are small, so merge directly.
    struct Cell { int qi; int c; double p; };
    static thread_local std::vector<Cell> cells;
    cells.clear();
    for (const auto& [next_c, pc] : push) {
      for (const auto& outcome : request_rows_[next_c]) {
        cells.push_back({space_.request_axis(outcome.request, outcome.near_flag),
                         next_c, pe * pc * outcome.prob});
      }
    }
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
      return a.qi != b.qi ? a.qi < b.qi : a.c < b.c;
    });
    const int base = next_e * (2 * space_.classes() + 1);
    for (const auto& cell : cells)
      out.emplace_back((base + cell.qi) * (space_.catalog_size() + 1) + cell.c,
                       cell.p);
  }
}

SparseRow TransitionKernel::row(int state_index, Action a) const {
  SparseRow out;
  row(state_index, a, out);
  return out;
}

}  // namespace ehpush
