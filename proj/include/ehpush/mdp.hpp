#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ehpush/channel.hpp"
#include "ehpush/content.hpp"

namespace ehpush {

enum class Action : std::uint8_t { Sleep = 0, Unicast = 1, Push = 2 };

inline const char* action_name(Action a) {
  switch (a) {
    case Action::Sleep: return "sleep";
    case Action::Unicast: return "unicast";
    case Action::Push: return "push";
  }
  return "?";
}

// MDP state x = (E, Q, I, C): battery units, request class (0 = no request),
// near-head indicator (1 iff the request targets the next content a push
// would deliver), pushed-content count.
struct SystemState {
  int energy = 0;       // E in 0..E_max
  int request = 0;      // Q in 0..M
  int near_flag = 0;    // I in {0, 1}; 0 whenever Q = 0
  int pushed = 0;       // C in 0..N

  bool operator==(const SystemState&) const = default;
};

// Per-slot energy arrival in battery units. `pmf[i]` is the exact probability
// of i units; the stored support is long enough that every battery-overflow
// complement only needs stored prefixes. `mean` is the exact distribution
// mean (used by the closed-form threshold formulas), not the truncated one.
struct EnergyArrival {
  std::vector<double> pmf;
  double mean = 0.0;

  static EnergyArrival poisson(double mean, int support_len);
  static EnergyArrival point_mass(int value);
  void validate() const;
};

struct ModelParams {
  int battery_units = 0;   // E_max
  int push_units = 0;      // E_p
  double request_prob = 0; // p_u
  Catalog catalog;
  DistanceGrid grid;
  EnergyArrival arrival;

  int catalog_size() const { return catalog.size; }
  int classes() const { return grid.classes(); }

  // Throws on hard violations; appends soft issues (push energy differing
  // from the outermost unicast cost) to `warnings` when given.
  void validate(std::vector<std::string>* warnings = nullptr) const;
};

// Fixed enumeration order: E major, then (Q, I) as (0,0), (1,0), (1,1), ...,
// (M,0), (M,1), then C minor. index(0,0,0,0) == 0.
class StateSpace {
 public:
  StateSpace(int battery_units, int classes, int catalog_size);

  int size() const { return size_; }
  int battery_units() const { return e_max_; }
  int classes() const { return m_; }
  int catalog_size() const { return n_; }

  int index(const SystemState& s) const;
  SystemState state(int index) const;

  // (Q, I) axis position: (0,0) -> 0, (q,0) -> 2q-1, (q,1) -> 2q.
  int request_axis(int request, int near_flag) const;

 private:
  int e_max_, m_, n_;
  int qi_count_, c_count_;
  int size_;
};

std::vector<SystemState> enumerate_states(const ModelParams& params);

struct ActionSet {
  bool sleep = false, unicast = false, push = false;
  bool contains(Action a) const {
    return a == Action::Sleep ? sleep : a == Action::Unicast ? unicast : push;
  }
  int count() const { return int(sleep) + int(unicast) + int(push); }
};

ActionSet feasible_actions(const SystemState& s, const ModelParams& params);

// 1 iff a request exists and neither unicast nor a push of the requested
// content serves it this slot.
int stage_cost(const SystemState& s, Action a);

// pmf over next battery level 0..E_max after spending for `a` and absorbing
// the arrival; the E_max cell takes all overflow mass. Throws if the action
// spends more than the battery holds.
std::vector<double> energy_transition(int energy, int request, Action a,
                                      const ModelParams& params);

// pmf over the next pushed count as (value, prob) pairs.
std::vector<std::pair<int, double>> push_count_transition(int pushed, Action a,
                                                          const ModelParams& params);

struct RequestOutcome {
  int request = 0;
  int near_flag = 0;
  double prob = 0.0;
};

// pmf over the next (Q, I) given the next pushed count.
std::vector<RequestOutcome> request_transition(int pushed_next,
                                               const ModelParams& params);

using SparseRow = std::vector<std::pair<int, double>>;

// pmf over next states, as (state index, prob) pairs in ascending index
// order. Product of the three factors above.
SparseRow transition(const SystemState& s, Action a, const ModelParams& params);

// Cached kernel over the enumerated space. All tables are built once in the
// constructor; every method afterwards is const and safe to share across
// threads. Interior energy cells below 1e-18 are dropped from rows (the
// overflow complement stays exact), keeping rows short for large batteries
// while leaving row sums within 1e-15 of 1.
class TransitionKernel {
 public:
  explicit TransitionKernel(ModelParams params);

  const ModelParams& params() const { return params_; }
  const StateSpace& space() const { return space_; }

  int spend(int request, Action a) const;
  ActionSet feasible(int state_index) const;
  int cost(int state_index, Action a) const;

  // Energy pmf after the spend, keyed by remaining units r = E - spend:
  // entries (next_level, prob), ascending, last entry is the E_max cell.
  const SparseRow& energy_row(int remaining) const;
  const std::vector<RequestOutcome>& request_row(int pushed_next) const;
  std::vector<std::pair<int, double>> push_row(int pushed, Action a) const;

  // Full next-state pmf; appends to `out` in ascending index order.
  void row(int state_index, Action a, SparseRow& out) const;
  SparseRow row(int state_index, Action a) const;

 private:
  ModelParams params_;
  StateSpace space_;
  std::vector<SparseRow> energy_rows_;                    // by remaining units
  std::vector<std::vector<RequestOutcome>> request_rows_; // by next C
  std::vector<double> arrival_prefix_;                    // prefix sums of pmf
};

}  // namespace ehpush
