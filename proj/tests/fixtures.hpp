// Shared model instances for the tests. The channel solve is cached; the
// cheap fields vary per call.
#pragma once

#include <stdexcept>

#include "ehpush/mdp.hpp"

namespace fixtures {

inline const ehpush::ChannelParams& standard_channel() {
  static const ehpush::ChannelParams p =
      ehpush::ChannelParams::calibrated(1.0, 1.0, 10.0, 2.0, 50.0, 1.0, 1.0);
  return p;
}

inline const ehpush::DistanceGrid& standard_grid(int classes = 5) {
  static const ehpush::DistanceGrid g5 =
      ehpush::build_distance_grid(standard_channel(), 5);
  static const ehpush::DistanceGrid g3 =
      ehpush::build_distance_grid(standard_channel(), 3);
  static const ehpush::DistanceGrid g1 =
      ehpush::build_distance_grid(standard_channel(), 1);
  if (classes == 5) return g5;
  if (classes == 3) return g3;
  if (classes == 1) return g1;
  throw std::invalid_argument("fixtures: unsupported class count");
}

// Full simulation-scale instance: M=5, N=20, v=1, E_p=5, Poisson arrivals.
inline ehpush::ModelParams standard_params(double update_prob = 0.2,
                                        double request_prob = 0.9,
                                        double arrival_mean = 1.0,
                                        int battery_units = 50) {
  ehpush::ModelParams p;
  p.grid = standard_grid(5);
  p.catalog = ehpush::Catalog::zipf(20, 1.0, update_prob);
  p.battery_units = battery_units;
  p.push_units = 5;
  p.request_prob = request_prob;
  p.arrival = ehpush::EnergyArrival::poisson(arrival_mean, battery_units + 7);
  return p;
}

// Mid-size instance for optimality checks: E_max=20, M=3, N=8.
inline ehpush::ModelParams reduced_params(double update_prob = 0.2,
                                          double request_prob = 0.9,
                                          double arrival_mean = 1.0) {
  ehpush::ModelParams p;
  p.grid = standard_grid(3);
  p.catalog = ehpush::Catalog::zipf(8, 1.0, update_prob);
  p.battery_units = 20;
  p.push_units = 3;
  p.request_prob = request_prob;
  p.arrival = ehpush::EnergyArrival::poisson(arrival_mean, 26);
  return p;
}

// Smallest instance with an interesting kernel: E_max=3, M=1, N=2.
inline ehpush::ModelParams tiny_params() {
  ehpush::ModelParams p;
  p.grid = standard_grid(1);
  p.catalog = ehpush::Catalog::zipf(2, 1.0, 0.2);
  p.battery_units = 3;
  p.push_units = 1;
  p.request_prob = 0.9;
  p.arrival = ehpush::EnergyArrival::poisson(1.0, 6);
  return p;
}

// Six-state instance (E_max=0, M=1, N=1). Push costs nothing, so eight
// feasible policies exist even with an always-empty battery. The outermost
// unicast cost exceeds the battery here by construction, so this instance
// skips ModelParams::validate.
inline ehpush::ModelParams micro6_params() {
  ehpush::ModelParams p;
  p.grid = standard_grid(1);
  p.catalog = ehpush::Catalog::zipf(1, 1.0, 0.3);
  p.battery_units = 0;
  p.push_units = 0;
  p.request_prob = 0.6;
  p.arrival = ehpush::EnergyArrival::poisson(0.5, 4);
  return p;
}

// Twelve-state instance with 72 feasible policies.
inline ehpush::ModelParams micro12_params() {
  ehpush::ModelParams p;
  p.grid = standard_grid(1);
  p.catalog = ehpush::Catalog::zipf(1, 1.0, 0.3);
  p.battery_units = 1;
  p.push_units = 1;
  p.request_prob = 0.6;
  p.arrival = ehpush::EnergyArrival::poisson(0.7, 5);
  return p;
}

// Paper catalog with energy always sufficient for any single action: a point
// arrival of push-plus-edge-unicast energy every slot.
inline ehpush::ModelParams abundant_params(double update_prob,
                                           double request_prob = 0.9) {
  ehpush::ModelParams p;
  p.grid = standard_grid(5);
  p.catalog = ehpush::Catalog::zipf(20, 1.0, update_prob);
  p.push_units = 5;
  p.battery_units = 20;
  p.request_prob = request_prob;
  p.arrival = ehpush::EnergyArrival::point_mass(10);
  return p;
}

}  // namespace fixtures
