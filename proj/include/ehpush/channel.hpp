#pragma once

#include <span>
#include <vector>

namespace ehpush {

enum class FadingFamily { Rayleigh };

// Small-scale fading descriptor. Only the mean of |h|^2 enters the
// fading-averaged rate; Rayleigh fading makes |h|^2 exponential.
struct Fading {
  FadingFamily family = FadingFamily::Rayleigh;
  double mean_power = 1.0;  // E[|h|^2]
};

struct ChannelParams {
  double bandwidth_hz = 1.0;        // W
  double target_rate_bps = 1.0;     // r0
  double pathloss_const = 10.0;     // beta, linear
  double pathloss_exp = 2.0;        // alpha
  double noise_plus_interf_w = 1.0; // sigma^2 + P_I
  double cell_radius_m = 50.0;      // R
  double edge_tx_power_w = 1.0;     // Pt(R)
  double slot_seconds = 1.0;        // Tp
  Fading fading{};

  // Throws std::invalid_argument on bad fields or if the edge calibration
  // identity expected_rate(Pt(R), R) == r0 fails beyond 1e-6 relative.
  void validate() const;

  // Builds params with noise_plus_interf_w solved so the average rate at
  // (d = R, Pt = edge power) equals the target rate.
  static ChannelParams calibrated(double bandwidth_hz, double target_rate_bps,
                                  double pathloss_const, double pathloss_exp,
                                  double cell_radius_m, double edge_tx_power_w,
                                  double slot_seconds, Fading fading = {});
};

// Distance classes covering (0, R]; a request in annulus (d_{m-1}, d_m] is
// served with l_m units of energy, unit_energy_j joules each.
struct DistanceGrid {
  std::vector<double> boundaries_m;  // d_1 < ... < d_M = R
  std::vector<int> multipliers;      // l_1 < ... < l_M, positive
  double unit_energy_j = 0.0;        // E_unit
  double cell_radius_m = 0.0;

  int classes() const { return static_cast<int>(multipliers.size()); }
  // (d_m^2 - d_{m-1}^2) / R^2 for m in 1..M (d_0 = 0).
  double area_fraction(int m) const;
  int max_multiplier() const { return multipliers.empty() ? 0 : multipliers.back(); }
  void validate() const;
};

// Fading-averaged downlink rate at transmit power `tx_power_w` and distance
// `distance_m`. Deterministic: the expectation over |h|^2 is evaluated with a
// fixed Gauss-Legendre panel rule (>= 240 nodes, accurate well below 1e-6).
double expected_rate(const ChannelParams& params, double tx_power_w,
                     double distance_m);

// The unique transmit power achieving the target rate at `distance_m`,
// found by bisection on [0, 10*Pt(R)*(d/R)^alpha]; relative tolerance 1e-6.
double required_power(const ChannelParams& params, double distance_m);

// Unit-step grid: E_unit = Pt(R)*Tp/M and l_m = m, so class m costs m units.
DistanceGrid build_distance_grid(const ChannelParams& params, int classes);

// General grid from caller-supplied strictly increasing positive multipliers;
// E_unit = Pt(R)*Tp / l_M so the outermost class lands exactly on R.
DistanceGrid build_distance_grid(const ChannelParams& params,
                                 std::span<const int> multipliers);

// Mean unicast energy for a uniformly located user, in units of E_unit:
// sum_m l_m * (d_m^2 - d_{m-1}^2) / R^2.
double mean_unicast_energy(const DistanceGrid& grid);

}  // namespace ehpush
