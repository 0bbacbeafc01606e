#include "ehpush/channel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ehpush {

namespace {

// 24-point Gauss-Legendre nodes/weights on [-1, 1], generated once by Newton
// iteration on the Legendre recurrence.
struct GaussLegendre24 {
  std::array<double, 24> node{};
  std::array<double, 24> weight{};
  GaussLegendre24() {
    constexpr int n = 24;
    for (int i = 0; i < n; ++i) {
      double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      node[i] = x;
      weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

const GaussLegendre24& gl24() {
  static const GaussLegendre24 table;
  return table;
}

// E[log2(1 + snr * X)] for X ~ Exp(1). Integrated with a fixed geometric
// panel rule on t in [0, 64]: the first panel resolves the log kink at
// t ~ 1/snr, later panels double in width. Error is far below 1e-12 for any
// snr the solver brackets ever produce; the tail beyond t = 64 is < 1e-27.
double mean_log2_1p(double snr) {
  if (snr <= 0.0) return 0.0;
  const auto& q = gl24();
  const double t_first = std::min(1.0, 1.0 / snr) / 16.0;
  double total = 0.0;
  double lo = 0.0, hi = t_first;
  while (lo < 64.0) {
    const double c = 0.5 * (hi + lo);
    const double h = 0.5 * (hi - lo);
    double panel = 0.0;
    for (int i = 0; i < 24; ++i) {
      const double t = c + h * q.node[i];
      panel += q.weight[i] * std::exp(-t) * std::log2(1.0 + snr * t);
    }
    total += h * panel;
    lo = hi;
    hi = std::min(2.0 * hi, 64.0);
  }
  return total;
}

double snr_scale(const ChannelParams& p, double tx_power_w, double distance_m) {
  return tx_power_w * p.fading.mean_power * p.pathloss_const *
         std::pow(distance_m, -p.pathloss_exp) / p.noise_plus_interf_w;
}

}  // namespace

double expected_rate(const ChannelParams& p, double tx_power_w,
                     double distance_m) {
  if (tx_power_w < 0.0)
    throw std::invalid_argument("expected_rate: negative transmit power");
  if (distance_m <= 0.0 || distance_m > p.cell_radius_m)
    throw std::invalid_argument("expected_rate: distance outside (0, R]");
  if (tx_power_w == 0.0) return 0.0;
  return p.bandwidth_hz * mean_log2_1p(snr_scale(p, tx_power_w, distance_m));
}

double required_power(const ChannelParams& p, double distance_m) {
  if (distance_m <= 0.0 || distance_m > p.cell_radius_m)
    throw std::invalid_argument("required_power: distance outside (0, R]");
  const double target = p.target_rate_bps;
  double lo = 0.0;
  double hi = 10.0 * p.edge_tx_power_w *
              std::pow(distance_m / p.cell_radius_m, p.pathloss_exp);
  if (expected_rate(p, hi, distance_m) < target)
    throw std::invalid_argument(
        "required_power: bracket does not straddle the target rate "
        "(miscalibrated channel params)");
  double mid = 0.5 * hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double rate = expected_rate(p, mid, distance_m);
    if (rate < target)
      lo = mid;
    else
      hi = mid;
    if (std::abs(rate - target) < 1e-6 * target &&
        (hi - lo) <= 1e-12 * std::max(hi, 1e-300))
      break;
  }
  return 0.5 * (lo + hi);
}

void ChannelParams::validate() const {
  if (bandwidth_hz <= 0.0) throw std::invalid_argument("bandwidth must be > 0");
  if (target_rate_bps <= 0.0)
    throw std::invalid_argument("target rate must be > 0");
  if (pathloss_exp < 2.0)
    throw std::invalid_argument("pathloss exponent must be >= 2");
  if (cell_radius_m <= 0.0)
    throw std::invalid_argument("cell radius must be > 0");
  if (edge_tx_power_w <= 0.0)
    throw std::invalid_argument("edge transmit power must be > 0");
  if (slot_seconds <= 0.0) throw std::invalid_argument("slot length must be > 0");
  if (fading.mean_power <= 0.0)
    throw std::invalid_argument("fading mean power must be > 0");
  if (noise_plus_interf_w <= 0.0)
    throw std::invalid_argument("noise-plus-interference power must be > 0");
  const double edge = expected_rate(*this, edge_tx_power_w, cell_radius_m);
  if (std::abs(edge - target_rate_bps) > 1e-6 * target_rate_bps)
    throw std::invalid_argument(
        "channel params are not calibrated: rate at (R, Pt(R)) is " +
        std::to_string(edge) + ", target is " + std::to_string(target_rate_bps));
}

ChannelParams ChannelParams::calibrated(double bandwidth_hz,
                                        double target_rate_bps,
                                        double pathloss_const,
                                        double pathloss_exp,
                                        double cell_radius_m,
                                        double edge_tx_power_w,
                                        double slot_seconds, Fading fading) {
  ChannelParams p;
  p.bandwidth_hz = bandwidth_hz;
  p.target_rate_bps = target_rate_bps;
  p.pathloss_const = pathloss_const;
  p.pathloss_exp = pathloss_exp;
  p.cell_radius_m = cell_radius_m;
  p.edge_tx_power_w = edge_tx_power_w;
  p.slot_seconds = slot_seconds;
  p.fading = fading;

  // Solve mean_log2_1p(s) = r0 / W for the edge SNR scale, then back out the
  // noise-plus-interference power. mean_log2_1p is strictly increasing.
  const double target = target_rate_bps / bandwidth_hz;
  double lo = 1e-12, hi = 1e12;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);  // log-space bisection
    if (mean_log2_1p(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double edge_snr = std::sqrt(lo * hi);
  p.noise_plus_interf_w = edge_tx_power_w * fading.mean_power * pathloss_const *
                          std::pow(cell_radius_m, -pathloss_exp) / edge_snr;
  p.validate();
  return p;
}

double DistanceGrid::area_fraction(int m) const {
  if (m < 1 || m > classes())
    throw std::invalid_argument("area_fraction: class index out of range");
  const double r2 = cell_radius_m * cell_radius_m;
  const double outer = boundaries_m[m - 1] * boundaries_m[m - 1];
  const double inner = m == 1 ? 0.0 : boundaries_m[m - 2] * boundaries_m[m - 2];
  return (outer - inner) / r2;
}

void DistanceGrid::validate() const {
  if (multipliers.empty() || boundaries_m.size() != multipliers.size())
    throw std::invalid_argument("distance grid: empty or mismatched sizes");
  int prev = 0;
  for (int l : multipliers) {
    if (l <= prev) throw std::invalid_argument("distance grid: multipliers must be strictly increasing positive integers");
    prev = l;
  }
  double prev_d = 0.0;
  for (double d : boundaries_m) {
    if (d <= prev_d) throw std::invalid_argument("distance grid: boundaries must be strictly increasing");
    prev_d = d;
  }
  if (std::abs(boundaries_m.back() - cell_radius_m) > 1e-9 * cell_radius_m)
    throw std::invalid_argument("distance grid: outermost boundary must equal the cell radius");
}

namespace {

DistanceGrid solve_grid(const ChannelParams& p, std::span<const int> lm) {
  DistanceGrid g;
  g.multipliers.assign(lm.begin(), lm.end());
  g.cell_radius_m = p.cell_radius_m;
  const int m_count = static_cast<int>(lm.size());
  g.unit_energy_j = p.edge_tx_power_w * p.slot_seconds / lm[m_count - 1];
  g.boundaries_m.resize(m_count);
  for (int m = 0; m < m_count; ++m) {
    if (m == m_count - 1) {
      g.boundaries_m[m] = p.cell_radius_m;
      continue;
    }
    // required_power is increasing in d, so bisect d until the class energy
    // l_m * E_unit is matched.
    const double target_power = lm[m] * g.unit_energy_j / p.slot_seconds;
    double lo = 1e-9 * p.cell_radius_m, hi = p.cell_radius_m;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * p.cell_radius_m; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (required_power(p, mid) < target_power)
        lo = mid;
      else
        hi = mid;
    }
    g.boundaries_m[m] = 0.5 * (lo + hi);
  }
  g.validate();
  return g;
}

}  // namespace

DistanceGrid build_distance_grid(const ChannelParams& p, int classes) {
  if (classes < 1) throw std::invalid_argument("build_distance_grid: need at least one class");
  std::vector<int> lm(classes);
  for (int m = 0; m < classes; ++m) lm[m] = m + 1;
  return solve_grid(p, lm);
}

DistanceGrid build_distance_grid(const ChannelParams& p,
                                 std::span<const int> multipliers) {
  if (multipliers.empty())
    throw std::invalid_argument("build_distance_grid: need at least one class");
  int prev = 0;
  for (int l : multipliers) {
    if (l <= prev)
      throw std::invalid_argument(
          "build_distance_grid: multipliers must be strictly increasing positive integers");
    prev = l;
  }
  return solve_grid(p, multipliers);
}

double mean_unicast_energy(const DistanceGrid& grid) {
  double units = 0.0;
  for (int m = 1; m <= grid.classes(); ++m)
    units += grid.multipliers[m - 1] * grid.area_fraction(m);
  return units;
}

}  // namespace ehpush
