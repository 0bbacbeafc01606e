#include "ehpush/content.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ehpush {

std::vector<double> zipf_popularity(int n, double skew) {
  if (n < 1) throw std::invalid_argument("zipf_popularity: catalog must be non-empty");
  if (skew < 0.0) throw std::invalid_argument("zipf_popularity: skew must be >= 0");
  std::vector<double> f(n);
  double norm = 0.0;
  for (int i = 1; i <= n; ++i) {
    f[i - 1] = std::pow(static_cast<double>(i), -skew);
    norm += f[i - 1];
  }
  for (double& v : f) v /= norm;
  return f;
}

Catalog Catalog::zipf(int n, double skew, double update_prob) {
  Catalog c;
  c.size = n;
  c.skew = skew;
  c.popularity = zipf_popularity(n, skew);
  c.update_prob = update_prob;
  c.validate();
  return c;
}

void Catalog::validate() const {
  if (size < 1 || static_cast<int>(popularity.size()) != size)
    throw std::invalid_argument("catalog: size mismatch");
  if (update_prob < 0.0 || update_prob > 1.0)
    throw std::invalid_argument("catalog: update probability outside [0, 1]");
  double total = std::accumulate(popularity.begin(), popularity.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("catalog: popularity does not sum to 1");
  for (int i = 1; i < size; ++i) {
    if (popularity[i] > popularity[i - 1])
      throw std::invalid_argument("catalog: popularity must be non-increasing");
    if (skew > 0.0 && popularity[i] >= popularity[i - 1])
      throw std::invalid_argument("catalog: popularity must strictly decrease for skew > 0");
  }
}

double head_mass(const Catalog& catalog, int count) {
  if (count < 0 || count > catalog.size)
    throw std::invalid_argument("head_mass: count outside [0, N]");
  if (count == catalog.size) return 1.0;
  double total = 0.0;
  for (int i = 0; i < count; ++i) total += catalog.popularity[i];
  return total;
}

}  // namespace ehpush
