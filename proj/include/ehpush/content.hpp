#pragma once

#include <vector>

namespace ehpush {

// Zipf popularity over ranks 1..n: f_i = i^-skew / sum_j j^-skew.
std::vector<double> zipf_popularity(int n, double skew);

// Rank-indexed catalog. Popularity attaches to ranks, not identities: when a
// content is replaced the survivors shift rank, so the pushed set is always
// the popularity head and a count is a sufficient description.
struct Catalog {
  int size = 0;                    // N
  double skew = 0.0;               // v
  std::vector<double> popularity;  // f_1..f_N
  double update_prob = 0.0;        // p_c, per slot

  static Catalog zipf(int n, double skew, double update_prob);
  void validate() const;
};

// sum of f_1..f_count; 0 for count = 0, 1 for count = N.
double head_mass(const Catalog& catalog, int count);

}  // namespace ehpush
