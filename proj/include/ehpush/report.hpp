#pragma once

#include <cstdint>
#include <limits>

namespace ehpush {

enum class Provenance { ClosedForm, Fsmc, MonteCarlo };

inline const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ClosedForm: return "closed-form";
    case Provenance::Fsmc: return "fsmc";
    case Provenance::MonteCarlo: return "mc";
  }
  return "?";
}

// Blocking-probability estimate with its origin. Exact methods report zero
// confidence radius and no sample count.
struct BlockingReport {
  double blocking = std::numeric_limits<double>::quiet_NaN();
  Provenance provenance = Provenance::Fsmc;
  std::uint64_t samples = 0;
  double ci_radius = 0.0;
};

}  // namespace ehpush
