#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <singulax/model.hpp>

namespace singulax {

using Rng = std::mt19937_64;

struct RandomSystemOptions {
  Index n = 2;
  Index m = 2;
  Index p = 1;
  int horizon = 10;          // matrices generated for steps 0..horizon, then repeated
  bool regular = false;       // enforce rank [F_k; H_k] = n by construction
  bool unit_weights = false;  // S = S_k = R_k = I
};

/// Random time-varying system with bounded-condition matrices. Entries are
/// uniform in [-1, 1]; weights are A A' + 0.3 I. With `regular` set, each
/// stacked [F_k; H_k] is built from a QR factor with row scalings in
/// [0.5, 1.5], so its smallest singular value stays well away from zero
/// (requires m + p >= n).
DescriptorSystem random_system(Rng& rng, const RandomSystemOptions& opts);

/// Unstructured measurement sequence, uniform in [-amplitude, amplitude].
std::vector<Vector> random_measurements(Rng& rng, Index p, int N, double amplitude = 1.0);

/// Measurements generated by an actual in-budget trajectory, so the
/// a-posteriori set is guaranteed nonempty. Works for any F shape: the
/// trajectory is drawn first and the disturbances are read off the
/// descriptor residuals, then everything is scaled into the budget.
struct FeasibleData {
  std::vector<Vector> x;
  std::vector<Vector> y;
  double constraint = 0.0;
};

FeasibleData random_feasible_measurements(Rng& rng, const DescriptorSystem& sys, int N,
                                          double budget = 0.9);

}  // namespace singulax
