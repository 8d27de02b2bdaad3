#pragma once

#include <vector>

#include <singulax/model.hpp>
#include <singulax/psd.hpp>

namespace singulax {

/// Deterministic-fit recursion for descriptor systems with
/// rank [F_k; H_k] = n at every step:
///
///   P_0 = (F_0' F_0 + H_0' H_0)^{-1},   x_0 = P_0 (F_0' q + H_0' y_0)
///   G_k = (I + C_{k-1} P_{k-1} C_{k-1}')^{-1}
///   P_k = (F_k' G_k F_k + H_k' H_k)^{-1}
///   x_k = P_k F_k' G_k C_{k-1} x_{k-1} + P_k H_k' R_k y_k
///
/// The P update is unweighted while the measurement term of the state
/// update carries R_k; the two coincide for unit weights, which is the
/// regime of the equivalence check.
struct KalmanState {
  int k;
  SymPsdMatrix P;  // positive definite under the rank condition
  Vector xhat;
};

/// Throws RankDeficient when rank [F_0; H_0] < n.
KalmanState kalman_init(const DescriptorSystem& sys, const Vector& q, const Vector& y0,
                        double tol_rel = 0.0);

/// Throws RankDeficient when the stacked rank drops at this step and
/// SingularInnovation when I + C P C' is numerically singular.
KalmanState kalman_step(const KalmanState& state, const DescriptorSystem& sys,
                        const Vector& y_next, double tol_rel = 0.0);

struct EquivalenceReport {
  double max_state_deviation = 0.0;  // max_k |Q_k^+ r_k - x_k|_inf
  double max_pq_deviation = 0.0;     // max_k |P_k Q_k - I|_inf
  std::vector<double> per_step;
};

/// Runs the deterministic-fit recursion and the minimax recursion with unit
/// weights (S = I, S_k = I, R_k = I, prior = q) over the same data and
/// reports the deviations. Also verifies that the causality index stays
/// full at every step. Uses the structural matrices of `sys`; the weight
/// families are replaced by identities for both recursions.
EquivalenceReport equivalence_report(const DescriptorSystem& sys, const Vector& q,
                                     const std::vector<Vector>& y, int N,
                                     double tol_rel = 0.0);

/// Max state deviation only (convenience wrapper).
double equivalence_check(const DescriptorSystem& sys, const Vector& q,
                         const std::vector<Vector>& y, int N, double tol_rel = 0.0);

}  // namespace singulax
