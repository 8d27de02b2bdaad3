#pragma once

#include <memory>
#include <vector>

#include <singulax/model.hpp>
#include <singulax/psd.hpp>

namespace singulax {

/// Sufficient statistic of the minimax recursion after processing
/// y_0 .. y_k. The state is an immutable value: `step` returns a new one.
///
///   Q_0 = F_0' S F_0 + H_0' R_0 H_0
///   r_0 = F_0' S prior + H_0' R_0 y_0
///   a_0 = (S prior, prior) + (R_0 y_0, y_0)
///
///   W_k     = Q_k + C_k' S_k C_k
///   D_k     = S_k - S_k C_k W_k^+ C_k' S_k
///   Q_{k+1} = H_{k+1}' R_{k+1} H_{k+1} + F_{k+1}' D_k F_{k+1}
///   r_{k+1} = F_{k+1}' S_k C_k W_k^+ r_k + H_{k+1}' R_{k+1} y_{k+1}
///             + F_{k+1}' D_k fbar_k
///   a_{k+1} = a_k + (R_{k+1} y_{k+1}, y_{k+1}) + (S_k fbar_k, fbar_k)
///             - (W_k^+ (r_k - C_k' S_k fbar_k), r_k - C_k' S_k fbar_k)
///
/// With zero known inputs and zero prior this is the plain minimax form.
struct ObserverState {
  int k;
  SymPsdMatrix Q;
  Vector r;
  double alpha;
  const DescriptorSystem* sys;
  double tol;  // relative rank tolerance (0 = default)
  std::shared_ptr<const PsdEig> qeig;  // decomposition of Q, shared by queries
};

ObserverState init(const DescriptorSystem& sys, const Vector& y0, double tol_rel = 0.0);
ObserverState step(const ObserverState& state, const Vector& y_next);

/// Minimax estimate x-hat_k = Q_k^+ r_k.
Vector estimate(const ObserverState& state);

/// Residual budget 1 - alpha_k + (Q_k^+ r_k, r_k); nonnegative (up to
/// roundoff) whenever the observed sequence is feasible.
double beta(const ObserverState& state);

/// Worst-case estimation error in one direction. `sigma` is +inf when the
/// direction has an unreachable component (l not in range(Q_k)); in that
/// case the closed-form error expression is meaningless even though it may
/// evaluate to a finite number.
struct DirectionalError {
  Vector direction;
  bool finite;
  double sigma;
  double estimate_component;  // (l, x-hat_k)
};

DirectionalError directional_error(const ObserverState& state, const Vector& l);

/// Dimension of the subspace of directions with finite minimax error;
/// equals rank(Q_k) at the state's tolerance.
int causality_index(const ObserverState& state);

/// Global worst-case squared error: beta_k / lambda_min(Q_k), or +inf when
/// Q_k is rank deficient (1/0 = +inf convention).
double global_error(const ObserverState& state);

/// The set of terminal states consistent with the data:
///   { x : (Qx, x) - 2 (Q c, x) + alpha <= 1 }.
/// Unbounded (a cylinder) along ker(Q).
struct Ellipsoid {
  SymPsdMatrix Q;
  Vector center;
  double alpha;

  double level() const;  // 1 - alpha + (Q c, c)
  bool contains(const Vector& x, double tol = 1e-9) const;
};

Ellipsoid aposteriori_ellipsoid(const ObserverState& state);

struct MinimaxReport {
  int k;
  Vector estimate;
  int causality_index;
  double rho;   // +inf when causality_index < n
  double beta;
  std::vector<DirectionalError> directional;
};

/// Runs the observer online over the whole measurement sequence; report k
/// depends only on y_0..y_k. `directions` get a DirectionalError each.
std::vector<MinimaxReport> run(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               const std::vector<Vector>& directions = {},
                               double tol_rel = 0.0);

}  // namespace singulax
