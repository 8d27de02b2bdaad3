#include <singulax/kalman.hpp>

#include <cmath>
#include <string>

#include <singulax/observer.hpp>

#include <Eigen/Cholesky>

namespace singulax {

namespace {

/// Inverts F' G F + H' H through the PSD pseudoinverse and rejects rank
/// deficiency: under G positive definite, rank(F' G F + H' H) equals the
/// rank of the stacked [F; H].
SymPsdMatrix invert_information(const Matrix& info, Index n, int step, double tol_rel) {
  const PinvResult pr = pinv_psd(SymPsdMatrix(info), tol_rel);
  if (pr.rank < n) {
    throw RankDeficient("rank [F_k; H_k] = " + std::to_string(pr.rank) + " < " +
                        std::to_string(n) + " at step " + std::to_string(step),
                        step);
  }
  return pr.pinv;
}

}  // namespace

KalmanState kalman_init(const DescriptorSystem& sys, const Vector& q, const Vector& y0,
                        double tol_rel) {
  if (q.size() != sys.m) throw DimensionMismatch("kalman_init: q has wrong size");
  if (y0.size() != sys.p) throw DimensionMismatch("kalman_init: y0 has wrong size");
  const Matrix f0 = sys.F_at(0);
  const Matrix h0 = sys.H_at(0);
  Matrix info = f0.transpose() * f0 + h0.transpose() * h0;
  SymPsdMatrix p = invert_information(info, sys.n, 0, tol_rel);
  Vector xhat = p.matrix() * (f0.transpose() * q + h0.transpose() * y0);
  return KalmanState{0, std::move(p), std::move(xhat)};
}

KalmanState kalman_step(const KalmanState& state, const DescriptorSystem& sys,
                        const Vector& y_next, double tol_rel) {
  if (y_next.size() != sys.p) throw DimensionMismatch("kalman_step: y has wrong size");
  const int k = state.k + 1;
  const Matrix c = sys.C_at(k - 1);
  const Matrix f = sys.F_at(k);
  const Matrix h = sys.H_at(k);
  const Matrix r = sys.Rk_at(k);

  Matrix inner = Matrix::Identity(sys.m, sys.m) + c * state.P.matrix() * c.transpose();
  Eigen::LLT<Matrix> llt(0.5 * (inner + inner.transpose()));
  if (llt.info() != Eigen::Success) {
    throw SingularInnovation("I + C P C' is not positive definite at step " +
                             std::to_string(k));
  }
  // G = inner^{-1}, applied through the factorization.
  const Matrix gf = llt.solve(f);   // G F
  const Matrix gc = llt.solve(c);   // G C

  Matrix info = f.transpose() * gf + h.transpose() * h;
  SymPsdMatrix p = invert_information(info, sys.n, k, tol_rel);
  Vector xhat = p.matrix() * (f.transpose() * (gc * state.xhat)) +
                p.matrix() * (h.transpose() * (r * y_next));
  return KalmanState{k, std::move(p), std::move(xhat)};
}

EquivalenceReport equivalence_report(const DescriptorSystem& sys, const Vector& q,
                                     const std::vector<Vector>& y, int N,
                                     double tol_rel) {
  if (static_cast<int>(y.size()) != N + 1) {
    throw DimensionMismatch("equivalence: expected " + std::to_string(N + 1) +
                            " measurements");
  }
  if (q.size() != sys.m) throw DimensionMismatch("equivalence: q has wrong size");

  DescriptorSystem unit = sys;
  unit.S = Matrix::Identity(sys.m, sys.m);
  unit.Sk = [m = sys.m](int) { return Matrix::Identity(m, m); };
  unit.Rk = [p = sys.p](int) { return Matrix::Identity(p, p); };
  unit.known_input = {};
  unit.prior = q;

  EquivalenceReport rep;
  rep.per_step.reserve(y.size());

  ObserverState obs = init(unit, y[0], tol_rel);
  KalmanState kal = kalman_init(unit, q, y[0], tol_rel);
  for (int k = 0; k <= N; ++k) {
    if (causality_index(obs) < static_cast<int>(sys.n)) {
      throw RankDeficient("causality index dropped below n at step " + std::to_string(k), k);
    }
    const double dev = (estimate(obs) - kal.xhat).cwiseAbs().maxCoeff();
    const double pq =
        (kal.P.matrix() * obs.Q.matrix() - Matrix::Identity(sys.n, sys.n)).cwiseAbs().maxCoeff();
    rep.per_step.push_back(dev);
    rep.max_state_deviation = std::max(rep.max_state_deviation, dev);
    rep.max_pq_deviation = std::max(rep.max_pq_deviation, pq);
    if (k < N) {
      obs = step(obs, y[static_cast<size_t>(k) + 1]);
      kal = kalman_step(kal, unit, y[static_cast<size_t>(k) + 1], tol_rel);
    }
  }
  return rep;
}

double equivalence_check(const DescriptorSystem& sys, const Vector& q,
                         const std::vector<Vector>& y, int N, double tol_rel) {
  return equivalence_report(sys, q, y, N, tol_rel).max_state_deviation;
}

}  // namespace singulax
