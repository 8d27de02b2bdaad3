#include <singulax/observer.hpp>

#include <cmath>
#include <limits>
#include <string>

namespace singulax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInfeasibleGate = -1e-6;

ObserverState make_state(int k, SymPsdMatrix q, Vector r, double alpha,
                         const DescriptorSystem* sys, double tol) {
  auto eig = std::make_shared<const PsdEig>(q, tol);
  return ObserverState{k, std::move(q), std::move(r), alpha, sys, tol, std::move(eig)};
}

}  // namespace

ObserverState init(const DescriptorSystem& sys, const Vector& y0, double tol_rel) {
  if (y0.size() != sys.p) {
    throw DimensionMismatch("init: y0 has size " + std::to_string(y0.size()) +
                            ", expected " + std::to_string(sys.p));
  }
  const Matrix f0 = sys.F_at(0);
  const Matrix h0 = sys.H_at(0);
  const Matrix s = sys.S_weight();
  const Matrix r0w = sys.Rk_at(0);
  const Vector prior = sys.prior_or_zero();

  Matrix q = f0.transpose() * s * f0 + h0.transpose() * r0w * h0;
  Vector r = f0.transpose() * (s * prior) + h0.transpose() * (r0w * y0);
  const double alpha = prior.dot(s * prior) + y0.dot(r0w * y0);
  return make_state(0, SymPsdMatrix(q), std::move(r), alpha, &sys, tol_rel);
}

ObserverState step(const ObserverState& state, const Vector& y_next) {
  const DescriptorSystem& sys = *state.sys;
  if (y_next.size() != sys.p) {
    throw DimensionMismatch("step: measurement has size " + std::to_string(y_next.size()) +
                            ", expected " + std::to_string(sys.p));
  }
  const int k = state.k;
  const Matrix c = sys.C_at(k);
  const Matrix sk = sys.Sk_at(k);
  const Matrix fn = sys.F_at(k + 1);
  const Matrix hn = sys.H_at(k + 1);
  const Matrix rn = sys.Rk_at(k + 1);
  const Vector fbar = sys.input_at(k);

  Matrix w = state.Q.matrix() + c.transpose() * sk * c;
  const PinvResult wp = pinv_psd(SymPsdMatrix(w), state.tol);
  const Matrix& wpm = wp.pinv.matrix();

  Matrix d = sk - sk * c * wpm * c.transpose() * sk;
  d = 0.5 * (d + d.transpose()).eval();

  Matrix q = hn.transpose() * rn * hn + fn.transpose() * d * fn;
  Vector r = fn.transpose() * (sk * (c * (wpm * state.r))) + hn.transpose() * (rn * y_next) +
             fn.transpose() * (d * fbar);
  const Vector shifted = state.r - c.transpose() * (sk * fbar);
  const double alpha = state.alpha + y_next.dot(rn * y_next) + fbar.dot(sk * fbar) -
                       shifted.dot(wpm * shifted);
  return make_state(k + 1, SymPsdMatrix(q), std::move(r), alpha, state.sys, state.tol);
}

Vector estimate(const ObserverState& state) {
  return state.qeig->pinv() * state.r;
}

double beta(const ObserverState& state) {
  return 1.0 - state.alpha + state.qeig->pinv_quad(state.r);
}

DirectionalError directional_error(const ObserverState& state, const Vector& l) {
  if (l.size() != state.Q.dim()) {
    throw DimensionMismatch("directional_error: direction has wrong size");
  }
  if (l.norm() == 0.0) throw ZeroDirection("directional_error: zero direction");

  const double b = beta(state);
  if (b < kInfeasibleGate) {
    throw InfeasibleData("beta = " + std::to_string(b) +
                         " < -1e-6: measurements are not consistent with the budget");
  }
  const double gate = (state.tol > 0 ? state.tol : default_rank_tol(state.Q.dim()));
  const Vector proj = state.qeig->project_range(l);
  const bool finite = (proj - l).norm() <= gate * l.norm();

  DirectionalError out;
  out.direction = l;
  out.finite = finite;
  out.estimate_component = l.dot(estimate(state));
  out.sigma = finite ? std::sqrt(std::max(b, 0.0)) * std::sqrt(state.qeig->pinv_quad(l))
                     : kInf;
  return out;
}

int causality_index(const ObserverState& state) {
  return static_cast<int>(state.qeig->rank());
}

double global_error(const ObserverState& state) {
  if (state.qeig->rank() < state.Q.dim()) return kInf;
  const double lmin = state.qeig->eigenvalues().minCoeff();
  return std::max(beta(state), 0.0) / lmin;
}

double Ellipsoid::level() const { return 1.0 - alpha + center.dot(Q.matrix() * center); }

bool Ellipsoid::contains(const Vector& x, double tol) const {
  if (x.size() != Q.dim()) throw DimensionMismatch("Ellipsoid::contains: size mismatch");
  const Vector qx = Q.matrix() * x;
  const double value = x.dot(qx) - 2.0 * center.dot(qx) + alpha;
  return value <= 1.0 + tol;
}

Ellipsoid aposteriori_ellipsoid(const ObserverState& state) {
  return Ellipsoid{state.Q, estimate(state), state.alpha};
}

std::vector<MinimaxReport> run(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               const std::vector<Vector>& directions, double tol_rel) {
  if (y.empty()) throw DimensionMismatch("run: empty measurement sequence");

  std::vector<MinimaxReport> reports;
  reports.reserve(y.size());
  ObserverState state = init(sys, y[0], tol_rel);
  for (size_t k = 0;; ++k) {
    MinimaxReport rep;
    rep.k = state.k;
    rep.estimate = estimate(state);
    rep.causality_index = causality_index(state);
    rep.rho = global_error(state);
    rep.beta = beta(state);
    rep.directional.reserve(directions.size());
    for (const Vector& l : directions) rep.directional.push_back(directional_error(state, l));
    reports.push_back(std::move(rep));
    if (k + 1 >= y.size()) break;
    state = step(state, y[k + 1]);
  }
  return reports;
}

}  // namespace singulax
