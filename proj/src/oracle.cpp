#include <singulax/oracle.hpp>

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace singulax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr Index kMaxStackedDim = 500;

void check_instance_size(const DescriptorSystem& sys, int N) {
  if (N < 0) throw DimensionMismatch("horizon must be >= 0");
  const Index stacked = (static_cast<Index>(N) + 1) * sys.n;
  if (stacked > kMaxStackedDim) {
    throw DimensionMismatch("stacked dimension " + std::to_string(stacked) +
                            " exceeds the dense batch limit " +
                            std::to_string(kMaxStackedDim));
  }
}

void check_measurements(const DescriptorSystem& sys, const std::vector<Vector>& y, int N) {
  if (static_cast<int>(y.size()) != N + 1) {
    throw DimensionMismatch("expected " + std::to_string(N + 1) + " measurements, got " +
                            std::to_string(y.size()));
  }
  for (const Vector& v : y) {
    if (v.size() != sys.p) throw DimensionMismatch("measurement has wrong size");
  }
}

// Stacked nominal data vector [prior; fbar_0; ...; fbar_{N-1}].
Vector stacked_nominal(const DescriptorSystem& sys, int N) {
  Vector fbar = Vector::Zero((N + 1) * sys.m);
  fbar.head(sys.m) = sys.prior_or_zero();
  for (int k = 0; k < N; ++k) fbar.segment((k + 1) * sys.m, sys.m) = sys.input_at(k);
  return fbar;
}

Vector stacked_measurements(const DescriptorSystem& sys, const std::vector<Vector>& y) {
  Vector out(static_cast<Index>(y.size()) * sys.p);
  for (size_t k = 0; k < y.size(); ++k) out.segment(static_cast<Index>(k) * sys.p, sys.p) = y[k];
  return out;
}

struct NormalSystem {
  BlockSystem block;
  Matrix M;    // FF' W1 FF + HH' W2 HH
  Vector b;    // FF' W1 fbar + HH' W2 ybar
  double c0;   // (W1 fbar, fbar) + (W2 ybar, ybar)
  Vector fbar;
  Vector ybar;
};

NormalSystem build_normal(const DescriptorSystem& sys, const std::vector<Vector>& y, int N) {
  NormalSystem ns;
  ns.block = build_block_system(sys, N);
  ns.fbar = stacked_nominal(sys, N);
  ns.ybar = stacked_measurements(sys, y);
  const Matrix& ff = ns.block.FF;
  const Matrix& hh = ns.block.HH;
  const Matrix& w1 = ns.block.weight1;
  const Matrix& w2 = ns.block.weight2;
  Matrix m = ff.transpose() * w1 * ff + hh.transpose() * w2 * hh;
  ns.M = 0.5 * (m + m.transpose());
  ns.b = ff.transpose() * (w1 * ns.fbar) + hh.transpose() * (w2 * ns.ybar);
  ns.c0 = ns.fbar.dot(w1 * ns.fbar) + ns.ybar.dot(w2 * ns.ybar);
  return ns;
}

double fit_cost(const NormalSystem& ns, const Vector& x) {
  const Vector res1 = ns.block.FF * x - ns.fbar;
  const Vector res2 = ns.ybar - ns.block.HH * x;
  return res1.dot(ns.block.weight1 * res1) + res2.dot(ns.block.weight2 * res2);
}

Matrix spd_sqrt(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w);
  return es.operatorSqrt();
}

}  // namespace

BlockSystem build_block_system(const DescriptorSystem& sys, int N) {
  check_instance_size(sys, N);
  BlockSystem bs;
  bs.N = N;
  const Index rows_f = (static_cast<Index>(N) + 1) * sys.m;
  const Index rows_h = (static_cast<Index>(N) + 1) * sys.p;
  const Index cols = (static_cast<Index>(N) + 1) * sys.n;
  bs.FF = Matrix::Zero(rows_f, cols);
  bs.HH = Matrix::Zero(rows_h, cols);
  bs.weight1 = Matrix::Zero(rows_f, rows_f);
  bs.weight2 = Matrix::Zero(rows_h, rows_h);
  for (int k = 0; k <= N; ++k) {
    bs.FF.block(k * sys.m, k * sys.n, sys.m, sys.n) = sys.F_at(k);
    if (k > 0) bs.FF.block(k * sys.m, (k - 1) * sys.n, sys.m, sys.n) = -sys.C_at(k - 1);
    bs.HH.block(k * sys.p, k * sys.n, sys.p, sys.n) = sys.H_at(k);
    bs.weight1.block(k * sys.m, k * sys.m, sys.m, sys.m) =
        (k == 0) ? sys.S_weight() : sys.Sk_at(k - 1);
    bs.weight2.block(k * sys.p, k * sys.p, sys.p, sys.p) = sys.Rk_at(k);
  }
  return bs;
}

SmootherResult batch_estimate(const DescriptorSystem& sys, const std::vector<Vector>& y,
                              int N, double tol_rel) {
  check_instance_size(sys, N);
  check_measurements(sys, y, N);
  const NormalSystem ns = build_normal(sys, y, N);
  const PinvResult mp = pinv_psd(SymPsdMatrix(ns.M), tol_rel);
  const Vector x = mp.pinv.matrix() * ns.b;

  SmootherResult out;
  out.xhat.reserve(static_cast<size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) out.xhat.push_back(x.segment(k * sys.n, sys.n));
  out.cost = fit_cost(ns, x);
  return out;
}

SmootherResult smooth_backward(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               int N, double tol_rel) {
  check_instance_size(sys, N);
  check_measurements(sys, y, N);

  std::vector<ObserverState> states;
  states.reserve(static_cast<size_t>(N) + 1);
  states.push_back(init(sys, y[0], tol_rel));
  for (int k = 0; k < N; ++k) states.push_back(step(states.back(), y[static_cast<size_t>(k) + 1]));

  SmootherResult out;
  out.xhat.assign(static_cast<size_t>(N) + 1, Vector());
  out.xhat[static_cast<size_t>(N)] = estimate(states.back());
  out.cost = states.back().alpha - states.back().qeig->pinv_quad(states.back().r);

  for (int k = N - 1; k >= 0; --k) {
    const Matrix c = sys.C_at(k);
    const Matrix sk = sys.Sk_at(k);
    const Matrix fn = sys.F_at(k + 1);
    const Vector fbar = sys.input_at(k);
    Matrix w = states[static_cast<size_t>(k)].Q.matrix() + c.transpose() * sk * c;
    const PinvResult wp = pinv_psd(SymPsdMatrix(w), tol_rel);
    const Vector rhs = c.transpose() * (sk * (fn * out.xhat[static_cast<size_t>(k) + 1] - fbar)) +
                       states[static_cast<size_t>(k)].r;
    out.xhat[static_cast<size_t>(k)] = wp.pinv.matrix() * rhs;
  }
  return out;
}

RangeMembership range_membership(const DescriptorSystem& sys, int N, const Vector& l,
                                 double tol_rel) {
  (void)tol_rel;
  check_instance_size(sys, N);
  if (l.size() != sys.n) throw DimensionMismatch("range_membership: direction size");
  if (l.norm() == 0.0) throw ZeroDirection("range_membership: zero direction");

  const BlockSystem bs = build_block_system(sys, N);
  // Weighted stacked operator [FF' W1^{1/2}, HH' W2^{1/2}]; its range equals
  // the range of the normal matrix, and the minimum-norm preimage carries
  // the weighted pseudoinverse-image norm.
  const Index cols_f = bs.FF.rows();
  const Index cols_h = bs.HH.rows();
  Matrix a(bs.FF.cols(), cols_f + cols_h);
  a.leftCols(cols_f) = bs.FF.transpose() * spd_sqrt(bs.weight1);
  a.rightCols(cols_h) = bs.HH.transpose() * spd_sqrt(bs.weight2);

  Vector big = Vector::Zero(a.rows());
  big.tail(sys.n) = l;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  const Vector z = cod.solve(big);
  const double resid = (a * z - big).norm();

  RangeMembership out;
  out.member = resid <= 1e-6 * big.norm();
  out.norm_sq = out.member ? z.squaredNorm() : kInf;
  return out;
}

double support_function(const DescriptorSystem& sys, const std::vector<Vector>& y, int N,
                        const Vector& l, double tol_rel) {
  check_measurements(sys, y, N);
  if (l.size() != sys.n) throw DimensionMismatch("support_function: direction size");
  if (l.norm() == 0.0) throw ZeroDirection("support_function: zero direction");

  ObserverState state = init(sys, y[0], tol_rel);
  for (int k = 0; k < N; ++k) state = step(state, y[static_cast<size_t>(k) + 1]);

  const DirectionalError de = directional_error(state, l);
  if (!de.finite) return kInf;
  return de.estimate_component + de.sigma;
}

double support_function_direct(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               int N, const Vector& l, double tol_rel) {
  check_instance_size(sys, N);
  check_measurements(sys, y, N);
  if (l.size() != sys.n) throw DimensionMismatch("support_function_direct: direction size");
  if (l.norm() == 0.0) throw ZeroDirection("support_function_direct: zero direction");

  const NormalSystem ns = build_normal(sys, y, N);
  const SymPsdMatrix msym(ns.M);
  const PsdEig eig(msym, tol_rel);
  const Vector center = eig.pinv() * ns.b;
  const double budget = 1.0 - ns.c0 + ns.b.dot(center);
  if (budget < -1e-6) {
    throw InfeasibleData("support_function_direct: budget " + std::to_string(budget) +
                         " < -1e-6");
  }

  Vector big = Vector::Zero(ns.M.rows());
  big.tail(sys.n) = l;
  const Vector proj = eig.project_range(big);
  if ((proj - big).norm() > 1e-6 * big.norm()) return kInf;
  return big.dot(center) + std::sqrt(std::max(budget, 0.0)) * std::sqrt(eig.pinv_quad(big));
}

std::vector<CheckResult> cross_check(const DescriptorSystem& sys,
                                     const std::vector<Vector>& y, int N,
                                     const std::vector<Vector>& directions,
                                     double tol_rel) {
  check_instance_size(sys, N);
  check_measurements(sys, y, N);
  std::vector<CheckResult> results;

  // Forward recursion state at the horizon.
  ObserverState state = init(sys, y[0], tol_rel);
  for (int k = 0; k < N; ++k) state = step(state, y[static_cast<size_t>(k) + 1]);
  const Vector xh = estimate(state);

  const SmootherResult batch = batch_estimate(sys, y, N, tol_rel);
  const SmootherResult smooth = smooth_backward(sys, y, N, tol_rel);

  {
    // Terminal estimate: compare on the range of Q_N (kernel components of
    // the batch minimizer are not determined by the data).
    const Vector pb = state.qeig->project_range(batch.xhat.back());
    const double dev = (pb - xh).cwiseAbs().maxCoeff();
    const double gate = 1e-8 * (1.0 + batch.xhat.back().cwiseAbs().maxCoeff());
    results.push_back({"terminal_estimate_vs_batch", dev <= gate, dev, ""});
  }
  {
    double dev = 0.0;
    ObserverState s = init(sys, y[0], tol_rel);
    for (int k = 0; k <= N; ++k) {
      const Vector pa = s.qeig->project_range(smooth.xhat[static_cast<size_t>(k)]);
      const Vector pb = s.qeig->project_range(batch.xhat[static_cast<size_t>(k)]);
      dev = std::max(dev, (pa - pb).cwiseAbs().maxCoeff() /
                              (1.0 + batch.xhat[static_cast<size_t>(k)].cwiseAbs().maxCoeff()));
      if (k < N) s = step(s, y[static_cast<size_t>(k) + 1]);
    }
    results.push_back({"smoother_vs_batch", dev <= 1e-8, dev, ""});
  }
  {
    const double recursion_cost = state.alpha - state.qeig->pinv_quad(state.r);
    const double dev = std::abs(batch.cost - recursion_cost) / (1.0 + std::abs(recursion_cost));
    results.push_back({"batch_cost_identity", dev <= 1e-8, dev, ""});
  }

  for (size_t i = 0; i < directions.size(); ++i) {
    const Vector& l = directions[i];
    const std::string tag = "[" + std::to_string(i) + "]";

    const RangeMembership rm = range_membership(sys, N, l, tol_rel);
    const DirectionalError de = directional_error(state, l);
    const bool agree = rm.member == de.finite;
    double norm_dev = 0.0;
    if (rm.member && de.finite) {
      const double quad = state.qeig->pinv_quad(l);
      norm_dev = std::abs(rm.norm_sq - quad) / (1.0 + std::abs(quad));
    }
    results.push_back({"range_membership" + tag, agree && norm_dev <= 1e-6,
                       norm_dev, rm.member ? "member" : "not in range"});

    const double sp = support_function(sys, y, N, l, tol_rel);
    const double sm = support_function(sys, y, N, Vector(-l), tol_rel);
    if (std::isinf(sp) || std::isinf(sm)) {
      results.push_back({"support_function" + tag, std::isinf(sp) && std::isinf(sm) && !de.finite,
                         0.0, "infinite direction"});
    } else {
      const double dev_sym = std::abs(sp + sm - 2.0 * de.sigma) / (1.0 + std::abs(de.sigma));
      const double dev_est =
          std::abs(sp - sm - 2.0 * de.estimate_component) / (1.0 + std::abs(de.estimate_component));
      const double sd = support_function_direct(sys, y, N, l, tol_rel);
      const double dev_direct = std::abs(sd - sp) / (1.0 + std::abs(sp));
      const double dev = std::max({dev_sym, dev_est, dev_direct});
      results.push_back({"support_function" + tag, dev <= 1e-8, dev, ""});
    }
  }
  return results;
}

}  // namespace singulax
