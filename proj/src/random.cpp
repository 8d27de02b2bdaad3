#include <singulax/random.hpp>

#include <algorithm>
#include <cmath>
#include <memory>

#include <Eigen/QR>

namespace singulax {

namespace {

Matrix uniform_matrix(Rng& rng, Index rows, Index cols) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

Matrix random_spd(Rng& rng, Index dim) {
  const Matrix a = uniform_matrix(rng, dim, dim);
  return a * a.transpose() + 0.3 * Matrix::Identity(dim, dim);
}

// Stacked [F; H] with orthonormal columns times modest row scalings.
void regular_pair(Rng& rng, Index n, Index m, Index p, Matrix& f, Matrix& h) {
  const Matrix a = uniform_matrix(rng, m + p, n);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(m + p, n);
  std::uniform_real_distribution<double> scale(0.5, 1.5);
  for (Index i = 0; i < m + p; ++i) q.row(i) *= scale(rng);
  f = q.topRows(m);
  h = q.bottomRows(p);
}

}  // namespace

DescriptorSystem random_system(Rng& rng, const RandomSystemOptions& opts) {
  if (opts.regular && opts.m + opts.p < opts.n) {
    throw DimensionMismatch("random_system: a regular system needs m + p >= n");
  }
  const int K = opts.horizon;
  auto fs = std::make_shared<std::vector<Matrix>>();
  auto cs = std::make_shared<std::vector<Matrix>>();
  auto hs = std::make_shared<std::vector<Matrix>>();
  auto sks = std::make_shared<std::vector<Matrix>>();
  auto rks = std::make_shared<std::vector<Matrix>>();
  for (int k = 0; k <= K; ++k) {
    Matrix f, h;
    if (opts.regular) {
      regular_pair(rng, opts.n, opts.m, opts.p, f, h);
    } else {
      f = uniform_matrix(rng, opts.m, opts.n);
      h = uniform_matrix(rng, opts.p, opts.n);
    }
    fs->push_back(f);
    hs->push_back(h);
    cs->push_back(uniform_matrix(rng, opts.m, opts.n));
    sks->push_back(opts.unit_weights ? Matrix::Identity(opts.m, opts.m)
                                     : random_spd(rng, opts.m));
    rks->push_back(opts.unit_weights ? Matrix::Identity(opts.p, opts.p)
                                     : random_spd(rng, opts.p));
  }

  auto pick = [](const std::shared_ptr<std::vector<Matrix>>& seq) {
    return [seq](int k) {
      const size_t i = std::min<size_t>(static_cast<size_t>(k), seq->size() - 1);
      return (*seq)[i];
    };
  };

  DescriptorSystem sys;
  sys.n = opts.n;
  sys.m = opts.m;
  sys.p = opts.p;
  sys.F = pick(fs);
  sys.C = pick(cs);
  sys.H = pick(hs);
  sys.S = opts.unit_weights ? Matrix::Identity(opts.m, opts.m) : random_spd(rng, opts.m);
  sys.Sk = pick(sks);
  sys.Rk = pick(rks);
  return sys;
}

std::vector<Vector> random_measurements(Rng& rng, Index p, int N, double amplitude) {
  std::uniform_real_distribution<double> u(-amplitude, amplitude);
  std::vector<Vector> y;
  y.reserve(static_cast<size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    Vector v(p);
    for (Index i = 0; i < p; ++i) v(i) = u(rng);
    y.push_back(v);
  }
  return y;
}

FeasibleData random_feasible_measurements(Rng& rng, const DescriptorSystem& sys, int N,
                                          double budget) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  std::vector<Vector> x, f, g;
  x.reserve(static_cast<size_t>(N) + 1);
  for (int k = 0; k <= N; ++k) {
    Vector v(sys.n);
    for (Index i = 0; i < sys.n; ++i) v(i) = u(rng);
    x.push_back(v);
  }
  for (int k = 0; k < N; ++k) {
    f.push_back(sys.F_at(k + 1) * x[static_cast<size_t>(k) + 1] -
                sys.C_at(k) * x[static_cast<size_t>(k)]);
  }
  for (int k = 0; k <= N; ++k) {
    Vector v(sys.p);
    for (Index i = 0; i < sys.p; ++i) v(i) = u(rng);
    g.push_back(v);
  }
  const Vector q = sys.F_at(0) * x[0];

  // The budget is quadratic in the joint scale of (x, g); shrink both so
  // the realized triple sits strictly inside the constraint set.
  const double raw = constraint_value(sys, q, f, g);
  const double scale = raw > budget ? std::sqrt(budget / raw) : 1.0;

  FeasibleData out;
  out.x.reserve(x.size());
  out.y.reserve(x.size());
  double check = 0.0;
  {
    std::vector<Vector> fs, gs;
    Vector qs = scale * q;
    for (const Vector& v : f) fs.push_back(scale * v);
    for (const Vector& v : g) gs.push_back(scale * v);
    for (size_t k = 0; k < x.size(); ++k) {
      out.x.push_back(scale * x[k]);
      out.y.push_back(sys.H_at(static_cast<int>(k)) * out.x[k] + gs[k]);
    }
    check = constraint_value(sys, qs, fs, gs);
  }
  out.constraint = check;
  return out;
}

}  // namespace singulax
