#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <singulax/psd.hpp>

using namespace singulax;

namespace {

Matrix random_psd(std::mt19937_64& rng, Index dim, Index inner) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(inner, dim);
  for (Index i = 0; i < inner; ++i)
    for (Index j = 0; j < dim; ++j) a(i, j) = u(rng);
  return a.transpose() * a;
}

// Independent rank oracle: Gaussian elimination with full pivoting.
int elimination_rank(Matrix m, double tol) {
  const Index n = m.rows();
  int rank = 0;
  for (Index step = 0; step < n; ++step) {
    Index pi = step, pj = step;
    double best = 0.0;
    for (Index i = step; i < n; ++i)
      for (Index j = step; j < n; ++j)
        if (std::abs(m(i, j)) > best) {
          best = std::abs(m(i, j));
          pi = i;
          pj = j;
        }
    if (best <= tol) break;
    m.row(step).swap(m.row(pi));
    m.col(step).swap(m.col(pj));
    for (Index i = step + 1; i < n; ++i) {
      const double factor = m(i, step) / m(step, step);
      m.row(i) -= factor * m.row(step);
    }
    ++rank;
  }
  return rank;
}

double penrose_residual(const Matrix& m, const Matrix& p) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  double dev = (m * p * m - m).cwiseAbs().maxCoeff();
  dev = std::max(dev, (p * m * p - p).cwiseAbs().maxCoeff());
  dev = std::max(dev, ((m * p) - (m * p).transpose()).cwiseAbs().maxCoeff());
  dev = std::max(dev, ((p * m) - (p * m).transpose()).cwiseAbs().maxCoeff());
  return dev / scale;
}

}  // namespace

TEST_CASE("pinv of identity") {
  const PinvResult r = pinv_psd(SymPsdMatrix::identity(3));
  CHECK(r.rank == 3);
  CHECK((r.pinv.matrix() - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pinv of zero matrix") {
  const PinvResult r = pinv_psd(SymPsdMatrix::zero(2));
  CHECK(r.rank == 0);
  CHECK(r.pinv.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pinv of singular diagonal is exact") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 4.0;
  const PinvResult r = pinv_psd(SymPsdMatrix(m));
  CHECK(r.rank == 1);
  CHECK(r.pinv(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(r.pinv(0, 1) == 0.0);
  CHECK(r.pinv(1, 1) == 0.0);
}

TEST_CASE("pinv of a full-rank 2x2 equals its inverse") {
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  const PinvResult r = pinv_psd(SymPsdMatrix(m));
  CHECK(r.rank == 2);
  // oracle: direct inverse of [[2,1],[1,2]] is (1/3)[[2,-1],[-1,2]]
  CHECK(r.pinv(0, 0) == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(r.pinv(0, 1) == doctest::Approx(-1.0 / 3).epsilon(1e-12));
  CHECK(r.pinv(1, 1) == doctest::Approx(2.0 / 3).epsilon(1e-12));
}

TEST_CASE("construction rejects asymmetry and indefiniteness") {
  Matrix bad(2, 2);
  bad << 1, 0.5, 0.1, 1;
  CHECK_THROWS_AS(SymPsdMatrix{bad}, NotSymmetric);

  Matrix indef(2, 2);
  indef << 1, 0, 0, -1;
  CHECK_THROWS_AS(SymPsdMatrix{indef}, NotPsd);
}

TEST_CASE("min_eigenvalue basics") {
  CHECK(min_eigenvalue(SymPsdMatrix::identity(2)) == doctest::Approx(1.0));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 3.0;
  CHECK(min_eigenvalue(SymPsdMatrix(d)) == 0.0);
  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  // characteristic polynomial (2-l)^2 - 1 has roots 1 and 3
  CHECK(min_eigenvalue(SymPsdMatrix(m)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("project_range") {
  Vector v(2);
  v << 1, 2;
  CHECK((project_range(SymPsdMatrix::identity(2), v) - v).norm() == 0.0);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  const Vector pr = project_range(SymPsdMatrix(d), v);
  CHECK(pr(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pr(1) == 0.0);

  Matrix m(2, 2);
  m << 2, 1, 1, 2;
  CHECK((project_range(SymPsdMatrix(m), v) - v).norm() < 1e-12);

  Vector wrong(3);
  CHECK_THROWS_AS(project_range(SymPsdMatrix(m), wrong), DimensionMismatch);
}

TEST_CASE("project_range is idempotent") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 50; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    const Index inner = 1 + static_cast<Index>(rng() % 6);
    const SymPsdMatrix m(random_psd(rng, dim, inner));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = u(rng);
    const Vector p1 = project_range(m, v);
    const Vector p2 = project_range(m, p1);
    CHECK((p1 - p2).norm() <= 1e-12 * (1.0 + v.norm()));
  }
}

TEST_CASE("Penrose axioms over random PSD matrices") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 8);
    const Index inner = 1 + static_cast<Index>(rng() % 8);  // rank-deficient when inner < dim
    const Matrix m = random_psd(rng, dim, inner);
    const PinvResult r = pinv_psd(SymPsdMatrix(m));
    CHECK(penrose_residual(m, r.pinv.matrix()) <= 1e-8);
  }
}

TEST_CASE("double pseudoinverse restores the matrix") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    const Matrix m = random_psd(rng, dim, dim + 1);
    const PinvResult r1 = pinv_psd(SymPsdMatrix(m));
    // skip instances whose kept/truncated gap is too small for a clean restore
    if (r1.rank > 0 && r1.eigenvalues(r1.rank - 1) < 10.0 * r1.tol_used) continue;
    const PinvResult r2 = pinv_psd(r1.pinv);
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    CHECK((r2.pinv.matrix() - m).cwiseAbs().maxCoeff() <= 1e-7 * scale);
  }
}

TEST_CASE("rank agrees with the elimination oracle on integer PSD matrices") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    const Index inner = 1 + static_cast<Index>(rng() % 6);
    Matrix a(inner, dim);
    for (Index i = 0; i < inner; ++i)
      for (Index j = 0; j < dim; ++j)
        a(i, j) = static_cast<double>(static_cast<int>(rng() % 5)) - 2.0;
    const Matrix m = a.transpose() * a;
    const PinvResult r = pinv_psd(SymPsdMatrix(m));
    const int oracle = elimination_rank(m, 1e-6 * std::max(1.0, m.cwiseAbs().maxCoeff()));
    CHECK(r.rank == oracle);
  }
}

TEST_CASE("min_eigenvalue is zero exactly when rank deficient") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 60; ++t) {
    const Index dim = 1 + static_cast<Index>(rng() % 6);
    const Index inner = 1 + static_cast<Index>(rng() % 6);
    const Matrix m = random_psd(rng, dim, inner);
    const SymPsdMatrix sym(m);
    const PinvResult r = pinv_psd(sym);
    const double lmin = min_eigenvalue(sym);
    if (r.rank < dim) {
      CHECK(lmin <= r.tol_used);
    } else {
      CHECK(lmin > r.tol_used);
    }
  }
}

TEST_CASE("rectangular pseudoinverse via the normal matrix") {
  Matrix f(2, 3);
  f << 1, 0, 0,
       0, 1, 0;
  const Matrix fp = pinv_rect(f);
  CHECK(fp.rows() == 3);
  CHECK(fp.cols() == 2);
  CHECK((f * fp - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fp.row(2).cwiseAbs().maxCoeff() == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 40; ++t) {
    const Index rows = 1 + static_cast<Index>(rng() % 5);
    const Index cols = 1 + static_cast<Index>(rng() % 5);
    Matrix a(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) a(i, j) = u(rng);
    const Matrix ap = pinv_rect(a);
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    CHECK((a * ap * a - a).cwiseAbs().maxCoeff() <= 1e-8 * scale);
    CHECK((ap * a * ap - ap).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  }
}

TEST_CASE("structurally zero rows stay exactly zero in the pseudoinverse") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = 2.0;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  m(1, 1) = 2.0;
  const PinvResult r = pinv_psd(SymPsdMatrix(m));
  CHECK(r.rank == 2);
  for (Index i = 0; i < 3; ++i) {
    CHECK(r.pinv(2, i) == 0.0);
    CHECK(r.pinv(i, 2) == 0.0);
  }
  Vector v(3);
  v << 1, 1, 1;
  const Vector pr = project_range(SymPsdMatrix(m), v);
  CHECK(pr(2) == 0.0);
}
