#include <singulax/psd.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>

namespace singulax {

double default_rank_tol(Index dim) { return 1e-10 * static_cast<double>(dim); }

namespace {

double abs_tol(const Vector& eigenvalues, Index dim, double tol_rel) {
  const double lmax = eigenvalues.size() > 0 ? std::max(eigenvalues.maxCoeff(), 0.0) : 0.0;
  const double rel = tol_rel > 0.0 ? tol_rel : default_rank_tol(dim);
  return rel * std::max(lmax, 1.0);
}

}  // namespace

SymPsdMatrix::SymPsdMatrix(const Eigen::Ref<const Matrix>& m, double tol_rel) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionMismatch("SymPsdMatrix requires a nonempty square matrix, got " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw NotSymmetric("matrix asymmetry " + std::to_string(asym) +
                       " exceeds tolerance " + std::to_string(1e-8 * scale));
  }
  m_ = 0.5 * (m + m.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  const double tol = abs_tol(es.eigenvalues(), m_.rows(), tol_rel);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin < -tol) {
    throw NotPsd("smallest eigenvalue " + std::to_string(lmin) +
                 " below -" + std::to_string(tol));
  }
}

SymPsdMatrix SymPsdMatrix::identity(Index dim) {
  return SymPsdMatrix(Matrix::Identity(dim, dim), trusted_t{});
}

SymPsdMatrix SymPsdMatrix::zero(Index dim) {
  return SymPsdMatrix(Matrix::Zero(dim, dim), trusted_t{});
}

PsdEig::PsdEig(const SymPsdMatrix& m, double tol_rel) {
  const Matrix& a = m.matrix();
  const Index n = a.rows();

  // Deflate rows that are exactly zero; their eigenpairs are (0, e_i) and
  // keeping them out of the dense solve preserves the exact zeros in the
  // pseudoinverse and the range projector.
  std::vector<Index> live;
  live.reserve(n);
  for (Index i = 0; i < n; ++i) {
    if ((a.row(i).array() != 0.0).any()) live.push_back(i);
  }

  values_ = Vector::Zero(n);
  vectors_ = Matrix::Zero(n, n);

  const Index nl = static_cast<Index>(live.size());
  if (nl > 0) {
    Matrix sub(nl, nl);
    for (Index i = 0; i < nl; ++i)
      for (Index j = 0; j < nl; ++j) sub(i, j) = a(live[i], live[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
    // Descending order; deflated zeros go last.
    for (Index c = 0; c < nl; ++c) {
      const Index src = nl - 1 - c;  // Eigen returns ascending
      values_(c) = es.eigenvalues()(src);
      for (Index i = 0; i < nl; ++i) vectors_(live[i], c) = es.eigenvectors()(i, src);
    }
  }
  Index c = nl;
  for (Index i = 0; i < n; ++i) {
    if (std::find(live.begin(), live.end(), i) == live.end()) {
      vectors_(i, c) = 1.0;
      ++c;
    }
  }
  // A deflated matrix can still have interior negatives sorted after the
  // appended zeros; restore a globally descending order.
  if (nl > 0 && nl < n && values_(nl - 1) < 0.0) {
    std::vector<Index> perm(static_cast<size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](Index x, Index y) { return values_(x) > values_(y); });
    Vector v2(n);
    Matrix w2(n, n);
    for (Index k = 0; k < n; ++k) {
      v2(k) = values_(perm[static_cast<size_t>(k)]);
      w2.col(k) = vectors_.col(perm[static_cast<size_t>(k)]);
    }
    values_ = std::move(v2);
    vectors_ = std::move(w2);
  }

  tol_ = abs_tol(values_, n, tol_rel);
  rank_ = 0;
  while (rank_ < n && values_(rank_) > tol_) ++rank_;
}

Matrix PsdEig::pinv() const {
  const Index n = dim();
  Matrix p = Matrix::Zero(n, n);
  if (rank_ > 0) {
    const auto vk = vectors_.leftCols(rank_);
    p.noalias() = vk * values_.head(rank_).cwiseInverse().asDiagonal() * vk.transpose();
    p = 0.5 * (p + p.transpose()).eval();
  }
  return p;
}

Vector PsdEig::project_range(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != dim()) {
    throw DimensionMismatch("project_range: vector of size " + std::to_string(v.size()) +
                            " against matrix of dim " + std::to_string(dim()));
  }
  if (rank_ == 0) return Vector::Zero(dim());
  const auto vk = vectors_.leftCols(rank_);
  return vk * (vk.transpose() * v);
}

double PsdEig::pinv_quad(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != dim()) {
    throw DimensionMismatch("pinv_quad: dimension mismatch");
  }
  double acc = 0.0;
  for (Index i = 0; i < rank_; ++i) {
    const double c = vectors_.col(i).dot(v);
    acc += c * c / values_(i);
  }
  return acc;
}

PinvResult pinv_psd(const SymPsdMatrix& m, double tol_rel) {
  PsdEig eig(m, tol_rel);
  const double lmin = eig.eigenvalues().minCoeff();
  if (lmin < -eig.tol_used()) {
    throw NotPsd("pinv_psd: smallest eigenvalue " + std::to_string(lmin) +
                 " below -" + std::to_string(eig.tol_used()));
  }
  return PinvResult{SymPsdMatrix(eig.pinv(), SymPsdMatrix::trusted_t{}),
                    eig.rank(), eig.eigenvalues().cwiseMax(0.0), eig.tol_used()};
}

double min_eigenvalue(const SymPsdMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.matrix(), Eigen::EigenvaluesOnly);
  return std::max(es.eigenvalues().minCoeff(), 0.0);
}

Vector project_range(const SymPsdMatrix& m, const Eigen::Ref<const Vector>& v,
                     double tol_rel) {
  return PsdEig(m, tol_rel).project_range(v);
}

Matrix pinv_rect(const Eigen::Ref<const Matrix>& f, double tol_rel) {
  const Matrix g = f.transpose() * f;
  const PinvResult gp = pinv_psd(SymPsdMatrix(g), tol_rel);
  return gp.pinv.matrix() * f.transpose();
}

}  // namespace singulax
