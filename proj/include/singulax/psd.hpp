#pragma once

#include <singulax/errors.hpp>
#include <singulax/types.hpp>

namespace singulax {

/// Relative eigenvalue threshold used for rank decisions when the caller
/// passes 0. The absolute cutoff is tol_rel * max(lambda_max, 1).
double default_rank_tol(Index dim);

struct PinvResult;

/// Dense symmetric positive-semidefinite matrix. Entries are symmetrized
/// exactly on construction; eigenvalues below -tol fail construction.
class SymPsdMatrix {
 public:
  /// Symmetrizes m and verifies positive semidefiniteness.
  /// Throws NotSymmetric if the asymmetry of m exceeds the representation
  /// tolerance, NotPsd if the smallest eigenvalue is below -tol, where
  /// tol = (tol_rel > 0 ? tol_rel : default_rank_tol(dim)) * max(lambda_max, 1).
  explicit SymPsdMatrix(const Eigen::Ref<const Matrix>& m, double tol_rel = 0.0);

  static SymPsdMatrix identity(Index dim);
  static SymPsdMatrix zero(Index dim);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }

 private:
  struct trusted_t {};
  SymPsdMatrix(Matrix m, trusted_t) : m_(std::move(m)) {}

  Matrix m_;

  friend struct PinvResult;
  friend PinvResult pinv_psd(const SymPsdMatrix&, double);
};

/// Full symmetric eigendecomposition with exact handling of structurally
/// zero rows: indices whose row is exactly zero are deflated before the
/// solve, so the corresponding rows/columns of every derived quantity
/// (pseudoinverse, range projector) are exactly zero.
class PsdEig {
 public:
  explicit PsdEig(const SymPsdMatrix& m, double tol_rel = 0.0);

  Index dim() const { return vectors_.rows(); }
  /// Eigenvalues in descending order (raw, may contain tiny negatives).
  const Vector& eigenvalues() const { return values_; }
  /// Orthonormal eigenvectors, columns aligned with eigenvalues().
  const Matrix& eigenvectors() const { return vectors_; }
  double tol_used() const { return tol_; }
  /// Number of eigenvalues strictly above tol_used().
  Index rank() const { return rank_; }

  /// Moore-Penrose pseudoinverse: eigenvalues <= tol are truncated to zero.
  Matrix pinv() const;
  /// Orthogonal projection of v onto the range (span of kept eigenvectors).
  Vector project_range(const Eigen::Ref<const Vector>& v) const;
  /// Quadratic form (M^+ v, v), evaluated through the eigenbasis.
  double pinv_quad(const Eigen::Ref<const Vector>& v) const;

 private:
  Vector values_;
  Matrix vectors_;
  double tol_ = 0.0;
  Index rank_ = 0;
};

struct PinvResult {
  SymPsdMatrix pinv;
  Index rank;
  Vector eigenvalues;  // descending, negatives clamped to 0
  double tol_used;
};

/// Pseudoinverse of a symmetric PSD matrix via full eigendecomposition.
PinvResult pinv_psd(const SymPsdMatrix& m, double tol_rel = 0.0);

/// Smallest eigenvalue, clamped at 0.
double min_eigenvalue(const SymPsdMatrix& m);

/// Orthogonal projection of v onto range(M). Idempotent.
Vector project_range(const SymPsdMatrix& m, const Eigen::Ref<const Vector>& v,
                     double tol_rel = 0.0);

/// Moore-Penrose pseudoinverse of a general rectangular matrix, computed
/// through the PSD pseudoinverse of F'F:  F^+ = (F'F)^+ F'.
Matrix pinv_rect(const Eigen::Ref<const Matrix>& f, double tol_rel = 0.0);

}  // namespace singulax
