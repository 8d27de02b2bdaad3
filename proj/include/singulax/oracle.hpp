#pragma once

#include <string>
#include <vector>

#include <singulax/model.hpp>
#include <singulax/observer.hpp>

namespace singulax {

/// Whole-trajectory (stacked) form of the system over steps 0..N:
///
///   FF = | F_0            |   HH = | H_0          |
///        | -C_0  F_1      |        |      H_1     |
///        |      -C_1  F_2 |        |          ... |
///
/// weight1 = blkdiag(S, S_0, ..., S_{N-1}), weight2 = blkdiag(R_0, ..., R_N).
struct BlockSystem {
  int N = 0;
  Matrix FF;       // (N+1)m x (N+1)n
  Matrix HH;       // (N+1)p x (N+1)n
  Matrix weight1;  // (N+1)m square
  Matrix weight2;  // (N+1)p square
};

BlockSystem build_block_system(const DescriptorSystem& sys, int N);

/// Smoothed trajectory estimate and the fitting cost at the minimizer.
struct SmootherResult {
  std::vector<Vector> xhat;  // N+1 blocks
  double cost = 0.0;
};

/// Minimizes the weighted fitting cost
///
///   J(X) = |F_0 x_0 - prior|^2_S + sum |F_k x_k - C_{k-1} x_{k-1} - fbar|^2_{S}
///          + sum |y_k - H_k x_k|^2_{R}
///
/// over the stacked trajectory via the normal equations of the block system,
/// taking the minimum-norm solution. Returns all smoothed states and the
/// minimal cost (evaluated on the residuals).
SmootherResult batch_estimate(const DescriptorSystem& sys, const std::vector<Vector>& y,
                              int N, double tol_rel = 0.0);

/// Same minimizer through the forward Q/r recursion plus the backward
/// substitution x_k = W_k^+ (C_k' S_k (F_{k+1} x_{k+1} - fbar_k) + r_k),
/// starting from x_N = Q_N^+ r_N. The cost is taken from the forward pass:
/// alpha_N - (r_N, Q_N^+ r_N).
SmootherResult smooth_backward(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               int N, double tol_rel = 0.0);

struct RangeMembership {
  bool member = false;
  double norm_sq = 0.0;  // squared weighted pseudoinverse-image norm
};

/// Tests whether the stacked direction [0,...,0,l] lies in the range of the
/// weighted stacked operator [FF' HH'] by solving the least-squares system
/// directly (complete orthogonal decomposition), and returns the squared
/// norm of the minimum-norm preimage.
RangeMembership range_membership(const DescriptorSystem& sys, int N, const Vector& l,
                                 double tol_rel = 0.0);

/// Support function of the a-posteriori set in the stacked direction
/// [0,...,0,l], computed from the forward recursion:
///   (l, Q_N^+ r_N) + sqrt(beta_N) (Q_N^+ l, l)^{1/2}
/// when l is reachable, +inf otherwise.
double support_function(const DescriptorSystem& sys, const std::vector<Vector>& y, int N,
                        const Vector& l, double tol_rel = 0.0);

/// Same value computed without the recursion: center and radius of the
/// a-posteriori set are taken from the stacked normal equations and the
/// quadratic-constraint closed form.
double support_function_direct(const DescriptorSystem& sys, const std::vector<Vector>& y,
                               int N, const Vector& l, double tol_rel = 0.0);

/// One named consistency check; `residual` is the measured deviation and
/// `pass` compares it against the check's gate.
struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string details;
};

/// Cross-validates the online observer against the batch machinery on one
/// data set: terminal-estimate agreement, backward smoother agreement,
/// cost identity, range membership vs the projection test, and the
/// support-function identities for every requested direction.
std::vector<CheckResult> cross_check(const DescriptorSystem& sys,
                                     const std::vector<Vector>& y, int N,
                                     const std::vector<Vector>& directions,
                                     double tol_rel = 0.0);

}  // namespace singulax
