#pragma once

#include <functional>
#include <vector>

#include <singulax/errors.hpp>
#include <singulax/psd.hpp>
#include <singulax/types.hpp>

namespace singulax {

using StepMatrixFn = std::function<Matrix(int)>;
using StepVectorFn = std::function<Vector(int)>;

/// Linear time-varying descriptor system
///
///   F_{k+1} x_{k+1} - C_k x_k = f_k,   F_0 x_0 = q,   y_k = H_k x_k + g_k
///
/// together with the symmetric positive definite weight families (S, S_k,
/// R_k) that define the uncertainty budget
///
///   (S q, q) + sum_{k<N} (S_k f_k, f_k) + sum_{k<=N} (R_k g_k, g_k) <= 1.
///
/// F_k and C_k are m x n, H_k is p x n. `known_input` is the nominal input
/// sequence (zero by default) and `prior` the nominal value of q (zero by
/// default); both only matter for the estimation-side recursions.
struct DescriptorSystem {
  Index n = 0;
  Index m = 0;
  Index p = 0;
  StepMatrixFn F;
  StepMatrixFn C;
  StepMatrixFn H;
  Matrix S;  // m x m, positive definite
  StepMatrixFn Sk;
  StepMatrixFn Rk;
  StepVectorFn known_input;  // optional; empty means zero
  Vector prior;              // optional; zero-sized means zero

  /// Checked accessors; every matrix family must return consistent
  /// dimensions for all steps >= 0.
  Matrix F_at(int k) const;
  Matrix C_at(int k) const;
  Matrix H_at(int k) const;
  Matrix S_weight() const;
  Matrix Sk_at(int k) const;
  Matrix Rk_at(int k) const;
  Vector input_at(int k) const;
  Vector prior_or_zero() const;

  /// Convenience constructor for time-invariant systems.
  static DescriptorSystem constant(const Matrix& f, const Matrix& c, const Matrix& h,
                                   const Matrix& s, const Matrix& sk, const Matrix& rk);
};

/// The quadratic uncertainty budget evaluated on a triple (q, {f_k}, {g_k});
/// membership in the constraint set means the value is <= 1.
double constraint_value(const DescriptorSystem& sys, const Vector& q,
                        const std::vector<Vector>& f, const std::vector<Vector>& g);

/// A realized trajectory of the system over steps 0..N. Residuals
/// F_{k+1} x_{k+1} - C_k x_k - f_k and y_k - H_k x_k - g_k are exactly zero
/// as constructed (f and g store the realized values).
struct Trajectory {
  std::vector<Vector> x;  // N+1 states
  std::vector<Vector> f;  // N disturbances
  std::vector<Vector> g;  // N+1 measurement noises
  std::vector<Vector> y;  // N+1 outputs
  Vector q;
  double constraint_value = 0.0;

  int steps() const { return static_cast<int>(y.size()) - 1; }
};

/// Simulates the descriptor recursion with the minimum-norm particular
/// solution plus an explicit kernel component:
///
///   x_{k+1} = F_{k+1}^+ (C_k x_k + f_k) + (I - F_{k+1}^+ F_{k+1}) free(k)
///
/// free_gen defaults to zero. Throws InconsistentStep when C_k x_k + f_k is
/// not in range(F_{k+1}), i.e. the descriptor step has no solution.
Trajectory simulate(const DescriptorSystem& sys, int steps, const Vector& x0,
                    const StepVectorFn& f_gen, const StepVectorFn& g_gen,
                    const StepVectorFn& free_gen = {});

/// The built-in 3-state noncausal example system (n=3, m=2, p=4) with
/// time-varying output matrices whose third column is active only at even
/// steps k >= 2, so the causality index alternates between 3 and 2.
DescriptorSystem paper_example_system();

/// Deterministic bounded generators used as the default noise for the
/// built-in example (m = 2, p = 4).
StepVectorFn example_disturbance(double amplitude);
StepVectorFn example_noise(double amplitude);
/// Kernel motion for the built-in example: excites the coordinates that the
/// descriptor step leaves free. Component j at step k is amp * sin(k+1+j).
StepVectorFn example_free_motion(Index n, double amplitude);

}  // namespace singulax
