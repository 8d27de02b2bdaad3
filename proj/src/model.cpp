#include <singulax/model.hpp>

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace singulax {

namespace {

Matrix checked(const StepMatrixFn& fn, int k, Index rows, Index cols, const char* name) {
  if (!fn) throw ConfigError(std::string(name) + " family is not set");
  Matrix m = fn(k);
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionMismatch(std::string(name) + "(" + std::to_string(k) + ") is " +
                            std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                            ", expected " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
  return m;
}

void require_spd(const Matrix& w, const std::string& name) {
  if (w.rows() != w.cols()) throw DimensionMismatch(name + " must be square");
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  if ((w - w.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) {
    throw NotSymmetric(name + " is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (w + w.transpose()),
                                           Eigen::EigenvaluesOnly);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  if (es.eigenvalues().minCoeff() <= 1e-12 * std::max(lmax, 1.0)) {
    throw NotPsd(name + " must be positive definite (min eigenvalue " +
                 std::to_string(es.eigenvalues().minCoeff()) + ")");
  }
}

}  // namespace

Matrix DescriptorSystem::F_at(int k) const { return checked(F, k, m, n, "F"); }
Matrix DescriptorSystem::C_at(int k) const { return checked(C, k, m, n, "C"); }
Matrix DescriptorSystem::H_at(int k) const { return checked(H, k, p, n, "H"); }

Matrix DescriptorSystem::S_weight() const {
  if (S.rows() != m || S.cols() != m) {
    throw DimensionMismatch("S is " + std::to_string(S.rows()) + "x" +
                            std::to_string(S.cols()) + ", expected " + std::to_string(m) +
                            "x" + std::to_string(m));
  }
  require_spd(S, "S");
  return S;
}

Matrix DescriptorSystem::Sk_at(int k) const {
  Matrix w = checked(Sk, k, m, m, "S_k");
  require_spd(w, "S_" + std::to_string(k));
  return w;
}

Matrix DescriptorSystem::Rk_at(int k) const {
  Matrix w = checked(Rk, k, p, p, "R_k");
  require_spd(w, "R_" + std::to_string(k));
  return w;
}

Vector DescriptorSystem::input_at(int k) const {
  if (!known_input) return Vector::Zero(m);
  Vector v = known_input(k);
  if (v.size() != m) {
    throw DimensionMismatch("known_input(" + std::to_string(k) + ") has size " +
                            std::to_string(v.size()) + ", expected " + std::to_string(m));
  }
  return v;
}

Vector DescriptorSystem::prior_or_zero() const {
  if (prior.size() == 0) return Vector::Zero(m);
  if (prior.size() != m) {
    throw DimensionMismatch("prior has size " + std::to_string(prior.size()) +
                            ", expected " + std::to_string(m));
  }
  return prior;
}

DescriptorSystem DescriptorSystem::constant(const Matrix& f, const Matrix& c,
                                            const Matrix& h, const Matrix& s,
                                            const Matrix& sk, const Matrix& rk) {
  DescriptorSystem sys;
  sys.m = f.rows();
  sys.n = f.cols();
  sys.p = h.rows();
  sys.F = [f](int) { return f; };
  sys.C = [c](int) { return c; };
  sys.H = [h](int) { return h; };
  sys.S = s;
  sys.Sk = [sk](int) { return sk; };
  sys.Rk = [rk](int) { return rk; };
  return sys;
}

double constraint_value(const DescriptorSystem& sys, const Vector& q,
                        const std::vector<Vector>& f, const std::vector<Vector>& g) {
  if (g.empty()) throw DimensionMismatch("constraint_value: needs at least g_0");
  if (f.size() + 1 != g.size()) {
    throw DimensionMismatch("constraint_value: got " + std::to_string(f.size()) +
                            " disturbances and " + std::to_string(g.size()) +
                            " noises; expected one more noise than disturbances");
  }
  if (q.size() != sys.m) throw DimensionMismatch("constraint_value: q has wrong size");
  double acc = q.dot(sys.S_weight() * q);
  for (size_t k = 0; k < f.size(); ++k) {
    if (f[k].size() != sys.m) throw DimensionMismatch("constraint_value: f size");
    acc += f[k].dot(sys.Sk_at(static_cast<int>(k)) * f[k]);
  }
  for (size_t k = 0; k < g.size(); ++k) {
    if (g[k].size() != sys.p) throw DimensionMismatch("constraint_value: g size");
    acc += g[k].dot(sys.Rk_at(static_cast<int>(k)) * g[k]);
  }
  return acc;
}

Trajectory simulate(const DescriptorSystem& sys, int steps, const Vector& x0,
                    const StepVectorFn& f_gen, const StepVectorFn& g_gen,
                    const StepVectorFn& free_gen) {
  if (steps < 0) throw DimensionMismatch("simulate: steps must be >= 0");
  if (x0.size() != sys.n) throw DimensionMismatch("simulate: x0 has wrong size");

  Trajectory t;
  t.x.reserve(static_cast<size_t>(steps) + 1);
  t.x.push_back(x0);
  t.q = sys.F_at(0) * x0;

  for (int k = 0; k < steps; ++k) {
    const Vector fk = f_gen ? f_gen(k) : Vector::Zero(sys.m);
    if (fk.size() != sys.m) throw DimensionMismatch("simulate: f_gen size");
    const Matrix fn = sys.F_at(k + 1);
    const Matrix fp = pinv_rect(fn);
    const Vector rhs = sys.C_at(k) * t.x[static_cast<size_t>(k)] + fk;
    Vector xn = fp * rhs;
    if (free_gen) {
      Vector fr = free_gen(k);
      if (fr.size() != sys.n) throw DimensionMismatch("simulate: free_gen size");
      xn += fr - fp * (fn * fr);
    }
    const double resid = (fn * xn - rhs).norm();
    if (resid > 1e-9 * (1.0 + rhs.norm())) {
      throw InconsistentStep("step " + std::to_string(k) + ": C_k x_k + f_k is not in "
                             "range(F_{k+1}), residual " + std::to_string(resid), k);
    }
    t.x.push_back(xn);
    // Store the realized disturbance so the trajectory residuals are exact.
    t.f.push_back(fn * xn - sys.C_at(k) * t.x[static_cast<size_t>(k)]);
  }

  for (int k = 0; k <= steps; ++k) {
    Vector gk = g_gen ? g_gen(k) : Vector::Zero(sys.p);
    if (gk.size() != sys.p) throw DimensionMismatch("simulate: g_gen size");
    t.g.push_back(gk);
    t.y.push_back(sys.H_at(k) * t.x[static_cast<size_t>(k)] + gk);
  }

  t.constraint_value = constraint_value(sys, t.q, t.f, t.g);
  return t;
}

DescriptorSystem paper_example_system() {
  DescriptorSystem sys;
  sys.n = 3;
  sys.m = 2;
  sys.p = 4;

  Matrix f(2, 3);
  f << 1, 0, 0,
       0, 1, 0;
  Matrix c(2, 3);
  c << 1.0 / 40, 1.0 / 2, 0,
       1.0 / 10, 1.0 / 4, 3.0 / 10;
  Matrix h0(4, 3);
  h0 << 0.6, 0.96, 0,
        1000, 2.3, 0,
        1, 0.1, 0,
        0, 0, 0;

  sys.F = [f](int) { return f; };
  sys.C = [c](int) { return c; };
  sys.H = [h0](int k) -> Matrix {
    if (k == 0) return h0;
    const double kk = k;
    // The third output channel observes the free coordinate only at even
    // steps; at odd steps that coordinate is invisible to the data.
    const double active = (k % 2 == 0) ? 1.0 : 0.0;
    Matrix h(4, 3);
    h << 0.6 * kk, kk, 0,
         100.0 * kk, kk / 100.0, 0,
         0, 0.005, 150.0 * kk * active,
         0.05, 10.0 * kk, 0;
    return h;
  };

  Matrix s(2, 2);
  s << 1.0 / 60, 0,
       0, 1.0 / 120;
  sys.S = s;
  sys.Sk = [](int k) -> Matrix {
    const double d = k + 1.0;
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 1.0 / (35.0 * d);
    w(1, 1) = 1.0 / (70.0 * d);
    return w;
  };
  sys.Rk = [](int k) -> Matrix {
    const double d = k + 1.0;
    Matrix w = Matrix::Zero(4, 4);
    w(0, 0) = 1.0 / (11.0 * d);
    w(1, 1) = 1.0 / (22.0 * d);
    w(2, 2) = 1.0 / (33.0 * d);
    w(3, 3) = 1.0 / (44.0 * d);
    return w;
  };
  return sys;
}

StepVectorFn example_disturbance(double amplitude) {
  return [amplitude](int k) {
    Vector f(2);
    f << std::sin(k + 1.0), std::cos(2.0 * k);
    return Vector(amplitude * f);
  };
}

StepVectorFn example_noise(double amplitude) {
  return [amplitude](int k) {
    Vector g(4);
    g << std::sin(3.0 * k), std::cos(1.0 * k), std::sin(5.0 * k), std::cos(7.0 * k);
    return Vector(amplitude * g);
  };
}

StepVectorFn example_free_motion(Index n, double amplitude) {
  return [n, amplitude](int k) {
    Vector v(n);
    for (Index j = 0; j < n; ++j) v(j) = amplitude * std::sin(k + 1.0 + static_cast<double>(j));
    return v;
  };
}

}  // namespace singulax
