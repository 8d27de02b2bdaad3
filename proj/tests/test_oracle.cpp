#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <singulax/oracle.hpp>
#include <singulax/random.hpp>

using namespace singulax;

namespace {

DescriptorSystem scalar_ones() {
  Matrix one = Matrix::Identity(1, 1);
  return DescriptorSystem::constant(one, one, one, one, one, one);
}

Vector vec1(double v) {
  Vector x(1);
  x << v;
  return x;
}

struct RandomInstance {
  DescriptorSystem sys;
  std::vector<Vector> y;
  int N;
};

RandomInstance make_instance(std::mt19937_64& rng, bool feasible) {
  RandomSystemOptions opts;
  opts.n = 1 + static_cast<Index>(rng() % 4);
  opts.m = 1 + static_cast<Index>(rng() % 4);
  opts.p = 1 + static_cast<Index>(rng() % 3);
  opts.horizon = static_cast<int>(rng() % 12);
  RandomInstance inst{random_system(rng, opts), {}, opts.horizon};
  if (feasible) {
    inst.y = random_feasible_measurements(rng, inst.sys, inst.N).y;
  } else {
    inst.y = random_measurements(rng, opts.p, inst.N);
  }
  return inst;
}

}  // namespace

TEST_CASE("block system for N=0 is the step-0 pair") {
  const DescriptorSystem sys = paper_example_system();
  const BlockSystem bs = build_block_system(sys, 0);
  CHECK(bs.FF.rows() == 2);
  CHECK(bs.FF.cols() == 3);
  CHECK((bs.FF - sys.F_at(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((bs.HH - sys.H_at(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((bs.weight1 - sys.S).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("block system for the scalar system at N=1") {
  const DescriptorSystem sys = scalar_ones();
  const BlockSystem bs = build_block_system(sys, 1);
  Matrix expected(2, 2);
  expected << 1, 0, -1, 1;
  CHECK((bs.FF - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("block system of the builtin example at N=2") {
  const DescriptorSystem sys = paper_example_system();
  const BlockSystem bs = build_block_system(sys, 2);
  CHECK(bs.FF.rows() == 6);
  CHECK(bs.FF.cols() == 9);
  CHECK((bs.FF.block(2, 0, 2, 3) + sys.C_at(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((bs.FF.block(4, 3, 2, 3) + sys.C_at(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(bs.FF.block(0, 3, 2, 6).cwiseAbs().maxCoeff() == 0.0);  // off-pattern blocks
  CHECK(bs.FF.block(2, 6, 2, 3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(bs.HH.block(0, 3, 4, 6).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stacked residuals equal per-step residuals on a random trajectory") {
  std::mt19937_64 rng(31);
  RandomSystemOptions opts;
  opts.n = 3;
  opts.m = 2;
  opts.p = 2;
  opts.horizon = 6;
  const DescriptorSystem sys = random_system(rng, opts);
  const FeasibleData data = random_feasible_measurements(rng, sys, opts.horizon);
  const BlockSystem bs = build_block_system(sys, opts.horizon);

  Vector stacked(static_cast<Index>(data.x.size()) * opts.n);
  for (size_t k = 0; k < data.x.size(); ++k)
    stacked.segment(static_cast<Index>(k) * opts.n, opts.n) = data.x[k];
  const Vector res = bs.FF * stacked;
  CHECK((res.head(opts.m) - sys.F_at(0) * data.x[0]).cwiseAbs().maxCoeff() < 1e-14);
  for (int k = 1; k <= opts.horizon; ++k) {
    const Vector expect = sys.F_at(k) * data.x[static_cast<size_t>(k)] -
                          sys.C_at(k - 1) * data.x[static_cast<size_t>(k) - 1];
    CHECK((res.segment(k * opts.m, opts.m) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("batch estimate on the scalar system") {
  const DescriptorSystem sys = scalar_ones();
  // minimize x^2 + (1 - x)^2
  const SmootherResult r = batch_estimate(sys, {vec1(1.0)}, 0);
  CHECK(r.xhat[0](0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.cost == doctest::Approx(0.5).epsilon(1e-12));

  const SmootherResult z = batch_estimate(sys, {vec1(0.0), vec1(0.0), vec1(0.0)}, 2);
  for (const Vector& x : z.xhat) CHECK(x.cwiseAbs().maxCoeff() == 0.0);
  CHECK(z.cost == 0.0);
}

TEST_CASE("backward smoother equals batch at N=0") {
  const DescriptorSystem sys = scalar_ones();
  const SmootherResult a = batch_estimate(sys, {vec1(1.0)}, 0);
  const SmootherResult b = smooth_backward(sys, {vec1(1.0)}, 0);
  CHECK(b.xhat[0](0) == doctest::Approx(a.xhat[0](0)).epsilon(1e-12));
  CHECK(b.cost == doctest::Approx(a.cost).epsilon(1e-12));
}

TEST_CASE("backward smoother hand values for the scalar system") {
  const DescriptorSystem sys = scalar_ones();
  const SmootherResult r = smooth_backward(sys, {vec1(1.0), vec1(0.0)}, 1);
  // forward: Q1 = 5/3, r1 = 1/3; terminal: x_{1|1} = 0.2
  CHECK(r.xhat[1](0) == doctest::Approx(0.2).epsilon(1e-12));
  // backward: x_{0|1} = W0^+ (C'S(F * 0.2) + r0) = (0.2 + 1)/3 = 0.4
  CHECK(r.xhat[0](0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("batch, smoother and observer agree on random systems") {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 40; ++t) {
    const RandomInstance inst = make_instance(rng, false);
    const SmootherResult batch = batch_estimate(inst.sys, inst.y, inst.N);
    const SmootherResult smooth = smooth_backward(inst.sys, inst.y, inst.N);

    ObserverState s = init(inst.sys, inst.y[0]);
    for (int k = 0; k < inst.N; ++k) s = step(s, inst.y[static_cast<size_t>(k) + 1]);
    const Vector xh = estimate(s);

    // terminal block (range components when the normal matrix is singular)
    const Vector pb = s.qeig->project_range(batch.xhat.back());
    const double scale = 1.0 + batch.xhat.back().cwiseAbs().maxCoeff();
    CHECK((pb - xh).cwiseAbs().maxCoeff() <= 1e-8 * scale);

    // every smoothed block agrees with the batch minimizer on range components
    ObserverState sk = init(inst.sys, inst.y[0]);
    for (int k = 0; k <= inst.N; ++k) {
      const Vector pa = sk.qeig->project_range(smooth.xhat[static_cast<size_t>(k)]);
      const Vector pc = sk.qeig->project_range(batch.xhat[static_cast<size_t>(k)]);
      CHECK((pa - pc).cwiseAbs().maxCoeff() <=
            1e-8 * (1.0 + batch.xhat[static_cast<size_t>(k)].cwiseAbs().maxCoeff()));
      if (k < inst.N) sk = step(sk, inst.y[static_cast<size_t>(k) + 1]);
    }

    // cost identity against the forward recursion
    const double recursion_cost = s.alpha - s.qeig->pinv_quad(s.r);
    CHECK(batch.cost == doctest::Approx(recursion_cost).epsilon(1e-8));
  }
}

TEST_CASE("range membership: trivial and unobservable directions") {
  {
    std::mt19937_64 rng(33);
    RandomSystemOptions opts;
    opts.n = 2;
    opts.m = 2;
    opts.p = 2;
    opts.horizon = 4;
    opts.regular = true;
    const DescriptorSystem sys = random_system(rng, opts);
    Vector l(2);
    l << 0.3, -0.7;
    const RangeMembership rm = range_membership(sys, 4, l);
    CHECK(rm.member);
  }
  {
    Matrix f(1, 2), c(1, 2), h(1, 2);
    f << 1, 0;
    c << 1, 0;
    h << 0, 0;
    const DescriptorSystem sys = DescriptorSystem::constant(
        f, c, h, Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1));
    Vector e2(2);
    e2 << 0, 1;
    const RangeMembership rm = range_membership(sys, 0, e2);
    CHECK_FALSE(rm.member);
    CHECK(std::isinf(rm.norm_sq));
  }
}

TEST_CASE("range membership norm identity against the recursion") {
  std::mt19937_64 rng(34);
  int members = 0;
  for (int t = 0; t < 60; ++t) {
    const RandomInstance inst = make_instance(rng, false);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector l(inst.sys.n);
    for (Index i = 0; i < inst.sys.n; ++i) l(i) = u(rng);
    if (l.norm() == 0.0) continue;

    ObserverState s = init(inst.sys, inst.y[0]);
    for (int k = 0; k < inst.N; ++k) s = step(s, inst.y[static_cast<size_t>(k) + 1]);

    const RangeMembership rm = range_membership(inst.sys, inst.N, l);
    const DirectionalError de = directional_error(s, l);
    CHECK(rm.member == de.finite);
    if (rm.member) {
      ++members;
      const double quad = s.qeig->pinv_quad(l);
      CHECK(rm.norm_sq == doctest::Approx(quad).epsilon(1e-6));
    }
  }
  CHECK(members > 10);  // the sweep must actually exercise the identity
}

TEST_CASE("support function on the scalar system") {
  const DescriptorSystem sys = scalar_ones();
  const double s = support_function(sys, {vec1(0.0)}, 0, vec1(1.0));
  CHECK(s == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("support function is infinite along kernel directions") {
  Matrix f(1, 2), c(1, 2), h(1, 2);
  f << 1, 0;
  c << 1, 0;
  h << 0, 0;
  const DescriptorSystem sys = DescriptorSystem::constant(
      f, c, h, Matrix::Identity(1, 1), Matrix::Identity(1, 1), Matrix::Identity(1, 1));
  Vector e2(2);
  e2 << 0, 1;
  CHECK(std::isinf(support_function(sys, {vec1(0.0)}, 0, e2)));
  CHECK(std::isinf(support_function_direct(sys, {vec1(0.0)}, 0, e2)));
}

TEST_CASE("support function identities on random feasible instances") {
  std::mt19937_64 rng(35);
  int exercised = 0;
  for (int t = 0; t < 40; ++t) {
    const RandomInstance inst = make_instance(rng, true);

    ObserverState s = init(inst.sys, inst.y[0]);
    for (int k = 0; k < inst.N; ++k) s = step(s, inst.y[static_cast<size_t>(k) + 1]);

    // a direction guaranteed to be reachable: l = Q u
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector raw(inst.sys.n);
    for (Index i = 0; i < inst.sys.n; ++i) raw(i) = u(rng);
    const Vector l = s.Q.matrix() * raw;
    if (l.norm() < 1e-9) continue;
    ++exercised;

    const double sp = support_function(inst.sys, inst.y, inst.N, l);
    const double sm = support_function(inst.sys, inst.y, inst.N, Vector(-l));
    const DirectionalError de = directional_error(s, l);
    REQUIRE(de.finite);
    CHECK(std::abs(sp + sm - 2.0 * de.sigma) <= 1e-8 * (1.0 + std::abs(de.sigma)));
    CHECK(std::abs(sp - sm - 2.0 * de.estimate_component) <=
          1e-8 * (1.0 + std::abs(de.estimate_component)));

    const double sd = support_function_direct(inst.sys, inst.y, inst.N, l);
    CHECK(std::abs(sd - sp) <= 1e-7 * (1.0 + std::abs(sp)));
  }
  CHECK(exercised > 10);
}

TEST_CASE("cross_check passes on a healthy instance") {
  std::mt19937_64 rng(36);
  RandomSystemOptions opts;
  opts.n = 3;
  opts.m = 2;
  opts.p = 2;
  opts.horizon = 8;
  const DescriptorSystem sys = random_system(rng, opts);
  const FeasibleData data = random_feasible_measurements(rng, sys, opts.horizon);
  std::vector<Vector> dirs;
  for (Index i = 0; i < 3; ++i) {
    Vector e = Vector::Zero(3);
    e(i) = 1.0;
    dirs.push_back(e);
  }
  const auto results = cross_check(sys, data.y, opts.horizon, dirs);
  for (const auto& c : results) {
    INFO(c.name, " residual=", c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("oversized instances are rejected") {
  const DescriptorSystem sys = paper_example_system();
  CHECK_THROWS_AS(build_block_system(sys, 400), DimensionMismatch);
}
