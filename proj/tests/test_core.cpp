#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "specflow/cutoff.hpp"
#include "specflow/system.hpp"
#include "test_oracles.hpp"

using namespace specflow;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

SystemConfig free_sys(int n = 1) {
  SystemConfig s;
  s.n = n;
  s.r0 = 1.0;
  s.lambda = 0.5;
  s.potential = PotentialModel::make_zero();
  s.h_ladder = {0.125, 0.0625};
  return s;
}

SystemConfig bump_sys(int n = 1, double amp = 0.3) {
  SystemConfig s = free_sys(n);
  GaussianBump b;
  b.center = Vec::Zero(n);
  b.amplitude = amp;
  b.width = 1.0;
  s.potential = PotentialModel::make_bumps({b});
  return s;
}

}  // namespace

TEST_CASE("hamiltonian value: free particle and bump") {
  auto sys = free_sys();
  CHECK(hamiltonian_value(sys, {v1(0.0), v1(1.0)}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(hamiltonian_value(sys, {v1(3.7), v1(0.0)}) == doctest::Approx(0.0));

  auto sys2 = bump_sys(2);
  CHECK(hamiltonian_value(sys2, {v2(0, 0), v2(1, 0)}) == doctest::Approx(0.8).epsilon(1e-15));
}

TEST_CASE("hamiltonian vector field: analytic and finite-difference agreement") {
  auto sys = free_sys();
  Vec f = hamiltonian_vector_field(sys, {v1(3.0), v1(2.0)});
  CHECK(f[0] == doctest::Approx(2.0));
  CHECK(f[1] == doctest::Approx(0.0));

  auto sysb = bump_sys();
  Vec f0 = hamiltonian_vector_field(sysb, {v1(0.0), v1(1.0)});
  CHECK(f0[1] == doctest::Approx(0.0).epsilon(1e-14));  // grad V(0) = 0 by symmetry

  // -V'(1) = 0.6 e^{-1}
  Vec f1 = hamiltonian_vector_field(sysb, {v1(1.0), v1(0.0)});
  CHECK(f1[1] == doctest::Approx(0.6 * std::exp(-1.0)).epsilon(1e-14));

  // agreement with central differences of p at random phase points
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double step = 1e-6;
  for (int k = 0; k < 100; ++k) {
    PhasePoint p{v1(u(rng)), v1(u(rng))};
    const Vec f = hamiltonian_vector_field(sysb, p);
    // d_xi p
    PhasePoint pp = p, pm = p;
    pp.xi[0] += step;
    pm.xi[0] -= step;
    const double dxi = (hamiltonian_value(sysb, pp) - hamiltonian_value(sysb, pm)) / (2 * step);
    pp = p;
    pm = p;
    pp.x[0] += step;
    pm.x[0] -= step;
    const double dx = (hamiltonian_value(sysb, pp) - hamiltonian_value(sysb, pm)) / (2 * step);
    CHECK(f[0] == doctest::Approx(dxi).epsilon(1e-6));
    CHECK(f[1] == doctest::Approx(-dx).epsilon(1e-6));
  }
}

TEST_CASE("lagrangian value and the Legendre relation") {
  auto sys = free_sys();
  CHECK(lagrangian_value(sys, v1(1.0), v1(9.0)) == doctest::Approx(1.0));

  auto sysb = bump_sys();
  CHECK(lagrangian_value(sysb, v1(1.0), v1(0.0)) == doctest::Approx(0.7).epsilon(1e-15));

  // L(xi, x) + p(x, xi) = |xi|^2 + lambda pointwise
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int k = 0; k < 50; ++k) {
    PhasePoint p{v1(u(rng)), v1(u(rng))};
    const double lhs = lagrangian_value(sysb, p.xi, p.x) + hamiltonian_value(sysb, p);
    CHECK(lhs == doctest::Approx(p.xi.squaredNorm() + sysb.lambda).epsilon(1e-14));
  }

  // cancellation: xdot = 0 at a point where V = lambda
  SystemConfig sc = bump_sys(1, 0.5);
  CHECK(lagrangian_value(sc, v1(0.0), v1(0.0)) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("energy shell sample") {
  auto sys = free_sys();
  auto p = energy_shell_sample(sys, v1(0.0), v1(1.0));
  CHECK(p.xi[0] == doctest::Approx(1.0));
  CHECK(std::abs(hamiltonian_value(sys, p) - sys.lambda) < 1e-12);

  auto sysb = bump_sys(2);
  auto q = energy_shell_sample(sysb, v2(0, 0), v2(1, 0));
  CHECK(q.xi[0] == doctest::Approx(std::sqrt(0.4)));
  CHECK(q.xi[1] == doctest::Approx(0.0));
  CHECK(std::abs(hamiltonian_value(sysb, q) - sysb.lambda) < 1e-12);

  SystemConfig forbidden = bump_sys(1, 0.6);
  CHECK_THROWS_WITH_AS(energy_shell_sample(forbidden, v1(0.0), v1(1.0)),
                       doctest::Contains("forbidden_region"), Failure);
}

TEST_CASE("potential derivatives are exact (finite-difference cross-check)") {
  auto tail = PotentialModel::make_radial_tail(1.0, 2.0);
  const Vec x = v2(0.7, -1.3);
  const double step = 1e-6;
  Vec g = tail.gradient(x);
  Mat H = tail.hessian(x);
  for (int i = 0; i < 2; ++i) {
    Vec xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    CHECK(g[i] == doctest::Approx((tail.value(xp) - tail.value(xm)) / (2 * step)).epsilon(1e-8));
    const Vec gp = tail.gradient(xp), gm = tail.gradient(xm);
    for (int j = 0; j < 2; ++j)
      CHECK(H(j, i) == doctest::Approx((gp[j] - gm[j]) / (2 * step)).epsilon(1e-7));
  }
}

TEST_CASE("validate_decay: zero, concentrated bumps, tail exponent overclaim") {
  std::vector<double> radii{2.0, 3.0, 5.0, 8.0, 13.0};

  auto sys = free_sys();
  auto rep = validate_decay(sys, radii);
  CHECK(rep.pass);
  CHECK(rep.fitted_constants[0] == doctest::Approx(0.0));

  auto sysb = bump_sys();  // center inside B(0, R0): superexponential decay
  CHECK(validate_decay(sysb, radii).pass);

  // V = (1+|x|^2)^{-1/2} decays like (1+r)^{-1}; claiming mu = 2 must fail
  SystemConfig claim = free_sys();
  claim.potential = PotentialModel::make_radial_tail(1.0, 1.0);
  claim.mu = 2.0;
  CHECK_FALSE(validate_decay(claim, radii).pass);

  // honest claim mu = 1 passes
  claim.mu = 1.0;
  CHECK(validate_decay(claim, radii).pass);
}

TEST_CASE("system config invariants") {
  auto sys = free_sys();
  CHECK_NOTHROW(sys.validate());
  sys.h_ladder = {0.5, 0.5};
  CHECK_THROWS_AS(sys.validate(), Failure);
  sys.h_ladder = {0.5, 0.25};
  sys.lambda = -1.0;
  CHECK_THROWS_AS(sys.validate(), Failure);
}

TEST_CASE("smooth cutoff: plateau, support, smooth transition") {
  CutoffFunction chi;
  chi.center = v1(3.0);
  chi.inner = 0.6;
  chi.outer = 1.0;
  chi.validate(1.0);

  CHECK(chi(v1(3.0)) == doctest::Approx(1.0));
  CHECK(chi(v1(3.55)) == doctest::Approx(1.0));
  CHECK(chi(v1(4.0)) == doctest::Approx(0.0));
  CHECK(chi(v1(4.5)) == 0.0);  // exactly zero outside
  const double mid = chi(v1(3.8));
  CHECK(mid > 0.0);
  CHECK(mid < 1.0);

  CutoffFunction chi2 = chi;
  chi2.center = v1(-3.0);
  CHECK(supports_disjoint(chi, chi2));
  chi2.center = v1(2.0);
  CHECK_FALSE(supports_disjoint(chi, chi2));

  CutoffFunction bad = chi;
  bad.center = v1(1.2);
  CHECK_THROWS_AS(bad.validate(1.0), Failure);
}
