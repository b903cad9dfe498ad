#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "specflow/relations.hpp"
#include "test_oracles.hpp"

using namespace specflow;

namespace {

Vec v1(double a) {
  Vec v(1);
  v << a;
  return v;
}

SystemConfig free_sys() {
  SystemConfig s;
  s.n = 1;
  s.r0 = 1.0;
  s.lambda = 0.5;
  s.potential = PotentialModel::make_zero();
  s.h_ladder = {0.125};
  return s;
}

SystemConfig bump_sys(double amp = 0.3) {
  SystemConfig s = free_sys();
  GaussianBump b;
  b.center = Vec::Zero(1);
  b.amplitude = amp;
  b.width = 1.0;
  s.potential = PotentialModel::make_bumps({b});
  return s;
}

SystemConfig double_bump_sys() {
  SystemConfig s = free_sys();
  s.r0 = 3.5;
  GaussianBump l, r;
  l.center = v1(-2.0);
  r.center = v1(2.0);
  l.amplitude = r.amplitude = 0.8;
  l.width = r.width = 1.0;
  s.potential = PotentialModel::make_bumps({l, r});
  return s;
}

CutoffFunction cutoff_at(double c) {
  CutoffFunction chi;
  chi.center = v1(c);
  chi.inner = 0.6;
  chi.outer = 1.0;
  return chi;
}

}  // namespace

TEST_CASE("free flow is exact straight-line motion") {
  auto sys = free_sys();
  auto traj = integrate_trajectory(sys, {v1(0.0), v1(1.0)}, 0.0, 2.0);
  auto end = traj.eval(2.0);
  CHECK(end.x[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(end.xi[0] == doctest::Approx(1.0).epsilon(1e-13));

  // x = x0 + t xi0 at interior dense-output times too
  for (double t : {0.3, 0.7, 1.9}) {
    auto p = traj.eval(t);
    CHECK(p.x[0] == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK(traj.energy_drift < 1e-13);
}

TEST_CASE("bump trajectory matches an independent high-accuracy stepper") {
  auto sys = bump_sys();
  const PhasePoint start{v1(-4.0), v1(std::sqrt(0.4))};
  auto traj = integrate_trajectory(sys, start, 0.0, 20.0, {1e-10, 0.0});
  const PhasePoint ref = oracle::rk4_flow(sys, start, 20.0, 400000);
  auto end = traj.eval(20.0);
  CHECK(std::abs(end.x[0] - ref.x[0]) < 1e-8);
  CHECK(std::abs(end.xi[0] - ref.xi[0]) < 1e-8);
  CHECK(traj.energy_drift < 1e-10);
}

TEST_CASE("backward spans and time-reversal") {
  auto sys = bump_sys();
  const PhasePoint start{v1(-2.0), v1(1.0)};
  auto traj = integrate_trajectory(sys, start, -3.0, 3.0);
  CHECK(traj.knots.front().t == doctest::Approx(-3.0));
  CHECK(traj.knots.back().t == doctest::Approx(3.0));

  // flow_map(-t) o flow_map(t) = id
  const PhasePoint fwd = flow_map(sys, start, 3.0);
  const PhasePoint back = flow_map(sys, fwd, -3.0);
  CHECK((back.x - start.x).norm() < 1e-8);
  CHECK((back.xi - start.xi).norm() < 1e-8);

  // group law flow(t+s) = flow(t) o flow(s)
  const PhasePoint a = flow_map(sys, start, 1.3);
  const PhasePoint b = flow_map(sys, a, 0.9);
  const PhasePoint c = flow_map(sys, start, 2.2);
  CHECK((b.x - c.x).norm() < 1e-9);
  CHECK((b.xi - c.xi).norm() < 1e-9);
}

TEST_CASE("variational frame: free case, identity at t=0, FD cross-check, symplecticity") {
  auto sys = free_sys();
  auto fr = integrate_variational(sys, {v1(0.2), v1(1.0)}, 2.5);
  CHECK(fr.J(0, 0) == doctest::Approx(1.0));
  CHECK(fr.J(0, 1) == doctest::Approx(2.5));  // dx/deta = t
  CHECK(fr.J(1, 0) == doctest::Approx(0.0));
  CHECK(fr.J(1, 1) == doctest::Approx(1.0));
  CHECK(fr.symplectic_residual() < 1e-10);

  auto fr0 = integrate_variational(sys, {v1(0.2), v1(1.0)}, 0.0);
  CHECK((fr0.J - Mat::Identity(2, 2)).norm() < 1e-14);

  auto sysb = bump_sys();
  const PhasePoint start = energy_shell_sample(sysb, v1(-3.0), v1(1.0));
  auto frb = integrate_variational(sysb, start, 3.0);
  CHECK(frb.symplectic_residual() < 1e-8);
  CHECK(std::abs(frb.J.determinant() - 1.0) < 1e-8);

  // column-wise finite differences of the flow map
  const double step = 1e-6;
  for (int c = 0; c < 2; ++c) {
    PhasePoint pp = start, pm = start;
    (c == 0 ? pp.x[0] : pp.xi[0]) += step;
    (c == 0 ? pm.x[0] : pm.xi[0]) -= step;
    const PhasePoint fp = flow_map(sysb, pp, 3.0);
    const PhasePoint fm = flow_map(sysb, pm, 3.0);
    CHECK(frb.J(0, c) == doctest::Approx((fp.x[0] - fm.x[0]) / (2 * step)).epsilon(1e-5));
    CHECK(frb.J(1, c) == doctest::Approx((fp.xi[0] - fm.xi[0]) / (2 * step)).epsilon(1e-5));
  }
}

TEST_CASE("trapping classification") {
  auto sys = free_sys();
  auto v = classify_trapping(sys, {v1(0.0), v1(1.0)}, 30.0);
  REQUIRE(v.non_trapped());
  CHECK(v.t0 == doctest::Approx(1.0).epsilon(1e-9));  // |x| > 1 for |t| > 1

  auto v2 = classify_trapping(sys, {v1(5.0), v1(1.0)}, 30.0);
  REQUIRE(v2.non_trapped());
  CHECK(v2.t0 == doctest::Approx(0.0));

  // periodic orbit between two bumps at lambda = 0.5 < 0.8: confined forever
  auto sysd = double_bump_sys();
  const PhasePoint trapped = energy_shell_sample(sysd, v1(0.0), v1(1.0));
  auto vd = classify_trapping(sysd, trapped, 60.0);
  CHECK_FALSE(vd.non_trapped());
  // oracle: long independent integration stays inside B(0, R0)
  double rmax = 0.0;
  for (double t = 0; t <= 60.0; t += 0.5)
    rmax = std::max(rmax, std::abs(oracle::rk4_flow(sysd, trapped, t, 20000).x[0]));
  CHECK(rmax < sysd.r0);

  CHECK(certify_energy_nontrapping(free_sys(), 30.0));
  CHECK_FALSE(certify_energy_nontrapping(sysd, 30.0));
}

TEST_CASE("energy conservation over scenario trajectories") {
  for (auto sys : {free_sys(), bump_sys(), double_bump_sys()}) {
    for (double x0 : {-3.0, 0.0}) {
      if (sys.potential.value(v1(x0)) >= sys.lambda) continue;
      const PhasePoint start = energy_shell_sample(sys, v1(x0), v1(1.0));
      auto traj = integrate_trajectory(sys, start, -15.0, 15.0);
      CHECK(traj.energy_drift < 1e-10);
    }
  }
}

TEST_CASE("trajectory CSV export shape") {
  auto sys = free_sys();
  auto traj = integrate_trajectory(sys, {v1(0.0), v1(1.0)}, 0.0, 1.0, {1e-10, 0.25});
  std::ostringstream os;
  write_trajectory_csv(os, sys, traj);
  const std::string s = os.str();
  CHECK(s.rfind("t,x1,xi1,energy_drift\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 6);  // header + 5 knots
}

TEST_CASE("relation build: free flight, no-crossing seeds, slowdown over the bump") {
  auto sys = free_sys();
  auto chi1 = cutoff_at(-3.0), chi2 = cutoff_at(3.0);

  RelationCloud cloud = build_relation(sys, +1, chi1, chi2, {{v1(-3.0), v1(1.0)}}, {});
  REQUIRE(cloud.samples.size() == 1);
  const auto& s = cloud.samples[0];
  CHECK(s.t == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(s.left.x[0] == doctest::Approx(-3.0));
  CHECK(s.left.xi[0] == doctest::Approx(-1.0));  // momentum twist
  CHECK(s.right.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(s.right.xi[0] == doctest::Approx(1.0));

  // seed aimed away from supp chi2: skipped with no crossing
  RelationCloud none = build_relation(sys, +1, chi1, chi2, {{v1(-3.0), v1(-1.0)}}, {});
  CHECK(none.samples.empty());
  CHECK(none.skipped_seeds == std::vector<int>{0});

  // shell invariance at both factors
  CHECK(std::abs(hamiltonian_value(sys, s.source()) - sys.lambda) < 1e-10);
  CHECK(std::abs(hamiltonian_value(sys, s.right) - sys.lambda) < 1e-10);

  // bump: flight time from the quadrature oracle, strictly above the free time
  auto sysb = bump_sys();
  RelationCloud cb = build_relation(sysb, +1, chi1, chi2, {{v1(-3.0), v1(1.0)}}, {});
  REQUIRE(cb.samples.size() == 1);
  const double t_oracle = oracle::flight_time_1d(sysb, -3.0, 3.0);
  CHECK(cb.samples[0].t > 6.0);
  CHECK(cb.samples[0].t == doctest::Approx(t_oracle).epsilon(1e-7));
}

TEST_CASE("backward relation and the reflection identity") {
  auto sys = bump_sys();
  auto chi1 = cutoff_at(-3.0), chi2 = cutoff_at(3.0);

  auto plus = build_relation(sys, +1, chi1, chi2, default_seed_grid(sys, chi1, 3, 2), {});
  REQUIRE(!plus.samples.empty());

  // time-reversed seeds: backward flight from the forward crossing states,
  // cutoff roles swapped; must reproduce the reflected + cloud pointwise
  std::vector<std::pair<Vec, Vec>> rev_seeds;
  for (const auto& s : plus.samples) rev_seeds.emplace_back(s.right.x, s.right.xi.normalized());
  auto minus = build_relation(sys, -1, chi2, chi1, rev_seeds, {});
  REQUIRE(minus.samples.size() == plus.samples.size());
  for (size_t i = 0; i < plus.samples.size(); ++i) {
    const RelationSample refl = reflect_sample(plus.samples[i]);
    CHECK((refl.flat() - minus.samples[i].flat()).lpNorm<Eigen::Infinity>() < 1e-8);
    CHECK(refl.sign == minus.samples[i].sign);
    CHECK(refl.t == doctest::Approx(minus.samples[i].t).epsilon(1e-8));
  }
}

TEST_CASE("lagrangian residual: flow relations are Lagrangian, corrupted samples are not") {
  auto sys = bump_sys();
  auto chi1 = cutoff_at(-3.0), chi2 = cutoff_at(3.0);
  auto cloud = build_relation(sys, +1, chi1, chi2, default_seed_grid(sys, chi1, 5, 2), {});
  REQUIRE(!cloud.samples.empty());
  CHECK(lagrangian_residual(cloud.samples) < 1e-8);

  // analytic free-particle tangent frame oracle
  auto sysf = free_sys();
  auto cf = build_relation(sysf, +1, chi1, chi2, {{v1(-3.0), v1(1.0)}}, {});
  REQUIRE(cf.samples.size() == 1);
  {
    // parameters (y, t) with eta = +1 fixed on the shell: tangents
    // d/dy = (1, 0; 1, 0), d/dt = (0, 0; 1, 0)  -- both in ker(sigma + sigma)
    RelationSample manual = cf.samples[0];
    manual.tangent = Mat::Zero(4, 2);
    manual.tangent.col(0) << 1, 0, 1, 0;
    manual.tangent.col(1) << 0, 0, 1, 0;
    CHECK(lagrangian_residual({manual}) < 1e-12);
  }
  CHECK(lagrangian_residual(cf.samples) < 1e-10);

  // untwisted graph of the flow is Lagrangian for the difference form
  {
    RelationSample graph = cf.samples[0];
    graph.left = graph.source();  // undo the twist
    graph.tangent = Mat::Zero(4, 2);
    graph.tangent.col(0) << 1, 0, 1, 0;   // d/dy
    graph.tangent.col(1) << 0, 1, 6, 1;   // d/deta off-shell: (y,eta) -> (y + t eta, eta), t=6
    CHECK(graph_residual_difference_form({graph}) < 1e-12);
  }

  // negative control: perturb the source momentum off-shell
  RelationSample bad = cloud.samples[0];
  bad.left.xi[0] += 0.05;
  bad.tangent.col(0)[1] += 0.05;
  auto worst = lagrangian_residual({bad});
  CHECK(worst > 1e-3);
}

TEST_CASE("disjointness of the forward and backward clouds") {
  auto sys = free_sys();
  auto chi1 = cutoff_at(-3.0), chi2 = cutoff_at(3.0);
  auto plus = build_relation(sys, +1, chi1, chi2, {{v1(-3.0), v1(1.0)}}, {});
  auto minus = build_relation(sys, -1, chi1, chi2, {{v1(-3.0), v1(-1.0)}}, {});
  REQUIRE(!plus.samples.empty());
  REQUIRE(!minus.samples.empty());

  const double d = check_disjointness(plus.samples, minus.samples);
  // oracle: exhaustive pairwise distances
  double brute = std::numeric_limits<double>::infinity();
  for (const auto& a : plus.samples)
    for (const auto& b : minus.samples) brute = std::min(brute, (a.flat() - b.flat()).norm());
  CHECK(d == doctest::Approx(brute));
  CHECK(d >= 2.0);  // momenta differ by sign on both factors

  CHECK(std::isinf(check_disjointness(plus.samples, {})));
  CHECK(check_disjointness(plus.samples, plus.samples) == doctest::Approx(0.0));
}

TEST_CASE("certify_window filters trapped samples") {
  auto sys = free_sys();
  auto chi1 = cutoff_at(-3.0), chi2 = cutoff_at(3.0);
  auto cloud = build_relation(sys, +1, chi1, chi2, default_seed_grid(sys, chi1, 3, 2), {});
  auto w = certify_window(sys, cloud.samples, 30.0);
  CHECK(w.samples.size() == cloud.samples.size());  // free: everything retained
  CHECK(w.bbox_lo.size() == 4);

  auto empty = certify_window(sys, {}, 30.0);
  CHECK(empty.samples.empty());
}
