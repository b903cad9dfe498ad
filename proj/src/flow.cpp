#include "specflow/flow.hpp"

#include <cmath>
#include <iomanip>

namespace specflow {

namespace {

Dopri5::Options ode_options(const FlowOptions& opts) {
  Dopri5::Options o;
  // local error two orders below the drift budget keeps the accumulated
  // energy error inside it at desk-scale spans
  o.rtol = o.atol = std::max(1e-14, opts.drift_tol * 1e-2);
  return o;
}

}  // namespace

Dopri5::Rhs make_flow_rhs(const SystemConfig& sys, bool with_jacobian, bool with_action) {
  const int n = sys.n;
  return [&sys, n, with_jacobian, with_action](double, const Vec& y, Vec& dy) {
    const auto x = y.head(n);
    const auto xi = y.segment(n, n);
    dy.resize(y.size());
    dy.head(n) = xi;
    dy.segment(n, n) = -sys.potential.gradient(x);
    int off = 2 * n;
    if (with_jacobian) {
      // J' = A J,  A = [[0, I], [-Hess V, 0]]  (column-major packing)
      const Mat H = sys.potential.hessian(x);
      for (int c = 0; c < 2 * n; ++c) {
        const auto Jx = y.segment(off + c * 2 * n, n);
        const auto Jxi = y.segment(off + c * 2 * n + n, n);
        dy.segment(off + c * 2 * n, n) = Jxi;
        dy.segment(off + c * 2 * n + n, n) = -H * Jx;
      }
      off += 4 * n * n;
    }
    if (with_action)
      dy[off] = 0.5 * xi.squaredNorm() - sys.potential.value(x) + sys.lambda;
  };
}

Vec augmented_initial(const SystemConfig& sys, const PhasePoint& start, bool with_jacobian,
                      bool with_action) {
  const int n = sys.n;
  int dim = 2 * n + (with_jacobian ? 4 * n * n : 0) + (with_action ? 1 : 0);
  Vec y = Vec::Zero(dim);
  y.head(n) = start.x;
  y.segment(n, n) = start.xi;
  if (with_jacobian)
    for (int c = 0; c < 2 * n; ++c) y[2 * n + c * 2 * n + c] = 1.0;
  return y;
}

PhasePoint augmented_point(const SystemConfig& sys, const Vec& y) {
  return PhasePoint(y.head(sys.n), y.segment(sys.n, sys.n));
}

Mat augmented_jacobian(const SystemConfig& sys, const Vec& y) {
  const int n = sys.n;
  Mat J(2 * n, 2 * n);
  for (int c = 0; c < 2 * n; ++c) J.col(c) = y.segment(2 * n + c * 2 * n, 2 * n);
  return J;
}

double augmented_action(const SystemConfig& sys, const Vec& y, bool with_jacobian) {
  return y[2 * sys.n + (with_jacobian ? 4 * sys.n * sys.n : 0)];
}

double VariationalFrame::symplectic_residual() const {
  const auto n2 = J.rows() / 2;
  Mat omega = Mat::Zero(2 * n2, 2 * n2);
  omega.topRightCorner(n2, n2) = Mat::Identity(n2, n2);
  omega.bottomLeftCorner(n2, n2) = -Mat::Identity(n2, n2);
  return (J.transpose() * omega * J - omega).cwiseAbs().maxCoeff();
}

Trajectory integrate_trajectory(const SystemConfig& sys, const PhasePoint& start, double ta,
                                double tb, const FlowOptions& opts) {
  if (!(ta <= 0.0 && tb >= 0.0) && !(ta == tb))
    throw Failure(Errc::config_error, "t_span must contain 0");
  Trajectory traj;
  traj.initial = start;
  traj.energy = hamiltonian_value(sys, start);
  traj.drift_tol = opts.drift_tol;

  Dopri5 ode(make_flow_rhs(sys, false, false), ode_options(opts));
  const Vec y0 = augmented_initial(sys, start, false, false);

  auto run_side = [&](double tend) -> Dopri5::Solution {
    return ode.integrate(0.0, y0, tend);
  };

  // integrate the backward side first so knots come out time-ordered
  std::vector<Dopri5::Solution> parts;
  if (ta < 0) parts.push_back(run_side(ta));
  Dopri5::Solution fwd = run_side(tb);

  auto add_knots = [&](const Dopri5::Solution& s, bool reversed) {
    std::vector<TrajectoryKnot> ks;
    ks.push_back({0.0, PhasePoint::from_flat(y0)});
    for (const auto& seg : s.segments) {
      const double t = seg.t0 + seg.dt;
      ks.push_back({t, PhasePoint::from_flat(seg.eval(t))});
    }
    if (reversed) std::reverse(ks.begin(), ks.end());
    for (auto& k : ks) traj.knots.push_back(std::move(k));
  };
  if (!parts.empty()) add_knots(parts[0], true);
  add_knots(fwd, false);

  // optional uniformly spaced refinement knots
  if (opts.knot_spacing > 0) {
    std::vector<TrajectoryKnot> uni;
    for (double t = ta; t <= tb + 1e-12; t += opts.knot_spacing) {
      const Vec y = (t < 0 && !parts.empty()) ? parts[0].eval(t) : fwd.eval(std::max(t, 0.0));
      uni.push_back({t, PhasePoint::from_flat(y)});
    }
    traj.knots = std::move(uni);
  }

  for (const auto& k : traj.knots)
    traj.energy_drift =
        std::max(traj.energy_drift, std::abs(hamiltonian_value(sys, k.state) - traj.energy));
  if (traj.energy_drift > opts.drift_tol)
    throw Failure(Errc::step_failure, "energy drift " + std::to_string(traj.energy_drift) +
                                          " exceeds tolerance");

  // keep the forward dense solution (callers integrate one side at a time for
  // event work; eval() on the backward side goes through the stored knots)
  traj.dense = std::move(fwd);
  if (ta < 0 && !parts.empty()) {
    // merge: prepend backward segments so eval covers the whole span
    auto& segs = traj.dense.segments;
    std::vector<Dopri5::Segment> merged(parts[0].segments.rbegin(), parts[0].segments.rend());
    // mark backward segments by their own (t0, dt<0); Solution::eval assumes a
    // single direction, so store both sides and dispatch on sign in eval()
    // -- simplest correct approach: re-store as a bidirectional lookup
    merged.insert(merged.end(), segs.begin(), segs.end());
    segs = std::move(merged);
  }
  return traj;
}

std::pair<PhasePoint, VariationalFrame> flow_with_jacobian(const SystemConfig& sys,
                                                           const PhasePoint& start, double t,
                                                           const FlowOptions& opts) {
  Dopri5 ode(make_flow_rhs(sys, true, false), ode_options(opts));
  const Vec y0 = augmented_initial(sys, start, true, false);
  const auto sol = ode.integrate(0.0, y0, t);
  VariationalFrame fr;
  fr.t = t;
  fr.J = augmented_jacobian(sys, sol.y_final);
  return {augmented_point(sys, sol.y_final), fr};
}

VariationalFrame integrate_variational(const SystemConfig& sys, const PhasePoint& start, double t,
                                       const FlowOptions& opts) {
  return flow_with_jacobian(sys, start, t, opts).second;
}

PhasePoint flow_map(const SystemConfig& sys, const PhasePoint& p0, double t,
                    const FlowOptions& opts) {
  Dopri5 ode(make_flow_rhs(sys, false, false), ode_options(opts));
  const auto sol = ode.integrate(0.0, augmented_initial(sys, p0, false, false), t);
  return augmented_point(sys, sol.y_final);
}

TrappingVerdict classify_trapping(const SystemConfig& sys, const PhasePoint& start, double horizon,
                                  const FlowOptions& opts) {
  if (!(horizon > 0)) throw Failure(Errc::config_error, "horizon must be positive");
  TrappingVerdict v;
  v.horizon = horizon;

  Dopri5 ode(make_flow_rhs(sys, false, false), ode_options(opts));
  const Vec y0 = augmented_initial(sys, start, false, false);
  const int n = sys.n;

  auto radius = [&](double, const Vec& y) { return y.head(n).norm(); };

  double t0 = 0.0;
  bool escaped = true;
  for (const double dir : {1.0, -1.0}) {
    const auto sol = ode.integrate(0.0, y0, dir * horizon);
    // last crossing of |x| = R0 along this side
    double t_last = 0.0;
    bool inside_seen = radius(0.0, y0) <= sys.r0;
    double t_prev = 0.0;
    double r_prev = radius(0.0, y0);
    for (const auto& seg : sol.segments) {
      const double t = seg.t0 + seg.dt;
      const double r = radius(t, seg.eval(t));
      if ((r_prev - sys.r0) * (r - sys.r0) < 0.0) {
        const double tc = dense_root(
            sol, [&](double, const Vec& y) { return y.head(n).norm() - sys.r0; }, t_prev, t);
        t_last = std::max(t_last, std::abs(tc));
        inside_seen = true;
      }
      t_prev = t;
      r_prev = r;
    }
    // outgoing-escape certificate at the horizon end
    const Vec yend = sol.y_final;
    const double rend = yend.head(n).norm();
    const double radial_momentum = dir * yend.head(n).dot(yend.segment(n, n));
    v.escape_radii.emplace_back(dir * horizon, rend);
    if (rend <= sys.r0 || radial_momentum <= 0.0) escaped = false;
    if (inside_seen) t0 = std::max(t0, t_last);
  }

  if (escaped) {
    v.kind = TrappingVerdict::Kind::non_trapped;
    v.t0 = t0;
  } else {
    v.kind = TrappingVerdict::Kind::undecided;
    v.t0 = horizon;
  }
  return v;
}

bool certify_energy_nontrapping(const SystemConfig& sys, double horizon, int probes_per_axis) {
  // probe base points on an axis grid inside the interaction ball, all shell
  // directions from a small deterministic set
  std::vector<Vec> dirs;
  if (sys.n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else {
    const int m = 8;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * M_PI * k / m;
      Vec d = Vec::Zero(sys.n);
      d[0] = std::cos(th);
      d[1] = std::sin(th);
      dirs.push_back(d);
    }
  }
  for (int i = 0; i < probes_per_axis; ++i) {
    const double s = -0.9 + 1.8 * i / std::max(1, probes_per_axis - 1);
    Vec x = Vec::Zero(sys.n);
    x[0] = s * sys.r0;
    if (sys.potential.value(x) >= sys.lambda) continue;  // no shell above this point
    for (const auto& d : dirs) {
      const auto verdict = classify_trapping(sys, energy_shell_sample(sys, x, d), horizon);
      if (!verdict.non_trapped()) return false;
    }
  }
  return true;
}

void write_trajectory_csv(std::ostream& os, const SystemConfig& sys, const Trajectory& traj) {
  os << "t";
  for (int i = 0; i < sys.n; ++i) os << ",x" << (i + 1);
  for (int i = 0; i < sys.n; ++i) os << ",xi" << (i + 1);
  os << ",energy_drift\n";
  os << std::setprecision(17);
  for (const auto& k : traj.knots) {
    os << k.t;
    for (int i = 0; i < sys.n; ++i) os << "," << k.state.x[i];
    for (int i = 0; i < sys.n; ++i) os << "," << k.state.xi[i];
    os << "," << (hamiltonian_value(sys, k.state) - traj.energy) << "\n";
  }
}

}  // namespace specflow
