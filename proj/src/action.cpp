#include "specflow/action.hpp"

#include <cmath>
#include <iomanip>

namespace specflow {

namespace {

struct LegState {
  PhasePoint end;
  Mat dx_deta;  // n x n block of the variational frame
  double action;
};

// one augmented solve along (y, eta) for time t
LegState solve_leg(const SystemConfig& sys, const Vec& y, const Vec& eta, double t,
                   double drift_tol) {
  Dopri5 ode(make_flow_rhs(sys, true, true),
             {std::max(1e-14, drift_tol * 1e-2), std::max(1e-14, drift_tol * 1e-2), 0.0,
              2'000'000});
  const Vec y0 = augmented_initial(sys, PhasePoint(y, eta), true, true);
  const auto sol = ode.integrate(0.0, y0, t);
  LegState leg;
  leg.end = augmented_point(sys, sol.y_final);
  const Mat J = augmented_jacobian(sys, sol.y_final);
  leg.dx_deta = J.topRightCorner(sys.n, sys.n);
  leg.action = augmented_action(sys, sol.y_final, true);
  return leg;
}

// Newton on eta -> x(t; y, eta) - z from the given seed
ShootingSolution newton_shoot(const SystemConfig& sys, double t, const Vec& y, const Vec& z,
                              Vec eta, double tol, double drift_tol, int max_iter = 30) {
  ShootingSolution s;
  s.t = t;
  s.y = y;
  s.z = z;
  for (int it = 0; it < max_iter; ++it) {
    const LegState leg = solve_leg(sys, y, eta, t, drift_tol);
    const Vec res = leg.end.x - z;
    s.residual = res.norm();
    s.newton_iterations = it;
    if (s.residual <= tol) {
      s.eta = eta;
      s.endpoint = leg.end;
      s.action = leg.action;
      return s;
    }
    const double det = leg.dx_deta.determinant();
    if (std::abs(det) < 1e-10)
      throw Failure(Errc::singular_jacobian,
                    "|det dx/deta| = " + std::to_string(std::abs(det)) + " at t=" +
                        std::to_string(t));
    eta -= leg.dx_deta.colPivHouseholderQr().solve(res);
  }
  throw Failure(Errc::no_convergence, "shooting did not converge at t=" + std::to_string(t) +
                                          ", residual=" + std::to_string(s.residual));
}

// continuation path from the anchor to the query
ShootingSolution continued_shoot(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                                 double tol, const Vec* seed) {
  const auto& sys = chart.system;
  if (seed != nullptr) return newton_shoot(sys, t, y, z, *seed, tol, chart.drift_tol);
  const double dist = std::abs(t - chart.t0) + (y - chart.y0).norm() + (z - chart.z0).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(dist / 0.25)));
  Vec eta = chart.eta0;
  ShootingSolution s;
  for (int k = 1; k <= steps; ++k) {
    const double a = static_cast<double>(k) / steps;
    const double tk = chart.t0 + a * (t - chart.t0);
    const Vec yk = chart.y0 + a * (y - chart.y0);
    const Vec zk = chart.z0 + a * (z - chart.z0);
    s = newton_shoot(sys, tk, yk, zk, eta, tol, chart.drift_tol);
    eta = s.eta;
  }
  return s;
}

}  // namespace

bool ActionChart::in_window(double t, const Vec& y, const Vec& z) const {
  if (std::abs(t - t0) > t_half) return false;
  for (int i = 0; i < system.n; ++i) {
    if (std::abs(y[i] - y0[i]) > y_half[i]) return false;
    if (std::abs(z[i] - z0[i]) > z_half[i]) return false;
  }
  return true;
}

double central_field_determinant(const SystemConfig& sys, const Vec& y, const Vec& eta, double t) {
  return solve_leg(sys, y, eta, t, 1e-10).dx_deta.determinant();
}

ActionChart build_action_chart(const SystemConfig& sys, const Vec& y0, const Vec& direction,
                               const Vec& z0, const ChartBuildOptions& opts) {
  ActionChart chart;
  chart.system = sys;
  chart.y0 = y0;
  chart.z0 = z0;
  chart.shoot_tol = opts.shoot_tol;
  chart.drift_tol = opts.drift_tol;

  // locate the anchor crossing: closest approach of the shell trajectory to z0
  const PhasePoint src = energy_shell_sample(sys, y0, direction);
  Dopri5 ode(make_flow_rhs(sys, false, false), {1e-12, 1e-12, 0.0, 2'000'000});
  const Vec ys = augmented_initial(sys, src, false, false);
  const auto sol = ode.integrate(0.0, ys, opts.t_scan_max);
  auto dist = [&](double, const Vec& y) { return (y.head(sys.n) - z0).norm(); };
  double t_best = 0, d_best = dist(0.0, ys);
  for (const auto& seg : sol.segments) {
    const double t = seg.t0 + seg.dt;
    const double d = dist(t, seg.eval(t));
    if (d < d_best) {
      d_best = d;
      t_best = t;
    }
  }
  const double bracket = 2.0 * std::abs(sol.t_final) / std::max<size_t>(sol.segments.size(), 2);
  t_best = dense_argmin(sol, dist, std::max(0.0, t_best - bracket),
                        std::min(sol.t_final, t_best + bracket));
  if (dist(t_best, sol.eval(t_best)) > 1e-6)
    throw Failure(Errc::no_convergence, "anchor trajectory does not reach z0 (closest " +
                                            std::to_string(dist(t_best, sol.eval(t_best))) + ")");
  chart.t0 = t_best;
  chart.nu = t_best >= 0 ? +1 : -1;
  chart.eta0 = src.xi;

  // polish the anchor momentum so x(t0; y0, eta0) = z0 to shooting tolerance
  const auto anchor =
      newton_shoot(sys, chart.t0, y0, z0, chart.eta0, opts.shoot_tol, opts.drift_tol);
  chart.eta0 = anchor.eta;

  chart.anchor_det = central_field_determinant(sys, chart.y0, chart.eta0, chart.t0);
  if (std::abs(chart.anchor_det) < 1e-10)
    throw Failure(Errc::singular_jacobian, "central-field determinant vanishes at the anchor");

  // adaptive window discovery: expand until continuation degrades, then halve
  double t_half = opts.initial_half * std::max(1.0, std::abs(chart.t0));
  Vec y_half = Vec::Constant(sys.n, opts.initial_half);
  Vec z_half = Vec::Constant(sys.n, opts.initial_half);
  auto probes_ok = [&](double th, const Vec& yh, const Vec& zh) {
    chart.t_half = th;
    chart.y_half = yh;
    chart.z_half = zh;
    const int combos = 1 << (1 + 2 * sys.n);
    for (int mask = 0; mask < combos; ++mask) {
      const double t = chart.t0 + ((mask & 1) ? th : -th);
      Vec y = chart.y0, z = chart.z0;
      for (int i = 0; i < sys.n; ++i) {
        y[i] += ((mask >> (1 + i)) & 1) ? yh[i] : -yh[i];
        z[i] += ((mask >> (1 + sys.n + i)) & 1) ? zh[i] : -zh[i];
      }
      try {
        continued_shoot(chart, t, y, z, opts.shoot_tol, nullptr);
      } catch (const Failure&) {
        return false;
      }
    }
    return true;
  };

  for (int k = 0; k < opts.max_expand; ++k) {
    const double t_next = std::min(t_half * opts.grow, opts.t_half_cap);
    const Vec y_next = (y_half * opts.grow).cwiseMin(opts.yz_half_cap);
    const Vec z_next = (z_half * opts.grow).cwiseMin(opts.yz_half_cap);
    if (!probes_ok(t_next, y_next, z_next)) {
      // degraded: keep the last good box shrunk by the safety factor
      t_half *= 0.5;
      y_half *= 0.5;
      z_half *= 0.5;
      break;
    }
    t_half = t_next;
    y_half = y_next;
    z_half = z_next;
    if (t_half >= opts.t_half_cap && y_half.minCoeff() >= opts.yz_half_cap &&
        z_half.minCoeff() >= opts.yz_half_cap)
      break;
  }
  chart.t_half = t_half;
  chart.y_half = y_half;
  chart.z_half = z_half;
  return chart;
}

ShootingSolution shooting_solve(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                                double tol, const Vec* seed) {
  if (tol <= 0) tol = chart.shoot_tol;
  if (!chart.in_window(t, y, z))
    throw Failure(Errc::config_error, "query outside the chart window");
  return continued_shoot(chart, t, y, z, tol, seed);
}

double action_value(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                    const Vec* seed) {
  return shooting_solve(chart, t, y, z, 0.0, seed).action;
}

GradientReport verify_gradients(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                                double fd_step) {
  const auto& sys = chart.system;
  GradientReport rep;
  rep.dz_S = Vec::Zero(sys.n);
  rep.dy_S = Vec::Zero(sys.n);

  const auto center = shooting_solve(chart, t, y, z);
  const Vec seed = center.eta;

  auto S = [&](const Vec& yy, const Vec& zz) {
    return action_value(chart, t, yy, zz, &seed);
  };
  // Richardson-refined central differences
  auto central = [&](auto&& f, double step) {
    const double d1 = (f(step) - f(-step)) / (2 * step);
    const double d2 = (f(0.5 * step) - f(-0.5 * step)) / step;
    return (4.0 * d2 - d1) / 3.0;
  };

  for (int i = 0; i < sys.n; ++i) {
    rep.dz_S[i] = central(
        [&](double s) {
          Vec zz = z;
          zz[i] += s;
          return S(y, zz);
        },
        fd_step);
    rep.dy_S[i] = central(
        [&](double s) {
          Vec yy = y;
          yy[i] += s;
          return S(yy, z);
        },
        fd_step);
  }
  rep.dz_error = (rep.dz_S - center.endpoint.xi).lpNorm<Eigen::Infinity>();
  rep.dy_error = (rep.dy_S + center.eta).lpNorm<Eigen::Infinity>();
  return rep;
}

StationaryScan stationary_time_scan(const ActionChart& chart, const Vec& y, const Vec& z,
                                    const std::vector<double>& t_grid, double fd_step) {
  const auto& sys = chart.system;
  StationaryScan scan;
  scan.t_grid = t_grid;

  auto dtS = [&](double t, const Vec* seed) {
    const double d1 = (action_value(chart, t + fd_step, y, z, seed) -
                       action_value(chart, t - fd_step, y, z, seed)) /
                      (2 * fd_step);
    const double d2 = (action_value(chart, t + 0.5 * fd_step, y, z, seed) -
                       action_value(chart, t - 0.5 * fd_step, y, z, seed)) /
                      fd_step;
    return (4.0 * d2 - d1) / 3.0;
  };

  std::vector<Vec> seeds;
  for (double t : t_grid) {
    const auto shot = shooting_solve(chart, t, y, z);
    seeds.push_back(shot.eta);
    scan.dtS.push_back(dtS(t, &shot.eta));
    // sign audit against +-(E - lambda), E the energy of the connecting leg
    const double E = hamiltonian_value(sys, PhasePoint(y, shot.eta));
    scan.match_minus = std::max(scan.match_minus, std::abs(scan.dtS.back() + (E - sys.lambda)));
    scan.match_plus = std::max(scan.match_plus, std::abs(scan.dtS.back() - (E - sys.lambda)));
  }

  for (size_t i = 0; i + 1 < t_grid.size(); ++i) {
    if (!(scan.dtS[i] * scan.dtS[i + 1] < 0.0)) continue;
    // secant/bisection refinement of the FD derivative zero
    double a = t_grid[i], b = t_grid[i + 1];
    double fa = scan.dtS[i], fb = scan.dtS[i + 1];
    const Vec seed = seeds[i];
    for (int it = 0; it < 80 && std::abs(b - a) > 1e-11; ++it) {
      double m = 0.5 * (a + b);
      const double sec = b - fb * (b - a) / (fb - fa);
      if (std::isfinite(sec) && sec > std::min(a, b) && sec < std::max(a, b)) m = sec;
      const double fm = dtS(m, &seed);
      if (fa * fm <= 0) {
        b = m;
        fb = fm;
      } else {
        a = m;
        fa = fm;
      }
    }
    StationaryPoint p;
    p.t_star = 0.5 * (a + b);
    p.action = action_value(chart, p.t_star, y, z, &seed);
    const double h2 = 32 * fd_step;
    p.d2t_S = (dtS(p.t_star + h2, &seed) - dtS(p.t_star - h2, &seed)) / (2 * h2);
    const auto shot = shooting_solve(chart, p.t_star, y, z, 0.0, &seed);
    p.shell_residual_source =
        std::abs(hamiltonian_value(sys, PhasePoint(y, shot.eta)) - sys.lambda);
    p.shell_residual_target = std::abs(hamiltonian_value(sys, shot.endpoint) - sys.lambda);
    scan.points.push_back(p);
  }
  return scan;
}

PhaseLagrangianResult build_phase_lagrangian(const ActionChart& chart, const Vec& y, const Vec& z,
                                             const std::vector<StationaryPoint>& points,
                                             double fd_step) {
  const auto& sys = chart.system;
  PhaseLagrangianResult out;
  for (const auto& p : points) {
    const auto grads = verify_gradients(chart, p.t_star, y, z, fd_step);
    RelationSample s;
    s.sign = chart.nu;
    s.t = p.t_star;
    s.left = PhasePoint(y, grads.dy_S);    // d_y S = -eta: left already twisted
    s.right = PhasePoint(z, grads.dz_S);   // d_z S = xi
    // containment: fly the source for t* and compare with the emitted point
    const Vec eta = -grads.dy_S;
    const PhasePoint flown = flow_map(sys, PhasePoint(y, eta), p.t_star);
    const double res = std::max((flown.x - z).lpNorm<Eigen::Infinity>(),
                                (flown.xi - grads.dz_S).lpNorm<Eigen::Infinity>());
    out.max_containment_residual = std::max(out.max_containment_residual, res);
    out.samples.push_back(std::move(s));
  }
  return out;
}

void write_chart_csv(std::ostream& os, const ActionChart& chart,
                     const std::vector<std::array<double, 16>>& rows) {
  const int n = chart.system.n;
  os << "t";
  for (int i = 0; i < n; ++i) os << ",y" << (i + 1);
  for (int i = 0; i < n; ++i) os << ",z" << (i + 1);
  for (int i = 0; i < n; ++i) os << ",eta" << (i + 1);
  os << ",S,dzS_err,dyS_err\n" << std::setprecision(17);
  for (const auto& r : rows) {
    os << r[0];
    for (int i = 0; i < 3 * n; ++i) os << "," << r[1 + i];
    os << "," << r[1 + 3 * n] << "," << r[2 + 3 * n] << "," << r[3 + 3 * n] << "\n";
  }
}

}  // namespace specflow
