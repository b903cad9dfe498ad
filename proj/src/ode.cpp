#include "specflow/ode.hpp"

#include <algorithm>
#include <cmath>

namespace specflow {

namespace {

// Dormand-Prince RK5(4)7M tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// embedded error weights (5th minus 4th order result)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Vec Dopri5::Solution::eval(double t) const {
  if (segments.empty()) return y_final;
  // each segment covers [left, left+|dt|]; the list is monotone in left
  // (ascending or descending depending on how it was assembled)
  auto left = [&](size_t i) {
    const auto& s = segments[i];
    return std::min(s.t0, s.t0 + s.dt);
  };
  const size_t m = segments.size();
  const bool asc = left(0) <= left(m - 1);
  size_t lo = 0, hi = m - 1;
  if (asc) {
    // last segment with left <= t
    while (lo < hi) {
      const size_t mid = (lo + hi + 1) / 2;
      if (left(mid) <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
  } else {
    // first segment (in storage order) with left <= t
    while (lo < hi) {
      const size_t mid = (lo + hi) / 2;
      if (left(mid) <= t)
        hi = mid;
      else
        lo = mid + 1;
    }
  }
  return segments[lo].eval(t);
}

Dopri5::Solution Dopri5::integrate(double t0, const Vec& y0, double t1) const {
  Solution sol;
  const int dim = static_cast<int>(y0.size());
  const double dir = (t1 >= t0) ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  const double hmax = opts_.max_step > 0 ? opts_.max_step : span;

  Vec y = y0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), ytmp(dim),
      ynew(dim), err(dim);
  double t = t0;

  if (span == 0.0) {
    sol.y_final = y;
    sol.t_final = t0;
    return sol;
  }

  rhs_(t, y, k1);

  // initial step from the scale of the rhs
  double h = std::min(hmax, 0.01 * span);
  {
    const double d0 = y.cwiseAbs().maxCoeff() + 1e-8;
    const double d1n = k1.cwiseAbs().maxCoeff() + 1e-8;
    h = std::min(h, 0.01 * d0 / d1n + 1e-6);
  }

  const double hmin = 1e-14 * std::max(1.0, span);

  while (dir * (t1 - t) > 0) {
    if (sol.n_steps + sol.n_rejected > opts_.max_steps)
      throw Failure(Errc::step_failure, "step budget exhausted at t=" + std::to_string(t));
    h = std::min(h, std::abs(t1 - t));
    const double hs = dir * h;

    ytmp = y + hs * (a21 * k1);
    rhs_(t + c2 * hs, ytmp, k2);
    ytmp = y + hs * (a31 * k1 + a32 * k2);
    rhs_(t + c3 * hs, ytmp, k3);
    ytmp = y + hs * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs_(t + c4 * hs, ytmp, k4);
    ytmp = y + hs * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t + c5 * hs, ytmp, k5);
    ytmp = y + hs * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t + hs, ytmp, k6);
    ynew = y + hs * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t + hs, ynew, k7);

    err = hs * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double enorm = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double r = err[i] / sc;
      enorm += r * r;
    }
    enorm = std::sqrt(enorm / dim);

    if (enorm <= 1.0) {
      Segment seg;
      seg.t0 = t;
      seg.dt = hs;
      seg.r1 = y;
      seg.r2 = ynew - y;
      seg.r3 = hs * k1 - seg.r2;
      seg.r4 = seg.r2 - hs * k7 - seg.r3;
      seg.r5 = hs * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      sol.segments.push_back(std::move(seg));

      t += hs;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      ++sol.n_steps;
    } else {
      ++sol.n_rejected;
    }

    double fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
    fac = std::clamp(fac, 0.2, 5.0);
    h = std::min(hmax, h * fac);
    if (h < hmin)
      throw Failure(Errc::step_failure, "step underflow at t=" + std::to_string(t));
  }

  sol.y_final = y;
  sol.t_final = t;
  return sol;
}

double dense_root(const Dopri5::Solution& sol, const std::function<double(double, const Vec&)>& g,
                  double ta, double tb, double tol) {
  double fa = g(ta, sol.eval(ta));
  double fb = g(tb, sol.eval(tb));
  if (fa == 0.0) return ta;
  if (fb == 0.0) return tb;
  if (fa * fb > 0) throw Failure(Errc::solver_failure, "dense_root: endpoints do not bracket");
  // bisection with a secant accelerant
  for (int it = 0; it < 200; ++it) {
    double tm = 0.5 * (ta + tb);
    const double ts = tb - fb * (tb - ta) / (fb - fa);
    if (std::isfinite(ts) && ts > std::min(ta, tb) && ts < std::max(ta, tb)) tm = ts;
    const double fm = g(tm, sol.eval(tm));
    if (std::abs(tb - ta) < tol || fm == 0.0) return tm;
    if (fa * fm <= 0) {
      tb = tm;
      fb = fm;
    } else {
      ta = tm;
      fa = fm;
    }
  }
  return 0.5 * (ta + tb);
}

double dense_argmin(const Dopri5::Solution& sol, const std::function<double(double, const Vec&)>& g,
                    double ta, double tb, double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = ta, b = tb;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = g(c, sol.eval(c)), fd = g(d, sol.eval(d));
  while (std::abs(b - a) > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = g(c, sol.eval(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = g(d, sol.eval(d));
    }
  }
  return 0.5 * (a + b);
}

}  // namespace specflow
