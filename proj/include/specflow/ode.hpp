#pragma once

#include <functional>

#include "specflow/types.hpp"

namespace specflow {

/// Adaptive Dormand-Prince 5(4) with the classical continuous extension.
/// Integrates forward or backward depending on sign(t1 - t0).
class Dopri5 {
 public:
  using Rhs = std::function<void(double t, const Vec& y, Vec& dy)>;

  struct Options {
    double rtol = 1e-12;
    double atol = 1e-12;
    double max_step = 0.0;  // 0 = |t1 - t0|
    long max_steps = 2'000'000;
  };

  /// One accepted step with its dense-output coefficients.
  struct Segment {
    double t0 = 0, dt = 0;          // dt signed
    Vec r1, r2, r3, r4, r5;         // interpolation coefficients
    Vec eval(double t) const {      // t within [t0, t0+dt]
      const double th = (t - t0) / dt;
      const double th1 = 1.0 - th;
      return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
  };

  struct Solution {
    std::vector<Segment> segments;  // ordered along the integration direction
    Vec y_final;
    double t_final = 0;
    long n_steps = 0, n_rejected = 0;

    Vec eval(double t) const;       // piecewise dense output
  };

  Dopri5(Rhs rhs, Options opts) : rhs_(std::move(rhs)), opts_(opts) {}

  /// Throws Failure(step_failure) when the step size underflows; the message
  /// carries the last good time.
  Solution integrate(double t0, const Vec& y0, double t1) const;

 private:
  Rhs rhs_;
  Options opts_;
};

/// Root of g along the dense solution on [ta, tb] (g(ta), g(tb) must bracket).
double dense_root(const Dopri5::Solution& sol, const std::function<double(double, const Vec&)>& g,
                  double ta, double tb, double tol = 1e-13);

/// Minimizer of g along the dense solution on [ta, tb] (golden section).
double dense_argmin(const Dopri5::Solution& sol, const std::function<double(double, const Vec&)>& g,
                    double ta, double tb, double tol = 1e-12);

}  // namespace specflow
