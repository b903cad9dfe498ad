#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace specflow {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Cplx = std::complex<double>;

/// A point (x, xi) of phase space T*R^n.
struct PhasePoint {
  Vec x;
  Vec xi;

  PhasePoint() = default;
  PhasePoint(Vec x_, Vec xi_) : x(std::move(x_)), xi(std::move(xi_)) {}

  int dim() const { return static_cast<int>(x.size()); }
  bool finite() const { return x.allFinite() && xi.allFinite(); }

  // flatten to (x, xi) in R^{2n} and back
  Vec flat() const {
    Vec v(2 * x.size());
    v << x, xi;
    return v;
  }
  static PhasePoint from_flat(const Vec& v) {
    const auto n = v.size() / 2;
    return PhasePoint(v.head(n), v.tail(n));
  }
};

inline PhasePoint momentum_reversed(const PhasePoint& p) {
  return PhasePoint(p.x, -p.xi);
}

enum class Errc {
  forbidden_region,
  step_failure,
  no_convergence,
  singular_jacobian,
  solver_failure,
  resolution_error,
  unbounded_growth,
  degenerate_fit,
  config_error,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::forbidden_region: return "forbidden_region";
    case Errc::step_failure: return "step_failure";
    case Errc::no_convergence: return "no_convergence";
    case Errc::singular_jacobian: return "singular_jacobian";
    case Errc::solver_failure: return "solver_failure";
    case Errc::resolution_error: return "resolution_error";
    case Errc::unbounded_growth: return "unbounded_growth";
    case Errc::degenerate_fit: return "degenerate_fit";
    case Errc::config_error: return "config_error";
  }
  return "unknown";
}

/// Structured failure carrying a machine-readable code.
class Failure : public std::runtime_error {
 public:
  Failure(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Least-squares slope of y against x (both already transformed by caller).
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t m = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double det = m * sxx - sx * sx;
  f.slope = (m * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / m;
  for (size_t i = 0; i < m; ++i)
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
  return f;
}

/// Fit |v| ~ C * h^{-g}; returns g (growth exponent as h -> 0).
inline double fit_growth_exponent(const std::vector<double>& h, const std::vector<double>& mag) {
  std::vector<double> lx(h.size()), ly(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    lx[i] = std::log(h[i]);
    ly[i] = std::log(std::max(mag[i], 1e-300));
  }
  return -fit_line(lx, ly).slope;
}

}  // namespace specflow
