#include "specflow/system.hpp"

#include <cmath>

namespace specflow {

void SystemConfig::validate() const {
  if (n < 1 || n > 3) throw Failure(Errc::config_error, "dimension n must be in 1..3");
  if (!(r0 > 0)) throw Failure(Errc::config_error, "R0 must be positive");
  if (!(lambda > 0)) throw Failure(Errc::config_error, "lambda must be positive");
  if (!(mu > 0)) throw Failure(Errc::config_error, "mu must be positive");
  double prev = 2.0;
  for (double h : h_ladder) {
    if (!(h > 0.0 && h <= 1.0)) throw Failure(Errc::config_error, "h_ladder entries must lie in (0,1]");
    if (!(h < prev)) throw Failure(Errc::config_error, "h_ladder must be strictly decreasing");
    prev = h;
  }
  if (potential.kind == PotentialModel::Kind::gaussian_bumps)
    for (const auto& b : potential.bumps) {
      if (b.center.size() != n) throw Failure(Errc::config_error, "bump center dimension mismatch");
      if (!(b.width > 0)) throw Failure(Errc::config_error, "bump width must be positive");
    }
}

double hamiltonian_value(const SystemConfig& sys, const PhasePoint& p) {
  return 0.5 * p.xi.squaredNorm() + sys.potential.value(p.x);
}

Vec hamiltonian_vector_field(const SystemConfig& sys, const PhasePoint& p) {
  Vec f(2 * sys.n);
  f.head(sys.n) = p.xi;
  f.tail(sys.n) = -sys.potential.gradient(p.x);
  return f;
}

double lagrangian_value(const SystemConfig& sys, const Vec& xdot, const Vec& x) {
  return 0.5 * xdot.squaredNorm() - sys.potential.value(x) + sys.lambda;
}

double shell_speed(const SystemConfig& sys, const Vec& x) {
  const double gap = sys.lambda - sys.potential.value(x);
  if (gap <= 0.0)
    throw Failure(Errc::forbidden_region, "V(x) >= lambda, no shell point above x");
  return std::sqrt(2.0 * gap);
}

PhasePoint energy_shell_sample(const SystemConfig& sys, const Vec& x, const Vec& direction) {
  const double speed = shell_speed(sys, x);
  return PhasePoint(x, speed * direction.normalized());
}

DecayReport validate_decay(const SystemConfig& sys, const std::vector<double>& sample_radii) {
  DecayReport rep;
  rep.radii = sample_radii;

  // direction samples on the sphere (deterministic grid)
  std::vector<Vec> dirs;
  if (sys.n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else if (sys.n == 2) {
    const int m = 32;
    for (int k = 0; k < m; ++k) {
      const double th = 2.0 * M_PI * k / m;
      Vec d(2);
      d << std::cos(th), std::sin(th);
      dirs.push_back(d);
    }
  } else {
    const int m = 12;
    for (int a = 0; a < m; ++a)
      for (int b = 1; b < m; ++b) {
        const double ph = 2.0 * M_PI * a / m, th = M_PI * b / m;
        Vec d(3);
        d << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
        dirs.push_back(d);
      }
  }

  for (double r : sample_radii) {
    std::array<double, 3> sup{0.0, 0.0, 0.0};
    for (const auto& d : dirs) {
      const Vec x = r * d;
      sup[0] = std::max(sup[0], std::abs(sys.potential.value(x)));
      sup[1] = std::max(sup[1], sys.potential.gradient(x).lpNorm<Eigen::Infinity>());
      const Mat H = sys.potential.hessian(x);
      sup[2] = std::max(sup[2], H.cwiseAbs().maxCoeff());
    }
    rep.sup_derivs.push_back(sup);
  }

  // Fitted constant per order: C_k = sup_r sup|d^k V|(r) * (1+r)^(mu+k).
  // Compliance: the scaled profile must not grow with r (5% slack), i.e. the
  // claimed exponent is not an overclaim of the actual decay.
  rep.pass = true;
  for (int k = 0; k < 3; ++k) {
    double c = 0.0;
    double first = -1.0;
    for (size_t i = 0; i < rep.radii.size(); ++i) {
      const double scaled = rep.sup_derivs[i][k] * std::pow(1.0 + rep.radii[i], sys.mu + k);
      c = std::max(c, scaled);
      if (i == 0) first = scaled;
      if (scaled > 1.05 * std::max(first, 1e-300) && scaled > 1e-14) rep.pass = false;
    }
    rep.fitted_constants[k] = c;
  }
  return rep;
}

}  // namespace specflow
