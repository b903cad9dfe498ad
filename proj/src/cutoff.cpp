#include "specflow/cutoff.hpp"

#include <cmath>

namespace specflow {

double smooth_step(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - s));
  const double b = std::exp(-1.0 / s);
  return a / (a + b);
}

double CutoffFunction::operator()(const Vec& x) const {
  const double r = (x - center).norm();
  return smooth_step((r - inner) / (outer - inner));
}

void CutoffFunction::validate(double r0) const {
  if (!(outer > inner && inner > 0))
    throw Failure(Errc::config_error, "cutoff radii must satisfy 0 < inner < outer");
  if (center.norm() - outer <= r0)
    throw Failure(Errc::config_error, "cutoff support intersects the interaction ball B(0,R0)");
}

bool supports_disjoint(const CutoffFunction& a, const CutoffFunction& b) {
  return (a.center - b.center).norm() > a.outer + b.outer;
}

}  // namespace specflow
