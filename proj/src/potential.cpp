#include "specflow/potential.hpp"

namespace specflow {

PotentialModel PotentialModel::make_zero() {
  PotentialModel p;
  p.kind = Kind::zero;
  return p;
}

PotentialModel PotentialModel::make_bumps(std::vector<GaussianBump> bumps) {
  PotentialModel p;
  p.kind = Kind::gaussian_bumps;
  p.bumps = std::move(bumps);
  return p;
}

PotentialModel PotentialModel::make_radial_tail(double coeff, double mu) {
  PotentialModel p;
  p.kind = Kind::radial_tail;
  p.tail_coeff = coeff;
  p.tail_mu = mu;
  return p;
}

double PotentialModel::value(const Vec& x) const {
  switch (kind) {
    case Kind::zero:
      return 0.0;
    case Kind::gaussian_bumps: {
      double v = 0.0;
      for (const auto& b : bumps) {
        const double r2 = (x - b.center).squaredNorm();
        v += b.amplitude * std::exp(-r2 / (b.width * b.width));
      }
      return v;
    }
    case Kind::radial_tail:
      return tail_coeff * std::pow(1.0 + x.squaredNorm(), -0.5 * tail_mu);
  }
  return 0.0;
}

Vec PotentialModel::gradient(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::gaussian_bumps:
      for (const auto& b : bumps) {
        const Vec d = x - b.center;
        const double w2 = b.width * b.width;
        const double e = b.amplitude * std::exp(-d.squaredNorm() / w2);
        g += (-2.0 / w2) * e * d;
      }
      break;
    case Kind::radial_tail: {
      const double s = 1.0 + x.squaredNorm();
      g = -tail_coeff * tail_mu * std::pow(s, -0.5 * tail_mu - 1.0) * x;
      break;
    }
  }
  return g;
}

Mat PotentialModel::hessian(const Vec& x) const {
  const auto n = x.size();
  Mat H = Mat::Zero(n, n);
  switch (kind) {
    case Kind::zero:
      break;
    case Kind::gaussian_bumps:
      for (const auto& b : bumps) {
        const Vec d = x - b.center;
        const double w2 = b.width * b.width;
        const double e = b.amplitude * std::exp(-d.squaredNorm() / w2);
        H += e * ((4.0 / (w2 * w2)) * (d * d.transpose()) - (2.0 / w2) * Mat::Identity(n, n));
      }
      break;
    case Kind::radial_tail: {
      const double s = 1.0 + x.squaredNorm();
      const double a = -tail_coeff * tail_mu * std::pow(s, -0.5 * tail_mu - 1.0);
      const double b = tail_coeff * tail_mu * (tail_mu + 2.0) * std::pow(s, -0.5 * tail_mu - 2.0);
      H = a * Mat::Identity(n, n) + b * (x * x.transpose());
      break;
    }
  }
  return H;
}

}  // namespace specflow
