#pragma once

#include "specflow/types.hpp"

namespace specflow {

/// One Gaussian bump  A * exp(-|x-c|^2 / w^2).
struct GaussianBump {
  Vec center;
  double amplitude = 0.0;
  double width = 1.0;
};

/// Smooth closed-form potential families with exact derivatives up to order 2.
///   zero            V = 0
///   gaussian_bumps  V = sum_m A_m exp(-|x-c_m|^2 / w_m^2)
///   radial_tail     V = c (1+|x|^2)^(-mu/2)
struct PotentialModel {
  enum class Kind { zero, gaussian_bumps, radial_tail };

  Kind kind = Kind::zero;
  std::vector<GaussianBump> bumps;
  double tail_coeff = 0.0;
  double tail_mu = 1.0;

  static PotentialModel make_zero();
  static PotentialModel make_bumps(std::vector<GaussianBump> bumps);
  static PotentialModel make_radial_tail(double coeff, double mu);

  double value(const Vec& x) const;
  Vec gradient(const Vec& x) const;
  Mat hessian(const Vec& x) const;
};

/// Per-derivative-order decay constants fitted on sampled spheres.
struct DecayReport {
  // sup over the sphere of radius r_i of max_{|alpha|=k} |d^alpha V|, k = 0,1,2
  std::vector<double> radii;
  std::vector<std::array<double, 3>> sup_derivs;
  std::array<double, 3> fitted_constants{};  // C_k = sup_i sup|d^k V| (1+r)^{mu+k}
  bool pass = false;
};

}  // namespace specflow
