#pragma once

#include "specflow/potential.hpp"
#include "specflow/types.hpp"

namespace specflow {

/// The classical system: dimension, interaction radius, energy, potential,
/// claimed decay exponent and the semiclassical ladder.  Defines
/// p(x,xi) = |xi|^2/2 + V(x) and everything derived from it.
struct SystemConfig {
  int n = 1;
  double r0 = 1.0;
  double lambda = 0.5;
  PotentialModel potential;
  double mu = 2.0;
  std::vector<double> h_ladder;

  void validate() const;  // throws Failure(config_error) on broken invariants
};

double hamiltonian_value(const SystemConfig& sys, const PhasePoint& p);

/// H_p = (d_xi p, -d_x p) = (xi, -grad V) as a flat 2n-vector.
Vec hamiltonian_vector_field(const SystemConfig& sys, const PhasePoint& p);

/// L(xdot, x) = |xdot|^2/2 - V(x) + lambda.
double lagrangian_value(const SystemConfig& sys, const Vec& xdot, const Vec& x);

/// Lift a base point to the energy shell p = lambda along `direction`.
/// Throws Failure(forbidden_region) when V(x) >= lambda.
PhasePoint energy_shell_sample(const SystemConfig& sys, const Vec& x, const Vec& direction);

/// |xi| on the shell at base point x, i.e. sqrt(2(lambda - V(x))).
double shell_speed(const SystemConfig& sys, const Vec& x);

/// Checks |d^a V| <= C_a (1+|x|)^(-mu-|a|) for |a| <= 2 on sampled spheres
/// of the given radii (all > r0).  Report-only.
DecayReport validate_decay(const SystemConfig& sys, const std::vector<double>& sample_radii);

}  // namespace specflow
