#pragma once

#include <optional>
#include <ostream>

#include "specflow/ode.hpp"
#include "specflow/system.hpp"

namespace specflow {

struct TrajectoryKnot {
  double t;
  PhasePoint state;
};

/// An integral curve of H_p with dense output over its span.
struct Trajectory {
  PhasePoint initial;
  double energy = 0.0;
  double energy_drift = 0.0;  // measured max |p(knot) - energy|
  double drift_tol = 0.0;
  std::vector<TrajectoryKnot> knots;  // ordered along the integration direction
  Dopri5::Solution dense;

  PhasePoint eval(double t) const { return PhasePoint::from_flat(dense.eval(t)); }
};

/// J(t) = d(x(t),xi(t)) / d(x0,xi0), the 2n x 2n linearized flow.
struct VariationalFrame {
  double t = 0.0;
  Mat J;

  /// || J^T Omega J - Omega ||_inf with Omega the canonical form.
  double symplectic_residual() const;
};

struct TrappingVerdict {
  enum class Kind { non_trapped, undecided };
  Kind kind = Kind::undecided;
  double t0 = 0.0;       // escape time when non_trapped
  double horizon = 0.0;  // probed horizon
  std::vector<std::pair<double, double>> escape_radii;  // (t, |x(t)|) probes

  bool non_trapped() const { return kind == Kind::non_trapped; }
};

struct FlowOptions {
  double drift_tol = 1e-10;   // energy drift budget; step tolerance derived from it
  double knot_spacing = 0.0;  // extra uniformly spaced knots when > 0
};

/// Integrate the flow over t_span = [ta, tb] containing 0.  Negative times
/// are integrated backward from 0; the knot list covers the whole span.
Trajectory integrate_trajectory(const SystemConfig& sys, const PhasePoint& start, double ta,
                                double tb, const FlowOptions& opts = {});

/// Jacobian of the flow map at time t, integrated jointly with the base
/// trajectory as one augmented system.
VariationalFrame integrate_variational(const SystemConfig& sys, const PhasePoint& start, double t,
                                       const FlowOptions& opts = {});

PhasePoint flow_map(const SystemConfig& sys, const PhasePoint& p0, double t,
                    const FlowOptions& opts = {});

/// State and Jacobian at time t in one solve.
std::pair<PhasePoint, VariationalFrame> flow_with_jacobian(const SystemConfig& sys,
                                                           const PhasePoint& start, double t,
                                                           const FlowOptions& opts = {});

TrappingVerdict classify_trapping(const SystemConfig& sys, const PhasePoint& start, double horizon,
                                  const FlowOptions& opts = {});

/// Samples shell points spread over the allowed region inside B(0,R0+1) and
/// returns true when every probe is certified non-trapped at the horizon.
bool certify_energy_nontrapping(const SystemConfig& sys, double horizon, int probes_per_axis = 5);

/// Columns: t, x_1..x_n, xi_1..xi_n, energy_drift.
void write_trajectory_csv(std::ostream& os, const SystemConfig& sys, const Trajectory& traj);

// --- internals shared with the shooting/relations modules ---

/// RHS of the augmented system (x, xi [, J columns] [, S]).
Dopri5::Rhs make_flow_rhs(const SystemConfig& sys, bool with_jacobian, bool with_action);

/// Flat initial state for the augmented system.
Vec augmented_initial(const SystemConfig& sys, const PhasePoint& start, bool with_jacobian,
                      bool with_action);

/// Views into the augmented flat state.
PhasePoint augmented_point(const SystemConfig& sys, const Vec& y);
Mat augmented_jacobian(const SystemConfig& sys, const Vec& y);
double augmented_action(const SystemConfig& sys, const Vec& y, bool with_jacobian);

}  // namespace specflow
