#pragma once

#include <optional>
#include <ostream>

#include "specflow/relations.hpp"

namespace specflow {

/// A central-field chart: anchor trajectory leg (t0; y0, eta0 -> z0) with a
/// (T x Y x Z) window on which the momentum solve eta(t,y,z) is single-valued.
struct ActionChart {
  SystemConfig system;
  int nu = +1;  // sgn t0
  double t0 = 0.0;
  Vec y0, eta0, z0;
  double t_half = 0.0;  // window half-widths around the anchor
  Vec y_half, z_half;
  double shoot_tol = 1e-9;
  double drift_tol = 1e-10;
  double anchor_det = 0.0;  // central-field determinant at the anchor

  bool in_window(double t, const Vec& y, const Vec& z) const;
};

struct ShootingSolution {
  double t = 0.0;
  Vec y, z;
  Vec eta;
  double residual = 0.0;
  int newton_iterations = 0;
  PhasePoint endpoint;  // (x(t), xi(t)) of the solved leg
  double action = 0.0;  // integral of L along the leg
};

struct ChartBuildOptions {
  double t_scan_max = 60.0;  // search horizon for the anchor crossing
  double shoot_tol = 1e-9;
  double drift_tol = 1e-10;
  double initial_half = 0.05;
  double grow = 1.5;
  int max_expand = 10;
  double t_half_cap = 1.0;
  double yz_half_cap = 0.4;
};

/// Flies from the shell lift of (y0, direction) until the closest approach to
/// z0, verifies the central-field determinant there, and discovers the chart
/// window by expanding until Newton continuation degrades (then halving).
ActionChart build_action_chart(const SystemConfig& sys, const Vec& y0, const Vec& direction,
                               const Vec& z0, const ChartBuildOptions& opts = {});

/// det( dx/deta ) of the variational frame at time t from (y, eta).
double central_field_determinant(const SystemConfig& sys, const Vec& y, const Vec& eta, double t);

/// Newton solve of x(t; y, eta) = z seeded by continuation from the anchor,
/// or by the supplied seed momentum when one is given.
/// Throws Failure(no_convergence) / Failure(singular_jacobian).
ShootingSolution shooting_solve(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                                double tol = 0.0, const Vec* seed = nullptr);

/// S(t,y,z) = integral of L along the connecting trajectory segment.
double action_value(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                    const Vec* seed = nullptr);

struct GradientReport {
  Vec dz_S, dy_S;       // finite-difference gradients (Richardson-refined)
  double dz_error = 0;  // max | d_z S - xi(t) |
  double dy_error = 0;  // max | d_y S + eta |
};

GradientReport verify_gradients(const ActionChart& chart, double t, const Vec& y, const Vec& z,
                                double fd_step = 1e-4);

struct StationaryPoint {
  double t_star = 0.0;
  double action = 0.0;
  double d2t_S = 0.0;                 // non-degeneracy |d2t S| checked against this
  double shell_residual_source = 0.0; // |p(y,eta) - lambda| at t_star
  double shell_residual_target = 0.0; // |p(z,xi) - lambda| at t_star
};

struct StationaryScan {
  std::vector<double> t_grid, dtS;
  std::vector<StationaryPoint> points;
  // sign audit of the time derivative against +-(E - lambda)
  double match_minus = 0.0;  // max |dtS - ( -(E-lambda) )| over the grid
  double match_plus = 0.0;   // max |dtS - ( +(E-lambda) )|
  bool empty() const { return points.empty(); }
};

/// Finite-difference d_t S over the grid; zeros refined to roots; at each
/// root the shell residuals and the second derivative are recorded.
StationaryScan stationary_time_scan(const ActionChart& chart, const Vec& y, const Vec& z,
                                    const std::vector<double>& t_grid, double fd_step = 1e-4);

struct PhaseLagrangianResult {
  std::vector<RelationSample> samples;
  double max_containment_residual = 0.0;  // flow-forward comparison
};

/// Emits the generated relation points (left=(y, d_y S), right=(z, d_z S))
/// at the scanned stationary times and checks containment in the flow
/// relation by flying (y, -d_y S) for t* and comparing with (z, d_z S).
PhaseLagrangianResult build_phase_lagrangian(const ActionChart& chart, const Vec& y, const Vec& z,
                                             const std::vector<StationaryPoint>& points,
                                             double fd_step = 1e-4);

/// Columns: t, y_i, z_i, eta_i, S, dzS_err, dyS_err.
void write_chart_csv(std::ostream& os, const ActionChart& chart,
                     const std::vector<std::array<double, 16>>& rows);

}  // namespace specflow
