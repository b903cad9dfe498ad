#pragma once

#include <ostream>

#include "specflow/cutoff.hpp"
#include "specflow/flow.hpp"

namespace specflow {

/// One sampled point of a twisted flow relation in T*R^n x T*R^n.
/// Canonical order: left = (y, -eta) is the flow source with the momentum
/// twist applied, right = (x, xi) = exp(t H_p)(y, eta) is the target;
/// sign = sgn t distinguishes the forward and backward relations.
struct RelationSample {
  int sign = +1;
  PhasePoint left;   // (y, -eta)
  PhasePoint right;  // (x, xi)
  double t = 0.0;    // flight time (sign * t > 0)
  Mat tangent;       // 4n x 2n, columns span the tangent space at the sample

  PhasePoint source() const { return momentum_reversed(left); }  // (y, eta)
  Vec flat() const {
    Vec v(2 * left.flat().size());
    v << left.flat(), right.flat();
    return v;
  }
};

/// The paper's reflection between the two relations:
/// (y,-eta; x,xi) |-> (x,-xi; y,eta), i.e. swap factors, flip both momenta.
RelationSample reflect_sample(const RelationSample& s);

struct RelationBuildOptions {
  double t_max = 40.0;
  double drift_tol = 1e-10;
  bool with_tangent = true;
};

struct RelationCloud {
  std::vector<RelationSample> samples;
  std::vector<int> skipped_seeds;  // indices with no crossing within t_max
};

/// Seeds are (base point on supp chi1, launch direction); each is lifted to
/// the energy shell and flown with sign * t > 0.  Every traversal of
/// supp chi2 contributes one sample taken at the closest approach to the
/// chi2 center, with the tangent frame from the variational flow.
RelationCloud build_relation(const SystemConfig& sys, int sign, const CutoffFunction& chi1,
                             const CutoffFunction& chi2,
                             const std::vector<std::pair<Vec, Vec>>& seeds,
                             const RelationBuildOptions& opts = {});

/// Uniform seed grid over supp chi1 paired with sphere directions.
std::vector<std::pair<Vec, Vec>> default_seed_grid(const SystemConfig& sys,
                                                   const CutoffFunction& chi1, int per_axis,
                                                   int directions);

/// Max over samples and normalized tangent pairs of |sigma(u,v)|, where sigma
/// is the sum of the canonical forms on both factors (the form that vanishes
/// on the twisted relations).
double lagrangian_residual(const std::vector<RelationSample>& samples);

/// Same evaluation with the difference form sigma_2 - sigma_1 (vanishes on
/// untwisted graphs of symplectomorphisms; sanity route).
double graph_residual_difference_form(const std::vector<RelationSample>& samples);

/// Min pairwise distance between the clouds as points of R^{4n};
/// +infinity when either cloud is empty.
double check_disjointness(const std::vector<RelationSample>& plus,
                          const std::vector<RelationSample>& minus);

struct NonTrappedWindow {
  std::vector<RelationSample> samples;
  Vec bbox_lo, bbox_hi;  // bounding box in R^{4n}
};

/// Keeps samples whose underlying trajectory is certified non-trapped.
NonTrappedWindow certify_window(const SystemConfig& sys, const std::vector<RelationSample>& samples,
                                double horizon);

/// Columns: sign, t, y_i, eta_i, x_i, xi_i (untwisted source momentum).
void write_relation_csv(std::ostream& os, int n, const std::vector<RelationSample>& samples);

/// Tangent frame of the relation at a flown shell point: shell-tangent
/// variations pushed through J plus the flow direction at the target.
Mat relation_tangent_frame(const SystemConfig& sys, const PhasePoint& source, const Mat& J,
                           const PhasePoint& target);

}  // namespace specflow
