#pragma once

#include "specflow/types.hpp"

namespace specflow {

/// Smooth step: 1 for s <= 0, 0 for s >= 1, C-infinity in between.
double smooth_step(double s);

/// Smooth radial bump: identically 1 on |x-c| <= inner, identically 0 on
/// |x-c| >= outer.  Support is the closed outer ball.
struct CutoffFunction {
  Vec center;
  double inner = 0.5;
  double outer = 1.0;

  double operator()(const Vec& x) const;
  bool in_support(const Vec& x) const { return (x - center).norm() <= outer; }

  /// supp chi must avoid B(0,R0); paired cutoffs must have disjoint supports.
  void validate(double r0) const;
};

bool supports_disjoint(const CutoffFunction& a, const CutoffFunction& b);

}  // namespace specflow
