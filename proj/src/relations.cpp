#include "specflow/relations.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

namespace specflow {

namespace {

// canonical form on one factor: sigma((x1,xi1),(x2,xi2)) = <xi1,x2> - <x1,xi2>
double sigma_factor(const Vec& u, const Vec& v) {
  const auto n = u.size() / 2;
  return u.tail(n).dot(v.head(n)) - u.head(n).dot(v.tail(n));
}

double pair_form(const Vec& u, const Vec& v, int n, double left_weight) {
  return left_weight * sigma_factor(u.head(2 * n), v.head(2 * n)) +
         sigma_factor(u.tail(2 * n), v.tail(2 * n));
}

double frame_residual(const std::vector<RelationSample>& samples, double left_weight) {
  double worst = 0.0;
  for (const auto& s : samples) {
    if (s.tangent.size() == 0) continue;
    const int n = s.left.dim();
    const int cols = static_cast<int>(s.tangent.cols());
    for (int i = 0; i < cols; ++i)
      for (int j = i + 1; j < cols; ++j) {
        const Vec u = s.tangent.col(i).normalized();
        const Vec v = s.tangent.col(j).normalized();
        worst = std::max(worst, std::abs(pair_form(u, v, n, left_weight)));
      }
  }
  return worst;
}

}  // namespace

RelationSample reflect_sample(const RelationSample& s) {
  RelationSample r;
  r.sign = -s.sign;
  r.left = momentum_reversed(s.right);
  r.right = momentum_reversed(s.left);
  r.t = -s.t;
  if (s.tangent.size() != 0) {
    const int n = s.left.dim();
    r.tangent = Mat(s.tangent.rows(), s.tangent.cols());
    for (int c = 0; c < s.tangent.cols(); ++c) {
      const Vec col = s.tangent.col(c);
      Vec out(col.size());
      out.head(n) = col.segment(2 * n, n);          // x part  <- right x
      out.segment(n, n) = -col.segment(3 * n, n);   // -right xi
      out.segment(2 * n, n) = col.head(n);          // left x
      out.segment(3 * n, n) = -col.segment(n, n);   // -left xi
      r.tangent.col(c) = out;
    }
  }
  return r;
}

Mat relation_tangent_frame(const SystemConfig& sys, const PhasePoint& source, const Mat& J,
                           const PhasePoint& target) {
  const int n = sys.n;
  // orthonormal basis of the shell tangent space ker dp at the source
  Vec gradp(2 * n);
  gradp.head(n) = sys.potential.gradient(source.x);
  gradp.tail(n) = source.xi;
  Mat basis(2 * n, 2 * n - 1);
  {
    // Householder frame orthogonal to gradp
    Eigen::HouseholderQR<Mat> qr(gradp);
    const Mat Q = qr.householderQ();
    basis = Q.rightCols(2 * n - 1);
  }

  Mat frame(4 * n, 2 * n);
  for (int c = 0; c < 2 * n - 1; ++c) {
    const Vec d = basis.col(c);
    Vec col(4 * n);
    col.head(n) = d.head(n);
    col.segment(n, n) = -d.tail(n);  // momentum twist on the left factor
    col.tail(2 * n) = J * d;
    frame.col(c) = col;
  }
  // time direction: the flow vector at the target
  Vec col = Vec::Zero(4 * n);
  col.segment(2 * n, n) = target.xi;
  col.tail(n) = -sys.potential.gradient(target.x);
  frame.col(2 * n - 1) = col;
  return frame;
}

RelationCloud build_relation(const SystemConfig& sys, int sign, const CutoffFunction& chi1,
                             const CutoffFunction& chi2,
                             const std::vector<std::pair<Vec, Vec>>& seeds,
                             const RelationBuildOptions& opts) {
  chi1.validate(sys.r0);
  chi2.validate(sys.r0);
  if (!supports_disjoint(chi1, chi2))
    throw Failure(Errc::config_error, "paired cutoffs must have disjoint supports");
  if (sign != 1 && sign != -1) throw Failure(Errc::config_error, "sign must be +1 or -1");

  RelationCloud cloud;
  FlowOptions fopts;
  fopts.drift_tol = opts.drift_tol;

  Dopri5 ode(make_flow_rhs(sys, opts.with_tangent, false),
             {std::max(1e-14, opts.drift_tol * 1e-2), std::max(1e-14, opts.drift_tol * 1e-2), 0.0,
              2'000'000});
  const int n = sys.n;

  auto dist2 = [&](double, const Vec& y) { return (y.head(n) - chi2.center).norm(); };

  for (size_t si = 0; si < seeds.size(); ++si) {
    const auto& [base, direction] = seeds[si];
    if (!chi1.in_support(base)) {
      cloud.skipped_seeds.push_back(static_cast<int>(si));
      continue;
    }
    const PhasePoint src = energy_shell_sample(sys, base, direction);
    const Vec y0 = augmented_initial(sys, src, opts.with_tangent, false);
    const auto sol = ode.integrate(0.0, y0, sign * opts.t_max);

    // traversals of supp chi2: sign changes of |x - c2| - outer
    bool found = false;
    double t_prev = 0.0;
    double g_prev = dist2(0.0, y0) - chi2.outer;
    std::vector<double> crossings;
    for (const auto& seg : sol.segments) {
      const double t = seg.t0 + seg.dt;
      const double g = dist2(t, seg.eval(t)) - chi2.outer;
      if (g_prev * g < 0.0)
        crossings.push_back(dense_root(
            sol, [&](double tt, const Vec& y) { return dist2(tt, y) - chi2.outer; }, t_prev, t));
      t_prev = t;
      g_prev = g;
    }
    // pair entries with exits; an unmatched final entry pairs with the horizon
    for (size_t k = 0; k < crossings.size(); k += 2) {
      const double t_in = crossings[k];
      const double t_out = (k + 1 < crossings.size()) ? crossings[k + 1] : sol.t_final;
      const double tc = dense_argmin(sol, dist2, t_in, t_out);
      const Vec yc = sol.eval(tc);

      RelationSample s;
      s.sign = sign;
      s.t = tc;
      s.left = momentum_reversed(src);
      s.right = augmented_point(sys, yc);
      if (opts.with_tangent)
        s.tangent = relation_tangent_frame(sys, src, augmented_jacobian(sys, yc), s.right);
      cloud.samples.push_back(std::move(s));
      found = true;
    }
    if (!found) cloud.skipped_seeds.push_back(static_cast<int>(si));
  }
  return cloud;
}

std::vector<std::pair<Vec, Vec>> default_seed_grid(const SystemConfig& sys,
                                                   const CutoffFunction& chi1, int per_axis,
                                                   int directions) {
  std::vector<std::pair<Vec, Vec>> seeds;
  std::vector<Vec> bases;
  const double half = 0.9 * chi1.outer;
  if (sys.n == 1) {
    for (int i = 0; i < per_axis; ++i) {
      const double s = per_axis == 1 ? 0.0 : -1.0 + 2.0 * i / (per_axis - 1);
      bases.push_back(chi1.center + Vec::Constant(1, s * half));
    }
  } else {
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j) {
        Vec off = Vec::Zero(sys.n);
        off[0] = (per_axis == 1 ? 0.0 : -1.0 + 2.0 * i / (per_axis - 1)) * half;
        off[1] = (per_axis == 1 ? 0.0 : -1.0 + 2.0 * j / (per_axis - 1)) * half;
        if (off.norm() > half) continue;
        bases.push_back(chi1.center + off);
      }
  }
  std::vector<Vec> dirs;
  if (sys.n == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
  } else {
    for (int k = 0; k < directions; ++k) {
      const double th = 2.0 * M_PI * k / directions;
      Vec d = Vec::Zero(sys.n);
      d[0] = std::cos(th);
      d[1] = std::sin(th);
      dirs.push_back(d);
    }
  }
  for (const auto& b : bases)
    for (const auto& d : dirs) seeds.emplace_back(b, d);
  return seeds;
}

double lagrangian_residual(const std::vector<RelationSample>& samples) {
  return frame_residual(samples, +1.0);
}

double graph_residual_difference_form(const std::vector<RelationSample>& samples) {
  return frame_residual(samples, -1.0);
}

double check_disjointness(const std::vector<RelationSample>& plus,
                          const std::vector<RelationSample>& minus) {
  if (plus.empty() || minus.empty()) return std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& a : plus)
    for (const auto& b : minus) best = std::min(best, (a.flat() - b.flat()).norm());
  return best;
}

NonTrappedWindow certify_window(const SystemConfig& sys, const std::vector<RelationSample>& samples,
                                double horizon) {
  NonTrappedWindow w;
  for (const auto& s : samples) {
    const auto verdict = classify_trapping(sys, s.right, horizon);
    if (verdict.non_trapped()) w.samples.push_back(s);
  }
  if (!w.samples.empty()) {
    const int dim = static_cast<int>(w.samples.front().flat().size());
    w.bbox_lo = Vec::Constant(dim, std::numeric_limits<double>::infinity());
    w.bbox_hi = Vec::Constant(dim, -std::numeric_limits<double>::infinity());
    for (const auto& s : w.samples) {
      const Vec f = s.flat();
      w.bbox_lo = w.bbox_lo.cwiseMin(f);
      w.bbox_hi = w.bbox_hi.cwiseMax(f);
    }
  }
  return w;
}

void write_relation_csv(std::ostream& os, int n, const std::vector<RelationSample>& samples) {
  os << "sign,t";
  for (int i = 0; i < n; ++i) os << ",y" << (i + 1);
  for (int i = 0; i < n; ++i) os << ",eta" << (i + 1);
  for (int i = 0; i < n; ++i) os << ",x" << (i + 1);
  for (int i = 0; i < n; ++i) os << ",xi" << (i + 1);
  os << "\n" << std::setprecision(17);
  for (const auto& s : samples) {
    os << s.sign << "," << s.t;
    const PhasePoint src = s.source();
    for (int i = 0; i < n; ++i) os << "," << src.x[i];
    for (int i = 0; i < n; ++i) os << "," << src.xi[i];
    for (int i = 0; i < n; ++i) os << "," << s.right.x[i];
    for (int i = 0; i < n; ++i) os << "," << s.right.xi[i];
    os << "\n";
  }
}

}  // namespace specflow
