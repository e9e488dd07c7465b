#pragma once

// Steady transport by backward characteristic tracing: the continuity
// linearization div u + w_{x1} + U . grad w = G (undamped form, solved for w
// along characteristics of d_{x1} + U . grad) and the damped model equation
// w + w_{x1} + u . grad w = H. Includes singularity-point diagnostics and
// the W^s_p transport-estimate report.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/grid.hpp"
#include "inflow/norms.hpp"
#include "inflow/report.hpp"
#include "inflow/util.hpp"

namespace inflow::transport {

using fields::Grid;
using fields::GridPtr;
using fields::NodeKind;
using fields::ScalarField;
using fields::TraceSamples;
using fields::VectorField;

struct TraceOptions {
  double sing_radius = -1.0;   // < 0: take the grid default
  double crossing_tol = 1e-10;
  int step_limit = 200000;
  double tangential_threshold = 0.5;  // |dir . n| below this flags the crossing
};

struct CharacteristicPath {
  std::vector<Point> nodes;  // nodes[0] = origin, last = foot on Gamma_in
  std::vector<double> t;     // backward travel parameter per node
  Point foot;
  double travel = 0.0;       // T
  double arclength = 0.0;
  enum class Termination { ReachedInflow, NearSingularity, StepLimit, LeftDomain };
  Termination termination = Termination::ReachedInflow;
  bool near_tangential = false;
  bool clamped = false;  // position had to be projected back through Gamma_0

  bool ok() const { return termination == Termination::ReachedInflow; }
};

namespace detail {

inline Point rk4_step(const VectorField& U, const Point& y, double h) {
  auto rhs = [&](const Point& p) {
    const Point u = fields::interp(U, p);
    return Point{-(1.0 + u.x1), -u.x2};
  };
  const Point k1 = rhs(y);
  const Point k2 = rhs({y.x1 + 0.5 * h * k1.x1, y.x2 + 0.5 * h * k1.x2});
  const Point k3 = rhs({y.x1 + 0.5 * h * k2.x1, y.x2 + 0.5 * h * k2.x2});
  const Point k4 = rhs({y.x1 + h * k3.x1, y.x2 + h * k3.x2});
  return {y.x1 + h / 6.0 * (k1.x1 + 2 * k2.x1 + 2 * k3.x1 + k4.x1),
          y.x2 + h / 6.0 * (k1.x2 + 2 * k2.x2 + 2 * k3.x2 + k4.x2)};
}

}  // namespace detail

/// Backward trace of the characteristic of d_{x1} + U . grad through x until
/// it crosses Gamma_in; RK4 with locally scaled steps and bisection-refined
/// crossing.
inline CharacteristicPath trace_characteristic(const VectorField& U, const Point& x,
                                               TraceOptions opts = {}) {
  const Grid& g = *U.grid;
  const auto& dom = g.domain;
  if (!dom.contains(x, 1e-12 * std::max(1.0, dom.height_b)))
    throw std::invalid_argument("characteristic origin lies outside the domain");
  const double sing_radius = opts.sing_radius > 0 ? opts.sing_radius : g.sing_radius;
  const double scale = std::max(1.0, dom.diameter());
  const double h_floor = 1e-7 * scale;
  const double max_len = 2.0 * dom.diameter();

  auto local_h = [&](const Point& p) {
    double h = std::min(dom.width(p.x2) * g.dxi, dom.height_b * g.deta);
    for (const auto& sp : dom.singularity_points)
      if (dist(p, sp) <= sing_radius) {
        h /= 8.0;
        break;
      }
    return std::max(h, h_floor);
  };
  auto inflow_gap = [&](const Point& p) { return p.x1 - dom.x_lower(p.x2); };

  CharacteristicPath path;
  path.nodes.push_back(x);
  path.t.push_back(0.0);
  Point y = x;
  double t = 0.0;

  for (int step = 0;; ++step) {
    if (step >= opts.step_limit || path.arclength > max_len) {
      path.termination = CharacteristicPath::Termination::StepLimit;
      path.foot = y;
      break;
    }
    const double h = local_h(y);
    Point y_new = detail::rk4_step(U, y, h);
    if (y_new.x2 < dom.y0 || y_new.x2 > dom.y_top()) {
      // The advecting field should be tangent to Gamma_0; project back and
      // record the drift.
      const double drift = std::max(dom.y0 - y_new.x2, y_new.x2 - dom.y_top());
      y_new.x2 = std::clamp(y_new.x2, dom.y0, dom.y_top());
      if (drift > 1e-9 * dom.height_b) path.clamped = true;
    }
    if (inflow_gap(y_new) <= 0.0) {
      // Bisect the step size until the crossing gap is resolved.
      double lo = 0.0, hi = h;
      Point cross = y_new;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Point ym = detail::rk4_step(U, y, mid);
        if (inflow_gap(ym) <= 0.0) {
          hi = mid;
          cross = ym;
        } else {
          lo = mid;
        }
        if (std::abs(inflow_gap(cross)) <= opts.crossing_tol * scale) break;
        if (hi - lo < 1e-16 * std::max(h, 1.0)) break;
      }
      cross.x1 = dom.x_lower(cross.x2);  // land exactly on the graph
      path.arclength += dist(y, cross);
      t += hi;
      path.nodes.push_back(cross);
      path.t.push_back(t);
      path.foot = cross;
      path.travel = t;
      path.termination = CharacteristicPath::Termination::ReachedInflow;

      const Point u = fields::interp(U, cross);
      const Point dir{1.0 + u.x1, u.x2};
      const Point n = geometry::graph_normal(dom, geometry::Side::Inflow, cross.x2);
      const double transversality =
          std::abs(dir.x1 * n.x1 + dir.x2 * n.x2) / std::hypot(dir.x1, dir.x2);
      bool near_sing = false;
      for (const auto& sp : dom.singularity_points)
        if (dist(cross, sp) <= sing_radius) near_sing = true;
      path.near_tangential = near_sing || transversality < opts.tangential_threshold;
      if (near_sing && transversality < opts.tangential_threshold)
        path.termination = CharacteristicPath::Termination::NearSingularity;
      break;
    }
    path.arclength += dist(y, y_new);
    t += h;
    y = y_new;
    path.nodes.push_back(y);
    path.t.push_back(t);
  }
  path.travel = path.t.back();
  return path;
}

// ---------------------------------------------------------------------------
// Transport solves
// ---------------------------------------------------------------------------

struct TransportProblem {
  const VectorField* U = nullptr;  // advecting field
  const ScalarField* H = nullptr;  // source (G - div u in the continuity form)
  TraceSamples w_in;               // inflow trace, sampled in x2
  bool damped = false;             // zeroth-order term present
};

struct TransportQuality {
  int untraceable = 0;       // filled with the inflow value
  int flagged_tangential = 0;
  int clamped = 0;
  double max_arclength = 0.0;
};

namespace detail {

// exact weights of e^{-(T-t)} against a linear interpolant on one segment
inline std::pair<double, double> damped_weights(double dt) {
  const double alpha = -std::expm1(-dt);
  double beta;
  if (dt > 1e-4)
    beta = (dt + std::expm1(-dt)) / dt;
  else
    beta = dt * (0.5 - dt * (1.0 / 6.0 - dt / 24.0));
  return {alpha - beta, beta};
}

}  // namespace detail

/// Integrates one node's value along its characteristic.
inline double integrate_along(const CharacteristicPath& path, const ScalarField& H,
                              double w_foot, bool damped) {
  // Walk from the foot (last node) forward to the origin (first node).
  double w = w_foot;
  if (path.nodes.size() < 2) return w;
  double h_next = fields::interp(H, path.nodes.back());
  for (std::size_t i = path.nodes.size() - 1; i-- > 0;) {
    const double dt = path.t[i + 1] - path.t[i];
    const double h_here = fields::interp(H, path.nodes[i]);
    if (damped) {
      const auto [w_start, w_end] = detail::damped_weights(dt);
      w = w * std::exp(-dt) + h_next * w_start + h_here * w_end;
    } else {
      w += 0.5 * dt * (h_next + h_here);
    }
    h_next = h_here;
  }
  return w;
}

inline std::pair<ScalarField, TransportQuality> solve_transport(
    const TransportProblem& problem, TraceOptions opts = {}) {
  if (!problem.U || !problem.H) throw std::invalid_argument("transport problem incomplete");
  const VectorField& U = *problem.U;
  const ScalarField& H = *problem.H;
  const Grid& g = *U.grid;
  if (U.max_magnitude() >= 0.5)
    throw std::invalid_argument("advecting field too large: ||U||_inf must be < 1/2");

  ScalarField w(H.grid);
  std::vector<int> quality_flags(g.n_nodes(), 0);
  std::vector<double> lengths(g.ny, 0.0);

  parallel_tiles(g.ny, [&](std::size_t jj) {
    const int j = static_cast<int>(jj);
    double max_len = 0.0;
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      const Point p = g.node(k);
      if (i == 0 || g.kind[k] == NodeKind::Collapsed) {
        w.v[k] = problem.w_in.interp_param(p.x2);
        continue;
      }
      CharacteristicPath path;
      bool traced = true;
      try {
        path = trace_characteristic(U, p, opts);
      } catch (const std::invalid_argument&) {
        traced = false;
      }
      if (!traced || !path.ok()) {
        // Fall back to the inflow value at this height and record it.
        const double fallback_x2 = traced ? path.foot.x2 : p.x2;
        w.v[k] = problem.w_in.interp_param(fallback_x2);
        quality_flags[k] |= 1;
        continue;
      }
      if (path.near_tangential) quality_flags[k] |= 2;
      if (path.clamped) quality_flags[k] |= 4;
      max_len = std::max(max_len, path.arclength);
      const double w_foot = problem.w_in.interp_param(path.foot.x2);
      w.v[k] = integrate_along(path, H, w_foot, problem.damped);
    }
    lengths[jj] = max_len;
  });

  TransportQuality q;
  for (int flag : quality_flags) {
    if (flag & 1) ++q.untraceable;
    if (flag & 2) ++q.flagged_tangential;
    if (flag & 4) ++q.clamped;
  }
  for (double len : lengths) q.max_arclength = std::max(q.max_arclength, len);
  return {std::move(w), q};
}

// ---------------------------------------------------------------------------
// Singularity-point conditions on the data
// ---------------------------------------------------------------------------

struct SingConditionsReport {
  double sup_in = 0.0;    // sup |(u.n) x_lower'| near singularity points
  double sup_out = 0.0;   // sup |(u.n) x_upper'|
  double sup_as1 = 0.0;   // sup |u2| x_lower'^2 / sqrt(1 + x_lower'^2)
  double w_in_max = 0.0;  // max |w_in| in the neighborhoods
  bool w_in_zero = true;
  bool pass = true;
  int samples = 0;
};

inline SingConditionsReport check_sing_conditions(const VectorField& u,
                                                  const TraceSamples& w_in, double M,
                                                  double radius = -1.0) {
  const Grid& g = *u.grid;
  const auto& dom = g.domain;
  if (radius <= 0) radius = g.sing_radius;
  SingConditionsReport r;
  auto near_sing = [&](const Point& p) {
    for (const auto& sp : dom.singularity_points)
      if (dist(p, sp) <= radius) return true;
    return false;
  };
  for (int j = 0; j < g.ny; ++j) {
    for (const int i : {0, g.nx - 1}) {
      const int k = g.idx(i, j);
      if (g.kind[k] == NodeKind::Collapsed) continue;
      const Point p = g.node(k);
      if (!near_sing(p)) continue;
      ++r.samples;
      const auto side = (i == 0) ? geometry::Side::Inflow : geometry::Side::Outflow;
      const Point n = geometry::graph_normal(dom, side, p.x2);
      const double un = u.v1[k] * n.x1 + u.v2[k] * n.x2;
      const double slope = (i == 0) ? dom.dx_lower(p.x2) : dom.dx_upper(p.x2);
      if (i == 0) {
        r.sup_in = std::max(r.sup_in, std::abs(un * slope));
        r.sup_as1 = std::max(r.sup_as1, std::abs(u.v2[k]) * slope * slope /
                                            std::sqrt(1.0 + slope * slope));
      } else {
        r.sup_out = std::max(r.sup_out, std::abs(un * slope));
      }
    }
  }
  for (std::size_t i = 0; i < w_in.size(); ++i) {
    const Point p{dom.x_lower(w_in.param[i]), w_in.param[i]};
    if (near_sing(p)) r.w_in_max = std::max(r.w_in_max, std::abs(w_in.value[i]));
  }
  r.w_in_zero = r.w_in_max <= 1e-12;
  r.pass = r.sup_in <= M && r.sup_out <= M && r.sup_as1 <= M && r.w_in_zero;
  return r;
}

// ---------------------------------------------------------------------------
// Transport estimate report: ||w||_{W^s_p} <= C [ ||H||_{W^s_p} + ||w||_{L2} ]
// ---------------------------------------------------------------------------

inline EstimateReport transport_estimate_report(const ScalarField& w, const ScalarField& H,
                                                const TraceSamples& w_in,
                                                const fields::NormParams& params,
                                                double delta,
                                                const fields::QuadOptions& qopts = {}) {
  const double lhs = fields::wsp_norm(w, params, qopts);
  const double rhs = fields::wsp_norm(H, params, qopts) + fields::lq_norm(w, 2.0);
  EstimateReport r = EstimateReport::make("transport_wsp_estimate", lhs, rhs);
  r.admissible = params.s < delta;
  r.extra["delta"] = delta;
  r.extra["s"] = params.s;
  r.extra["w_in_linf"] = fields::trace_lp(w_in, std::numeric_limits<double>::infinity());
  return r;
}

/// Measured constant of ||w||_{L2} <= C ( ||w_in||_{L2(Gamma_in)} + ||H||_{L2} ).
inline EstimateReport transport_l2_report(const ScalarField& w, const ScalarField& H,
                                          const TraceSamples& w_in) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < w_in.size(); ++i)
    acc += w_in.value[i] * w_in.value[i] * w_in.weight(i);
  const double rhs = std::sqrt(static_cast<double>(acc)) + fields::lq_norm(H, 2.0);
  return EstimateReport::make("transport_l2_bound", fields::lq_norm(w, 2.0), rhs);
}

}  // namespace inflow::transport
