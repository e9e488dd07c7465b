#pragma once

// Sobolev-Slobodetskii norms on grid fields with the regularized kernel
// phi_eps(x,y) = eps + |x-y|^(2+sp), classical L_q norms, 1D trace norms in
// arclength, the data-distance functional D_0, and the imbedding /
// interpolation inequality checkers.
//
// The pair loops are the hot path: they are tiled into blocks and evaluated
// in parallel with a fixed reduction order, so results do not depend on the
// worker count.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/grid.hpp"
#include "inflow/util.hpp"

namespace inflow::fields {

struct NormParams {
  double s = 0.5;
  double p = 2.0;
  double epsilon = 0.0;

  void validate() const {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("norm order s must be in (0,1)");
    if (!(p >= 1.0)) throw std::invalid_argument("integrability exponent p must be >= 1");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("kernel regularization must be >= 0");
  }
  bool imbedding_admissible() const { return s * p > 2.0; }
};

struct QuadOptions {
  // Opt-in near-diagonal refinement: pairs closer than two grid spacings are
  // integrated on a 3x3 subsampling of each dual cell. Off by default so the
  // plain node-pair sum matches the brute-force reference exactly.
  bool near_diag_subsample = false;
};

// ---------------------------------------------------------------------------
// L_q norms
// ---------------------------------------------------------------------------

inline double lq_norm(const ScalarField& f, double q) {
  if (std::isinf(q)) {
    double m = 0;
    for (double v : f.v) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0)) throw std::invalid_argument("L_q norm requires q >= 1");
  long double acc = 0.0L;
  const auto& A = f.grid->area;
  for (std::size_t k = 0; k < f.v.size(); ++k) acc += pow_abs(f.v[k], q) * A[k];
  return std::pow(static_cast<double>(acc), 1.0 / q);
}

inline double lq_norm(const VectorField& u, double q) {
  if (std::isinf(q)) return u.max_magnitude();
  if (!(q >= 1.0)) throw std::invalid_argument("L_q norm requires q >= 1");
  long double acc = 0.0L;
  const auto& A = u.grid->area;
  for (std::size_t k = 0; k < u.v1.size(); ++k)
    acc += pow_abs(std::hypot(u.v1[k], u.v2[k]), q) * A[k];
  return std::pow(static_cast<double>(acc), 1.0 / q);
}

/// ||u||_{W^1_2}: L_2 of the field plus L_2 of all first derivatives.
inline double w12_norm(const VectorField& u) {
  const Grid& g = *u.grid;
  long double acc = 0.0L;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] == NodeKind::Collapsed) continue;
      const double d11 = apply_deriv(g, u.v1, i, j, PhysDeriv::X1);
      const double d12 = apply_deriv(g, u.v1, i, j, PhysDeriv::X2);
      const double d21 = apply_deriv(g, u.v2, i, j, PhysDeriv::X1);
      const double d22 = apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
      acc += (sqr(u.v1[k]) + sqr(u.v2[k]) + sqr(d11) + sqr(d12) + sqr(d21) + sqr(d22)) *
             g.area[k];
    }
  return std::sqrt(static_cast<double>(acc));
}

// ---------------------------------------------------------------------------
// Slobodetskii seminorm (tiled O(N^2) kernel)
// ---------------------------------------------------------------------------

namespace detail {

constexpr int kTile = 512;

struct PairKernel {
  const Grid* g;
  const double* val;
  double p, eps, kexp;  // kexp = (2+sp)/2, exponent of the squared distance
  double sep2;          // squared separation below which nodes coincide

  double term(int a, int b) const {
    const double Aa = g->area[a], Ab = g->area[b];
    if (Aa == 0.0 || Ab == 0.0) return 0.0;
    const double dx = g->x1[a] - g->x1[b];
    const double dy = g->x2[a] - g->x2[b];
    const double d2 = dx * dx + dy * dy;
    if (d2 <= sep2) return 0.0;
    const double df = val[a] - val[b];
    if (df == 0.0) return 0.0;
    return pow_abs(df, p) / (eps + std::pow(d2, kexp)) * Aa * Ab;
  }
};

// 3x3 logical subsampling of a node's dual cell for near-diagonal pairs.
struct SubSampler {
  const Grid* g;
  const ScalarField* f;

  struct Sub {
    double x1, x2, val, area;
  };

  std::array<Sub, 9> expand(int k) const {
    const int i = k % g->nx, j = k / g->nx;
    std::array<Sub, 9> out;
    int m = 0;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const double xi = std::clamp((i + di / 3.0) * g->dxi, 0.0, 1.0);
        const double eta = std::clamp((j + dj / 3.0) * g->deta, 0.0, 1.0);
        const double y = g->domain.y0 + g->domain.height_b * eta;
        const double lo = g->domain.x_lower(y), hi = g->domain.x_upper(y);
        Sub s;
        s.x1 = (1.0 - xi) * lo + xi * hi;
        s.x2 = y;
        s.val = interp(*f, {s.x1, s.x2});
        s.area = g->area[k] / 9.0;
        out[m++] = s;
      }
    return out;
  }
};

}  // namespace detail

/// Slobodetskii seminorm with kernel phi_eps. With eps = 0 coincident node
/// pairs (collapsed duplicates included) are excluded.
inline double slobodetskii_seminorm(const ScalarField& f, const NormParams& params,
                                    const QuadOptions& opts = {}) {
  params.validate();
  const Grid& g = *f.grid;
  const int n = g.n_nodes();
  detail::PairKernel K{&g, f.v.data(), params.p, params.epsilon,
                       0.5 * (2.0 + params.s * params.p),
                       sqr(1e-12 * std::max(1.0, g.domain.diameter()))};

  const int tiles = (n + detail::kTile - 1) / detail::kTile;
  std::vector<std::pair<int, int>> blocks;
  blocks.reserve(static_cast<std::size_t>(tiles) * (tiles + 1) / 2);
  for (int ti = 0; ti < tiles; ++ti)
    for (int tj = ti; tj < tiles; ++tj) blocks.emplace_back(ti, tj);

  const double near2 = sqr(2.0 * g.min_spacing);
  detail::SubSampler sub{&g, &f};

  std::vector<double> partial(blocks.size(), 0.0);
  parallel_tiles(blocks.size(), [&](std::size_t bi) {
    const auto [ti, tj] = blocks[bi];
    const int a0 = ti * detail::kTile, a1 = std::min(n, a0 + detail::kTile);
    const int b0 = tj * detail::kTile, b1 = std::min(n, b0 + detail::kTile);
    double acc = 0.0;
    for (int a = a0; a < a1; ++a) {
      const int bstart = (ti == tj) ? a + 1 : b0;
      for (int b = bstart; b < b1; ++b) {
        if (opts.near_diag_subsample) {
          const double dx = g.x1[a] - g.x1[b], dy = g.x2[a] - g.x2[b];
          const double d2 = dx * dx + dy * dy;
          if (d2 > K.sep2 && d2 < near2 && g.area[a] > 0 && g.area[b] > 0) {
            const auto sa = sub.expand(a), sb = sub.expand(b);
            for (const auto& qa : sa)
              for (const auto& qb : sb) {
                const double ddx = qa.x1 - qb.x1, ddy = qa.x2 - qb.x2;
                const double dd2 = ddx * ddx + ddy * ddy;
                if (dd2 <= K.sep2) continue;
                acc += pow_abs(qa.val - qb.val, K.p) /
                       (K.eps + std::pow(dd2, K.kexp)) * qa.area * qb.area;
              }
            continue;
          }
        }
        acc += K.term(a, b);
      }
    }
    partial[bi] = acc;
  });

  // Neumaier-compensated merge in block order: the result is independent of
  // the worker count.
  double sum = 0.0, comp = 0.0;
  for (double x : partial) {
    const double t = sum + x;
    comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  const double total = 2.0 * (sum + comp);  // ordered pairs
  return std::pow(total, 1.0 / params.p);
}

/// Full norm: L_p part plus the seminorm.
inline double wsp_norm(const ScalarField& f, const NormParams& params,
                       const QuadOptions& opts = {}) {
  return lq_norm(f, params.p) + slobodetskii_seminorm(f, params, opts);
}

/// ||u||_{W^{1+s}_p}: L_p of the field plus the W^s_p norm of every first
/// derivative component.
inline double w1sp_norm(const VectorField& u, const NormParams& params,
                        const QuadOptions& opts = {}) {
  const Grid& g = *u.grid;
  for (int j = 1; j + 1 < g.ny; ++j)
    if (g.row_collapsed[j])
      throw std::invalid_argument("degenerate interior grid row");
  double total = lq_norm(u, params.p);
  for (const auto* comp : {&u.v1, &u.v2})
    for (const PhysDeriv d : {PhysDeriv::X1, PhysDeriv::X2}) {
      ScalarField df(u.grid);
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) df.at(i, j) = apply_deriv(g, *comp, i, j, d);
      total += wsp_norm(df, params, opts);
    }
  return total;
}

// ---------------------------------------------------------------------------
// Trace norms (1D, in arclength)
// ---------------------------------------------------------------------------

inline double trace_lp(const TraceSamples& t, double p) {
  if (std::isinf(p)) {
    double m = 0;
    for (double v : t.value) m = std::max(m, std::abs(v));
    return m;
  }
  long double acc = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) acc += pow_abs(t.value[i], p) * t.weight(i);
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

/// 1D Slobodetskii seminorm of order s_trace with kernel |sigma-sigma'|^(1+sp).
inline double trace_seminorm(const TraceSamples& t, double s_trace, double p) {
  if (t.size() < 2) throw std::invalid_argument("trace seminorm needs >= 2 samples");
  if (!(s_trace > 0.0 && s_trace < 1.0))
    throw std::invalid_argument("trace order must be in (0,1)");
  const double kexp = 1.0 + s_trace * p;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double wi = t.weight(i);
    if (wi == 0.0) continue;
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double ds = std::abs(t.arc[i] - t.arc[j]);
      if (ds <= 0.0) continue;
      const double wj = t.weight(j);
      if (wj == 0.0) continue;
      acc += pow_abs(t.value[i] - t.value[j], p) / std::pow(ds, kexp) * wi * wj;
    }
  }
  return std::pow(static_cast<double>(2.0 * acc), 1.0 / p);
}

inline double trace_w_norm(const TraceSamples& t, double s_trace, double p) {
  return trace_lp(t, p) + trace_seminorm(t, s_trace, p);
}

/// Derivative of a trace with respect to arclength (second order, nonuniform).
inline TraceSamples trace_arc_derivative(const TraceSamples& t) {
  if (t.size() < 3) throw std::invalid_argument("trace derivative needs >= 3 samples");
  TraceSamples d = t;
  const auto& s = t.arc;
  const auto& v = t.value;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      const double h1 = s[1] - s[0], h2 = s[2] - s[1];
      d.value[0] = (-(2 * h1 + h2) / (h1 * (h1 + h2))) * v[0] +
                   ((h1 + h2) / (h1 * h2)) * v[1] - (h1 / (h2 * (h1 + h2))) * v[2];
    } else if (i + 1 == n) {
      const double h1 = s[n - 2] - s[n - 3], h2 = s[n - 1] - s[n - 2];
      d.value[n - 1] = (h2 / (h1 * (h1 + h2))) * v[n - 3] -
                       ((h1 + h2) / (h1 * h2)) * v[n - 2] +
                       ((h1 + 2 * h2) / (h2 * (h1 + h2))) * v[n - 1];
    } else {
      const double h1 = s[i] - s[i - 1], h2 = s[i + 1] - s[i];
      d.value[i] = (-h2 / (h1 * (h1 + h2))) * v[i - 1] + ((h2 - h1) / (h1 * h2)) * v[i] +
                   (h1 / (h2 * (h1 + h2))) * v[i + 1];
    }
  }
  return d;
}

/// Norm of order 1 + s_trace: trace L_p plus the order-s_trace seminorm of
/// the arclength derivative.
inline double trace_w1_norm(const TraceSamples& t, double s_trace, double p) {
  return trace_lp(t, p) + trace_seminorm(trace_arc_derivative(t), s_trace, p);
}

// ---------------------------------------------------------------------------
// Data distance functional D_0
// ---------------------------------------------------------------------------

namespace detail {

inline double tangent1_at(const geometry::Domain& dom, const geometry::PartRef& part,
                          double param) {
  using geometry::PartRef;
  switch (part.kind) {
    case PartRef::Kind::In:
      return geometry::graph_tangent(dom, geometry::Side::Inflow, param).x1;
    case PartRef::Kind::Out:
      return geometry::graph_tangent(dom, geometry::Side::Outflow, param).x1;
    case PartRef::Kind::Gamma0:
      // ccw orientation: bottom runs +x1, top runs -x1
      return dom.gamma0[part.index].location == geometry::Gamma0Segment::Location::Bottom
                 ? 1.0
                 : -1.0;
  }
  return 0.0;
}

inline double normal1_at(const geometry::Domain& dom, const geometry::PartRef& part,
                         double param) {
  using geometry::PartRef;
  switch (part.kind) {
    case PartRef::Kind::In:
      return geometry::graph_normal(dom, geometry::Side::Inflow, param).x1;
    case PartRef::Kind::Out:
      return geometry::graph_normal(dom, geometry::Side::Outflow, param).x1;
    case PartRef::Kind::Gamma0:
      return 0.0;
  }
  return 0.0;
}

}  // namespace detail

/// D_0 = ||b - f tau1||_{W^{s-1/p}_p(Gamma)} + ||d - n1||_{W^{1+s-1/p}_p(Gamma)}
///     + ||rho_in - 1||_{W^s_p(Gamma_in)}, parts summed.
inline double compute_d0(const BoundaryData& data, const geometry::Domain& dom,
                         const NormParams& params) {
  params.validate();
  const double t1 = params.s - 1.0 / params.p;
  if (!(t1 > 0.0))
    throw std::invalid_argument("compute_d0 requires s - 1/p > 0");
  double d0 = 0.0;
  for (const auto& part : dom.parts()) {
    const auto& tb = find_part(data.b, part, "b");
    const auto& td = find_part(data.d, part, "d");
    const auto& tf = find_part(data.f, part, "f");
    TraceSamples stress = tb.samples;
    TraceSamples dnorm = td.samples;
    for (std::size_t i = 0; i < stress.size(); ++i) {
      const double tau1 = detail::tangent1_at(dom, part, stress.param[i]);
      const double n1 = detail::normal1_at(dom, part, dnorm.param[i]);
      stress.value[i] -= tf.samples.value[i] * tau1;
      dnorm.value[i] -= n1;
    }
    d0 += trace_w_norm(stress, t1, params.p);
    d0 += trace_w1_norm(dnorm, t1, params.p);
  }
  TraceSamples rho = data.rho_in.samples;
  for (auto& v : rho.value) v -= 1.0;
  d0 += trace_w_norm(rho, params.s, params.p);
  return d0;
}

// ---------------------------------------------------------------------------
// Inequality checkers
// ---------------------------------------------------------------------------

struct ImbeddingCheck {
  double lq = 0, wsp = 0, ratio = 0;
  bool hypothesis_ok = false;  // sp > 2
};

inline ImbeddingCheck check_imbedding(const ScalarField& f, const NormParams& params,
                                      double q) {
  ImbeddingCheck c;
  c.lq = lq_norm(f, q);
  c.wsp = wsp_norm(f, params);
  c.ratio = c.wsp > 0 ? c.lq / c.wsp : 0.0;
  c.hypothesis_ok = params.imbedding_admissible();
  return c;
}

struct InterpolationCheck {
  double lq = 0, wsp = 0, l2 = 0, residual = 0;
};

/// residual = ||f||_q - delta ||f||_{W^s_p} - C(delta) ||f||_2; the harness
/// calibrates C(delta) over a field family and asserts residual <= 0.
inline InterpolationCheck check_interpolation(const ScalarField& f,
                                              const NormParams& params, double q,
                                              double delta, double c_delta) {
  InterpolationCheck c;
  c.lq = lq_norm(f, q);
  c.wsp = wsp_norm(f, params);
  c.l2 = lq_norm(f, 2.0);
  c.residual = c.lq - delta * c.wsp - c_delta * c.l2;
  return c;
}

}  // namespace inflow::fields
