#pragma once

// Boundary-fitted structured grid on domains bounded by inflow/outflow
// graphs: transfinite interpolation between x_lower(x2) and x_upper(x2).
// The map is x1 = (1-xi) x_lower + xi x_upper, x2 = y0 + b eta, so the
// inverse map and the metric are closed-form. Grid rows collapse to the
// singularity points where the graphs meet; such nodes are flagged.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/geometry.hpp"
#include "inflow/util.hpp"

namespace inflow::fields {

using geometry::Domain;
using geometry::PartRef;

enum class NodeKind : std::uint8_t {
  Interior,
  GammaIn,
  GammaOut,
  Gamma0Bottom,
  Gamma0Top,
  Corner,
  Collapsed,
};

struct Grid {
  Domain domain;
  int nx = 0, ny = 0;
  double dxi = 0, deta = 0;

  std::vector<double> x1, x2;     // node coordinates
  std::vector<double> area;       // dual-cell quadrature weight per node
  std::vector<NodeKind> kind;
  std::vector<bool> near_sing;    // within sing_radius of a singularity point
  std::vector<bool> row_collapsed;

  // Analytic metric of the transfinite map (zero on collapsed rows).
  std::vector<double> xi_x, xi_y, xi_y_xi, xi_y_eta, xi_x_eta;

  // Arclength along the graph parts at each row (from the bottom end).
  std::vector<double> arc_in, arc_out;

  double min_spacing = 0;      // smallest edge outside singularity neighborhoods
  double sing_radius = 0;

  int idx(int i, int j) const { return j * nx + i; }
  int n_nodes() const { return nx * ny; }
  Point node(int k) const { return {x1[k], x2[k]}; }
  bool interior(int i, int j) const {
    return i > 0 && i < nx - 1 && j > 0 && j < ny - 1;
  }

  double total_area() const {
    double a = 0;
    for (double v : area) a += v;
    return a;
  }

  /// Closed-form logical coordinates of a physical point (clamped rows aside).
  std::optional<std::pair<double, double>> logical_of(const Point& p,
                                                      double tol = 1e-9) const {
    const double eta = (p.x2 - domain.y0) / domain.height_b;
    if (eta < -tol || eta > 1.0 + tol) return std::nullopt;
    const double e = std::clamp(eta, 0.0, 1.0);
    const double w = domain.width(p.x2);
    if (w <= 1e-14) return std::make_pair(0.5, e);
    const double xi = (p.x1 - domain.x_lower(p.x2)) / w;
    if (xi < -tol || xi > 1.0 + tol) return std::nullopt;
    return std::make_pair(std::clamp(xi, 0.0, 1.0), e);
  }
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const Domain& d, int nx, int ny, double sing_radius = -1.0) {
  if (nx < 8 || ny < 8) throw std::invalid_argument("grid resolution must be >= 8");
  auto g = std::make_shared<Grid>();
  g->domain = d;
  g->nx = nx;
  g->ny = ny;
  g->dxi = 1.0 / (nx - 1);
  g->deta = 1.0 / (ny - 1);
  g->sing_radius = sing_radius > 0 ? sing_radius : d.default_sing_radius;
  const int n = nx * ny;
  g->x1.resize(n);
  g->x2.resize(n);
  g->kind.assign(n, NodeKind::Interior);
  g->near_sing.assign(n, false);
  g->row_collapsed.assign(ny, false);
  g->xi_x.assign(n, 0.0);
  g->xi_y.assign(n, 0.0);
  g->xi_y_xi.assign(n, 0.0);
  g->xi_y_eta.assign(n, 0.0);
  g->xi_x_eta.assign(n, 0.0);

  const double b = d.height_b;
  const double wtol = 1e-12 * std::max(1.0, b);
  for (int j = 0; j < ny; ++j) {
    const double eta = j * g->deta;
    const double y = d.y0 + b * eta;
    const double lo = d.x_lower(y), hi = d.x_upper(y);
    const double w = hi - lo;
    g->row_collapsed[j] = (w <= wtol);
    if (!g->row_collapsed[j] && w <= 0)
      throw geometry::DomainError("non-positive cell width at x2=" + std::to_string(y));
    const double dlo = d.dx_lower(y), dhi = d.dx_upper(y);
    const double d2lo = d.d2x_lower(y), d2hi = d.d2x_upper(y);
    const double wp = dhi - dlo;
    for (int i = 0; i < nx; ++i) {
      const int k = g->idx(i, j);
      const double xi = i * g->dxi;
      g->x1[k] = (1.0 - xi) * lo + xi * hi;
      g->x2[k] = y;
      if (g->row_collapsed[j]) continue;
      const double slope = (1.0 - xi) * dlo + xi * dhi;       // dx1/dx2 at fixed xi
      const double slope_t = (1.0 - xi) * d2lo + xi * d2hi;
      g->xi_x[k] = 1.0 / w;
      g->xi_y[k] = -slope / w;
      g->xi_y_xi[k] = -wp / w;
      g->xi_y_eta[k] = -b * (slope_t * w - slope * wp) / (w * w);
      g->xi_x_eta[k] = -b * wp / (w * w);
    }
  }

  // Node classification.
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = g->idx(i, j);
      if (g->row_collapsed[j]) {
        g->kind[k] = NodeKind::Collapsed;
        continue;
      }
      const bool on_xi = (i == 0 || i == nx - 1);
      const bool on_eta = (j == 0 || j == ny - 1);
      if (on_xi && on_eta)
        g->kind[k] = NodeKind::Corner;
      else if (i == 0)
        g->kind[k] = NodeKind::GammaIn;
      else if (i == nx - 1)
        g->kind[k] = NodeKind::GammaOut;
      else if (j == 0)
        g->kind[k] = NodeKind::Gamma0Bottom;
      else if (j == ny - 1)
        g->kind[k] = NodeKind::Gamma0Top;
      for (const auto& sp : d.singularity_points)
        if (dist(g->node(k), sp) <= g->sing_radius) g->near_sing[k] = true;
    }

  // Dual-cell areas: shoelace area of each primal quad, a quarter per corner.
  g->area.assign(n, 0.0);
  for (int j = 0; j + 1 < ny; ++j)
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = g->idx(i, j), bb = g->idx(i + 1, j);
      const int c = g->idx(i + 1, j + 1), e = g->idx(i, j + 1);
      const double ar =
          0.5 * std::abs((g->x1[bb] - g->x1[a]) * (g->x2[e] - g->x2[a]) -
                         (g->x1[e] - g->x1[a]) * (g->x2[bb] - g->x2[a])) +
          0.5 * std::abs((g->x1[bb] - g->x1[c]) * (g->x2[e] - g->x2[c]) -
                         (g->x1[e] - g->x1[c]) * (g->x2[bb] - g->x2[c]));
      if (ar <= 0 && !g->row_collapsed[j] && !g->row_collapsed[j + 1])
        throw geometry::DomainError("degenerate grid cell away from singularity points");
      const double q = 0.25 * ar;
      g->area[a] += q;
      g->area[bb] += q;
      g->area[c] += q;
      g->area[e] += q;
    }

  // Representative minimum spacing outside singularity neighborhoods.
  double hmin = std::numeric_limits<double>::max();
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int k = g->idx(i, j);
      if (g->near_sing[k] || g->kind[k] == NodeKind::Collapsed) continue;
      if (i + 1 < nx && g->kind[g->idx(i + 1, j)] != NodeKind::Collapsed)
        hmin = std::min(hmin, dist(g->node(k), g->node(g->idx(i + 1, j))));
      if (j + 1 < ny && g->kind[g->idx(i, j + 1)] != NodeKind::Collapsed)
        hmin = std::min(hmin, dist(g->node(k), g->node(g->idx(i, j + 1))));
    }
  g->min_spacing = hmin;

  // Arclength tables along the graphs.
  g->arc_in.assign(ny, 0.0);
  g->arc_out.assign(ny, 0.0);
  for (int j = 1; j < ny; ++j) {
    const double t0 = d.y0 + b * (j - 1) * g->deta;
    const double t1 = d.y0 + b * j * g->deta;
    g->arc_in[j] = g->arc_in[j - 1] +
                   integrate([&](double t) { return std::hypot(1.0, d.dx_lower(t)); }, t0, t1);
    g->arc_out[j] = g->arc_out[j - 1] +
                    integrate([&](double t) { return std::hypot(1.0, d.dx_upper(t)); }, t0, t1);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

struct ScalarField {
  GridPtr grid;
  std::vector<double> v;

  ScalarField() = default;
  explicit ScalarField(GridPtr g, double fill = 0.0)
      : grid(std::move(g)), v(grid->n_nodes(), fill) {}

  double& operator[](int k) { return v[k]; }
  double operator[](int k) const { return v[k]; }
  double& at(int i, int j) { return v[grid->idx(i, j)]; }
  double at(int i, int j) const { return v[grid->idx(i, j)]; }

  template <class F>
  static ScalarField sample(GridPtr g, F&& f) {
    ScalarField s(g);
    for (int k = 0; k < g->n_nodes(); ++k) s.v[k] = f(g->x1[k], g->x2[k]);
    return s;
  }
};

struct VectorField {
  GridPtr grid;
  std::vector<double> v1, v2;

  VectorField() = default;
  explicit VectorField(GridPtr g, double f1 = 0.0, double f2 = 0.0)
      : grid(std::move(g)), v1(grid->n_nodes(), f1), v2(grid->n_nodes(), f2) {}

  template <class F1, class F2>
  static VectorField sample(GridPtr g, F1&& f1, F2&& f2) {
    VectorField u(g);
    for (int k = 0; k < g->n_nodes(); ++k) {
      u.v1[k] = f1(g->x1[k], g->x2[k]);
      u.v2[k] = f2(g->x1[k], g->x2[k]);
    }
    return u;
  }

  double max_magnitude() const {
    double m = 0;
    for (std::size_t k = 0; k < v1.size(); ++k)
      m = std::max(m, std::hypot(v1[k], v2[k]));
    return m;
  }
};

inline void axpy(double a, const ScalarField& x, ScalarField& y) {
  for (std::size_t k = 0; k < y.v.size(); ++k) y.v[k] += a * x.v[k];
}
inline void axpy(double a, const VectorField& x, VectorField& y) {
  for (std::size_t k = 0; k < y.v1.size(); ++k) {
    y.v1[k] += a * x.v1[k];
    y.v2[k] += a * x.v2[k];
  }
}

// ---------------------------------------------------------------------------
// Bilinear interpolation in logical coordinates
// ---------------------------------------------------------------------------

inline double interp(const ScalarField& f, const Point& p) {
  const auto lc = f.grid->logical_of(p, 0.25);
  const Grid& g = *f.grid;
  const auto [xi, eta] = lc ? *lc : std::make_pair(0.0, std::clamp((p.x2 - g.domain.y0) / g.domain.height_b, 0.0, 1.0));
  const double fi = std::clamp(xi / g.dxi, 0.0, static_cast<double>(g.nx - 1) - 1e-12);
  const double fj = std::clamp(eta / g.deta, 0.0, static_cast<double>(g.ny - 1) - 1e-12);
  const int i = static_cast<int>(fi), j = static_cast<int>(fj);
  const double a = fi - i, b = fj - j;
  return (1 - a) * (1 - b) * f.at(i, j) + a * (1 - b) * f.at(i + 1, j) +
         (1 - a) * b * f.at(i, j + 1) + a * b * f.at(i + 1, j + 1);
}

inline Point interp(const VectorField& u, const Point& p) {
  const Grid& g = *u.grid;
  const auto lc = g.logical_of(p, 0.25);
  const auto [xi, eta] = lc ? *lc : std::make_pair(0.0, std::clamp((p.x2 - g.domain.y0) / g.domain.height_b, 0.0, 1.0));
  const double fi = std::clamp(xi / g.dxi, 0.0, static_cast<double>(g.nx - 1) - 1e-12);
  const double fj = std::clamp(eta / g.deta, 0.0, static_cast<double>(g.ny - 1) - 1e-12);
  const int i = static_cast<int>(fi), j = static_cast<int>(fj);
  const double a = fi - i, b = fj - j;
  auto blend = [&](const std::vector<double>& v) {
    return (1 - a) * (1 - b) * v[g.idx(i, j)] + a * (1 - b) * v[g.idx(i + 1, j)] +
           (1 - a) * b * v[g.idx(i, j + 1)] + a * b * v[g.idx(i + 1, j + 1)];
  };
  return {blend(u.v1), blend(u.v2)};
}

// ---------------------------------------------------------------------------
// Derivative stencils. One emission path serves both matrix assembly and
// field-level application.
// ---------------------------------------------------------------------------

namespace stencil {

// One-dimensional second-order stencils on a uniform logical axis.
// emit(offset_in_line, weight / h^order)
template <class Emit>
void d1(int i, int n, double h, Emit&& emit) {
  if (i > 0 && i < n - 1) {
    emit(i - 1, -0.5 / h);
    emit(i + 1, 0.5 / h);
  } else if (i == 0) {
    emit(0, -1.5 / h);
    emit(1, 2.0 / h);
    emit(2, -0.5 / h);
  } else {
    emit(n - 1, 1.5 / h);
    emit(n - 2, -2.0 / h);
    emit(n - 3, 0.5 / h);
  }
}

template <class Emit>
void d2(int i, int n, double h, Emit&& emit) {
  const double h2 = h * h;
  if (i > 0 && i < n - 1) {
    emit(i - 1, 1.0 / h2);
    emit(i, -2.0 / h2);
    emit(i + 1, 1.0 / h2);
  } else if (i == 0) {
    emit(0, 2.0 / h2);
    emit(1, -5.0 / h2);
    emit(2, 4.0 / h2);
    emit(3, -1.0 / h2);
  } else {
    emit(n - 1, 2.0 / h2);
    emit(n - 2, -5.0 / h2);
    emit(n - 3, 4.0 / h2);
    emit(n - 4, -1.0 / h2);
  }
}

}  // namespace stencil

enum class Deriv { Xi, Eta, XiXi, EtaEta, XiEta };

/// Emits (node_index, weight) pairs of the logical derivative at node (i,j).
template <class Emit>
void emit_logical(const Grid& g, int i, int j, Deriv d, double scale, Emit&& emit) {
  switch (d) {
    case Deriv::Xi:
      stencil::d1(i, g.nx, g.dxi, [&](int ii, double w) { emit(g.idx(ii, j), scale * w); });
      break;
    case Deriv::Eta:
      stencil::d1(j, g.ny, g.deta, [&](int jj, double w) { emit(g.idx(i, jj), scale * w); });
      break;
    case Deriv::XiXi:
      stencil::d2(i, g.nx, g.dxi, [&](int ii, double w) { emit(g.idx(ii, j), scale * w); });
      break;
    case Deriv::EtaEta:
      stencil::d2(j, g.ny, g.deta, [&](int jj, double w) { emit(g.idx(i, jj), scale * w); });
      break;
    case Deriv::XiEta:
      stencil::d1(i, g.nx, g.dxi, [&](int ii, double wi) {
        stencil::d1(j, g.ny, g.deta,
                    [&](int jj, double wj) { emit(g.idx(ii, jj), scale * wi * wj); });
      });
      break;
  }
}

enum class PhysDeriv { X1, X2, X1X1, X2X2, X1X2 };

/// Physical-space derivative stencil through the analytic metric.
template <class Emit>
void emit_deriv(const Grid& g, int i, int j, PhysDeriv d, double scale, Emit&& emit) {
  const int k = g.idx(i, j);
  const double invb = 1.0 / g.domain.height_b;
  switch (d) {
    case PhysDeriv::X1:
      emit_logical(g, i, j, Deriv::Xi, scale * g.xi_x[k], emit);
      break;
    case PhysDeriv::X2:
      emit_logical(g, i, j, Deriv::Xi, scale * g.xi_y[k], emit);
      emit_logical(g, i, j, Deriv::Eta, scale * invb, emit);
      break;
    case PhysDeriv::X1X1:
      emit_logical(g, i, j, Deriv::XiXi, scale * g.xi_x[k] * g.xi_x[k], emit);
      break;
    case PhysDeriv::X1X2:
      emit_logical(g, i, j, Deriv::Xi, scale * g.xi_x[k] * g.xi_y_xi[k], emit);
      emit_logical(g, i, j, Deriv::XiXi, scale * g.xi_x[k] * g.xi_y[k], emit);
      emit_logical(g, i, j, Deriv::XiEta, scale * g.xi_x[k] * invb, emit);
      break;
    case PhysDeriv::X2X2:
      emit_logical(g, i, j, Deriv::XiXi, scale * g.xi_y[k] * g.xi_y[k], emit);
      emit_logical(g, i, j, Deriv::XiEta, scale * 2.0 * g.xi_y[k] * invb, emit);
      emit_logical(g, i, j, Deriv::EtaEta, scale * invb * invb, emit);
      emit_logical(g, i, j, Deriv::Xi,
                   scale * (g.xi_y[k] * g.xi_y_xi[k] + g.xi_y_eta[k] * invb), emit);
      break;
  }
}

inline double apply_deriv(const Grid& g, const std::vector<double>& v, int i, int j,
                          PhysDeriv d) {
  if (g.kind[g.idx(i, j)] == NodeKind::Collapsed) return 0.0;
  double acc = 0.0;
  emit_deriv(g, i, j, d, 1.0, [&](int kk, double w) { acc += w * v[kk]; });
  return acc;
}

inline ScalarField deriv_field(const ScalarField& f, PhysDeriv d) {
  ScalarField out(f.grid);
  const Grid& g = *f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) out.at(i, j) = apply_deriv(g, f.v, i, j, d);
  return out;
}

inline ScalarField divergence(const VectorField& u) {
  ScalarField out(u.grid);
  const Grid& g = *u.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out.at(i, j) = apply_deriv(g, u.v1, i, j, PhysDeriv::X1) +
                     apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
  return out;
}

inline VectorField gradient(const ScalarField& f) {
  VectorField out(f.grid);
  const Grid& g = *f.grid;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      out.v1[k] = apply_deriv(g, f.v, i, j, PhysDeriv::X1);
      out.v2[k] = apply_deriv(g, f.v, i, j, PhysDeriv::X2);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Boundary node sets
// ---------------------------------------------------------------------------

struct BoundaryNode {
  int k = 0, i = 0, j = 0;
  geometry::PartRef part;
  double param = 0;   // x2 on graphs, x1 on horizontal segments
  double arc = 0;     // arclength along the part
  double weight = 0;  // trapezoid measure of the node on the part
  Point n, tau;       // outward normal, ccw tangent
  NodeKind kind = NodeKind::Interior;
};

/// Ordered boundary nodes of one part (corner/collapsed endpoints included;
/// their kind tells consumers to pin or skip them).
inline std::vector<BoundaryNode> part_nodes(const Grid& g, const geometry::PartRef& part) {
  using geometry::PartRef;
  const auto& dom = g.domain;
  std::vector<BoundaryNode> out;
  auto push_graph = [&](geometry::Side side) {
    const int i = (side == geometry::Side::Inflow) ? 0 : g.nx - 1;
    for (int j = 0; j < g.ny; ++j) {
      BoundaryNode bn;
      bn.i = i;
      bn.j = j;
      bn.k = g.idx(i, j);
      bn.part = part;
      bn.param = g.x2[bn.k];
      bn.arc = (side == geometry::Side::Inflow) ? g.arc_in[j] : g.arc_out[j];
      bn.n = geometry::graph_normal(dom, side, bn.param);
      bn.tau = {-bn.n.x2, bn.n.x1};
      bn.kind = g.kind[bn.k];
      out.push_back(bn);
    }
  };
  if (part.kind == PartRef::Kind::In) {
    push_graph(geometry::Side::Inflow);
  } else if (part.kind == PartRef::Kind::Out) {
    push_graph(geometry::Side::Outflow);
  } else {
    const auto& seg = dom.gamma0[part.index];
    const bool bottom = seg.location == geometry::Gamma0Segment::Location::Bottom;
    const int j = bottom ? 0 : g.ny - 1;
    for (int i = 0; i < g.nx; ++i) {
      BoundaryNode bn;
      bn.i = i;
      bn.j = j;
      bn.k = g.idx(i, j);
      bn.part = part;
      bn.param = g.x1[bn.k];
      bn.arc = g.x1[bn.k] - seg.x_lo;
      bn.n = bottom ? Point{0.0, -1.0} : Point{0.0, 1.0};
      bn.tau = {-bn.n.x2, bn.n.x1};
      bn.kind = g.kind[bn.k];
      out.push_back(bn);
    }
  }
  // Trapezoid weights along the part.
  for (std::size_t m = 0; m < out.size(); ++m) {
    const double left = m == 0 ? 0.0 : 0.5 * (out[m].arc - out[m - 1].arc);
    const double right = m + 1 == out.size() ? 0.0 : 0.5 * (out[m + 1].arc - out[m].arc);
    out[m].weight = left + right;
  }
  return out;
}

inline std::vector<BoundaryNode> boundary_nodes(const Grid& g) {
  std::vector<BoundaryNode> all;
  for (const auto& part : g.domain.parts()) {
    auto pn = part_nodes(g, part);
    all.insert(all.end(), pn.begin(), pn.end());
  }
  return all;
}

/// Samples a trace on one part at the grid's boundary nodes.
template <class F>
PartTrace sample_part_trace(const Grid& g, const geometry::PartRef& part, F&& fn) {
  PartTrace t;
  t.part = part;
  for (const auto& bn : part_nodes(g, part)) {
    t.samples.param.push_back(bn.param);
    t.samples.arc.push_back(bn.arc);
    t.samples.value.push_back(fn(bn));
  }
  return t;
}

// ---------------------------------------------------------------------------
// Field dump/load: columnar text with a one-line header.
// ---------------------------------------------------------------------------

inline void dump_field(std::ostream& os, const ScalarField& f, const std::string& name) {
  const Grid& g = *f.grid;
  os << "index,xi,eta,x1,x2," << name << "\n";
  os.precision(17);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      os << k << ',' << i * g.dxi << ',' << j * g.deta << ',' << g.x1[k] << ','
         << g.x2[k] << ',' << f.v[k] << "\n";
    }
}

inline void dump_field(std::ostream& os, const VectorField& u, const std::string& name) {
  const Grid& g = *u.grid;
  os << "index,xi,eta,x1,x2," << name << "1," << name << "2\n";
  os.precision(17);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      os << k << ',' << i * g.dxi << ',' << j * g.deta << ',' << g.x1[k] << ','
         << g.x2[k] << ',' << u.v1[k] << ',' << u.v2[k] << "\n";
    }
}

inline ScalarField load_scalar_field(std::istream& is, GridPtr g) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty field file");
  ScalarField f(g);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(row, cell, ',')) cols.push_back(std::stod(cell));
    if (cols.size() < 6) throw std::runtime_error("bad field row: " + line);
    const int k = static_cast<int>(cols[0]);
    if (k < 0 || k >= g->n_nodes()) throw std::runtime_error("field row out of range");
    f.v[k] = cols[5];
  }
  return f;
}

}  // namespace inflow::fields
