#pragma once

// Domains whose inflow/outflow boundaries are given piecewise by graphs
// x_1(x_2), joined by horizontal segments. Provides normals, boundary
// measure factors, flatness certificates near singularity points, and the
// boundary-data boundedness check.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "inflow/util.hpp"

namespace inflow::geometry {

class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

class CornerPointError : public std::runtime_error {
 public:
  explicit CornerPointError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Piece functions: polynomial coefficients or sampled data with a natural
// cubic spline (C^2, needed for metric second derivatives downstream).
// ---------------------------------------------------------------------------

class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> t, std::vector<double> x)
      : t_(std::move(t)), x_(std::move(x)) {
    const std::size_t n = t_.size();
    if (n < 3 || x_.size() != n) throw DomainError("spline needs >= 3 samples");
    for (std::size_t i = 1; i < n; ++i)
      if (!(t_[i] > t_[i - 1])) throw DomainError("spline abscissae must be increasing");
    y2_.assign(n, 0.0);
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double sig = (t_[i] - t_[i - 1]) / (t_[i + 1] - t_[i - 1]);
      const double p = sig * y2_[i - 1] + 2.0;
      y2_[i] = (sig - 1.0) / p;
      u[i] = (x_[i + 1] - x_[i]) / (t_[i + 1] - t_[i]) -
             (x_[i] - x_[i - 1]) / (t_[i] - t_[i - 1]);
      u[i] = (6.0 * u[i] / (t_[i + 1] - t_[i - 1]) - sig * u[i - 1]) / p;
    }
    for (std::size_t i = n - 1; i-- > 0;) y2_[i] = y2_[i] * y2_[i + 1] + u[i];
  }

  double eval(double t) const {
    const auto [i, a, b, h] = locate(t);
    return a * x_[i] + b * x_[i + 1] +
           ((a * a * a - a) * y2_[i] + (b * b * b - b) * y2_[i + 1]) * h * h / 6.0;
  }
  double deriv(double t) const {
    const auto [i, a, b, h] = locate(t);
    return (x_[i + 1] - x_[i]) / h +
           (-(3.0 * a * a - 1.0) * y2_[i] + (3.0 * b * b - 1.0) * y2_[i + 1]) * h / 6.0;
  }
  double deriv2(double t) const {
    const auto [i, a, b, h] = locate(t);
    return a * y2_[i] + b * y2_[i + 1];
  }

 private:
  std::tuple<std::size_t, double, double, double> locate(double t) const {
    std::size_t lo = 0, hi = t_.size() - 1;
    t = std::clamp(t, t_.front(), t_.back());
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (t_[mid] > t ? hi : lo) = mid;
    }
    const double h = t_[hi] - t_[lo];
    const double a = (t_[hi] - t) / h, b = (t - t_[lo]) / h;
    return {lo, a, b, h};
  }

  std::vector<double> t_, x_, y2_;
};

struct PieceFn {
  enum class Kind { Poly, Samples } kind = Kind::Poly;
  std::vector<double> coeffs;  // c0 + c1 t + c2 t^2 + ...
  CubicSpline spline;

  static PieceFn poly(std::vector<double> c) {
    PieceFn f;
    f.kind = Kind::Poly;
    f.coeffs = std::move(c);
    return f;
  }
  static PieceFn samples(std::vector<double> t, std::vector<double> x) {
    PieceFn f;
    f.kind = Kind::Samples;
    f.spline = CubicSpline(std::move(t), std::move(x));
    return f;
  }

  double eval(double t) const {
    if (kind == Kind::Samples) return spline.eval(t);
    double r = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) r = r * t + coeffs[i];
    return r;
  }
  double deriv(double t) const {
    if (kind == Kind::Samples) return spline.deriv(t);
    double r = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 1;)
      r = r * t + coeffs[i] * static_cast<double>(i);
    return r;
  }
  double deriv2(double t) const {
    if (kind == Kind::Samples) return spline.deriv2(t);
    double r = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 2;)
      r = r * t + coeffs[i] * static_cast<double>(i) * static_cast<double>(i - 1);
    return r;
  }
};

// ---------------------------------------------------------------------------
// Boundary graphs and domain
// ---------------------------------------------------------------------------

struct GraphPiece {
  double t0 = 0.0, t1 = 0.0;  // x_2 interval
  PieceFn fn;                 // x_1(x_2)
};

enum class Side { Inflow, Outflow };

struct BoundaryGraph {
  Side side = Side::Inflow;
  std::vector<GraphPiece> pieces;

  double t_begin() const { return pieces.front().t0; }
  double t_end() const { return pieces.back().t1; }

  const GraphPiece& piece_at(double x2) const {
    for (const auto& p : pieces)
      if (x2 <= p.t1 || &p == &pieces.back()) return p;
    return pieces.back();
  }
  double eval(double x2) const { return piece_at(x2).fn.eval(x2); }
  double deriv(double x2) const { return piece_at(x2).fn.deriv(x2); }
  double deriv2(double x2) const { return piece_at(x2).fn.deriv2(x2); }
};

struct Gamma0Segment {
  double x2 = 0.0;
  double x_lo = 0.0, x_hi = 0.0;
  enum class Location { Bottom, Top, InteriorStep } location = Location::Bottom;
  double length() const { return x_hi - x_lo; }
};

struct PartRef {
  enum class Kind { In, Out, Gamma0 } kind = Kind::In;
  int index = 0;  // gamma0 segment index
  bool operator==(const PartRef& o) const { return kind == o.kind && index == o.index; }
};

struct BoundingBox {
  double x1_min = 0, x1_max = 0, x2_min = 0, x2_max = 0;
};

/// Certificate that the boundary near a singularity point is no flatter than
/// a polynomial: |x_2(a) - x_2(b)| >= C |a - b|^N for points within radius l.
struct FlatnessCertificate {
  int exponent = 0;    // N
  double constant = 0; // C
  double radius = 0;   // l
  double delta = 0;    // Hoelder exponent of the inverse graph, 1/N
  bool constant_side = false;  // the piece is constant here; no lower bound needed
};

struct Domain {
  BoundaryGraph inflow, outflow;
  std::vector<Gamma0Segment> gamma0;
  std::vector<Point> corners;             // graph/segment junctions; normals undefined
  std::vector<Point> singularity_points;  // inflow and outflow graphs meet
  double y0 = 0.0;      // lower x_2 bound
  double height_b = 0;  // x_2 extent
  double a_min_inflow = 0;  // min of the inflow graph (kept for completeness; unused)
  BoundingBox bbox;
  double eps_corner = 0;          // excluded arc around corners
  double default_sing_radius = 0; // 5% of height unless overridden

  double y_top() const { return y0 + height_b; }
  double x_lower(double x2) const { return inflow.eval(x2); }
  double x_upper(double x2) const { return outflow.eval(x2); }
  double dx_lower(double x2) const { return inflow.deriv(x2); }
  double dx_upper(double x2) const { return outflow.deriv(x2); }
  double d2x_lower(double x2) const { return inflow.deriv2(x2); }
  double d2x_upper(double x2) const { return outflow.deriv2(x2); }
  double width(double x2) const { return x_upper(x2) - x_lower(x2); }
  double diameter() const {
    return std::hypot(bbox.x1_max - bbox.x1_min, bbox.x2_max - bbox.x2_min);
  }

  bool contains(const Point& p, double tol = 0.0) const {
    if (p.x2 < y0 - tol || p.x2 > y_top() + tol) return false;
    return p.x1 >= x_lower(p.x2) - tol && p.x1 <= x_upper(p.x2) + tol;
  }

  std::vector<PartRef> parts() const {
    std::vector<PartRef> r{{PartRef::Kind::In, 0}, {PartRef::Kind::Out, 0}};
    for (int i = 0; i < static_cast<int>(gamma0.size()); ++i)
      r.push_back({PartRef::Kind::Gamma0, i});
    return r;
  }
};

// ---------------------------------------------------------------------------
// Domain construction and validation
// ---------------------------------------------------------------------------

struct PieceSpec {
  double t0 = 0.0, t1 = 0.0;
  PieceFn fn;
};

struct DomainSpec {
  std::vector<PieceSpec> pieces_in, pieces_out;
  struct G0 {
    double x2;
    double x_lo, x_hi;
  };
  std::vector<G0> gamma0;
  double eps_corner_frac = 1e-9;
  double sing_radius_frac = 0.05;
};

namespace detail {

inline BoundaryGraph make_graph(const std::vector<PieceSpec>& specs, Side side,
                                const char* label) {
  if (specs.empty()) throw DomainError(std::string(label) + ": no pieces");
  BoundaryGraph g;
  g.side = side;
  const double scale = std::max(1.0, std::abs(specs.back().t1 - specs.front().t0));
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!(specs[i].t1 > specs[i].t0))
      throw DomainError(std::string(label) + ": empty interval in piece " + std::to_string(i));
    if (i > 0 && std::abs(specs[i].t0 - specs[i - 1].t1) > 1e-12 * scale)
      throw DomainError(std::string(label) + ": intervals not contiguous at piece " +
                        std::to_string(i));
    g.pieces.push_back({specs[i].t0, specs[i].t1, specs[i].fn});
  }
  // Junction ordering: earlier piece ends at or right of where the next starts.
  for (std::size_t i = 0; i + 1 < g.pieces.size(); ++i) {
    const double k = g.pieces[i].t1;
    const double a = g.pieces[i].fn.eval(k);
    const double b = g.pieces[i + 1].fn.eval(k);
    if (a < b - 1e-12 * scale)
      throw DomainError(std::string(label) + ": junction ordering violated at x2=" +
                        std::to_string(k));
  }
  return g;
}

}  // namespace detail

/// Validates the structured boundary description and assembles a Domain.
/// Singularity points are placed where the inflow and outflow graphs meet.
inline Domain build_domain(const DomainSpec& spec) {
  Domain d;
  d.inflow = detail::make_graph(spec.pieces_in, Side::Inflow, "pieces_in");
  d.outflow = detail::make_graph(spec.pieces_out, Side::Outflow, "pieces_out");

  const double y0 = d.inflow.t_begin(), y1 = d.inflow.t_end();
  if (std::abs(d.outflow.t_begin() - y0) > 1e-12 || std::abs(d.outflow.t_end() - y1) > 1e-12)
    throw DomainError("inflow/outflow graphs span different x2 ranges");
  d.y0 = y0;
  d.height_b = y1 - y0;
  if (!(d.height_b > 0)) throw DomainError("empty x2 range");
  d.eps_corner = spec.eps_corner_frac * d.height_b;
  d.default_sing_radius = spec.sing_radius_frac * d.height_b;

  // Strictly positive width inside, nonnegative width at the ends.
  const int nsample = 4096;
  double amin = std::numeric_limits<double>::max();
  double x1min = amin, x1max = -amin;
  for (int i = 0; i <= nsample; ++i) {
    const double t = y0 + d.height_b * static_cast<double>(i) / nsample;
    const double w = d.width(t);
    if (i > 0 && i < nsample && w <= 0)
      throw DomainError("boundary self-intersects: width <= 0 at x2=" + std::to_string(t));
    amin = std::min(amin, d.x_lower(t));
    x1min = std::min(x1min, d.x_lower(t));
    x1max = std::max(x1max, d.x_upper(t));
  }
  d.a_min_inflow = amin;
  d.bbox = {x1min, x1max, y0, y1};

  // Closure at bottom/top: either the graphs meet (singularity point) or a
  // matching gamma0 segment must be supplied.
  auto close_end = [&](double t, Gamma0Segment::Location loc) {
    const double lo = d.x_lower(t), hi = d.x_upper(t);
    const double gap = hi - lo;
    if (gap < -1e-12 * std::max(1.0, d.height_b))
      throw DomainError("graphs cross at x2=" + std::to_string(t));
    if (gap <= 1e-12 * std::max(1.0, d.height_b)) {
      d.singularity_points.push_back({lo, t});
      return;
    }
    const auto it = std::find_if(spec.gamma0.begin(), spec.gamma0.end(), [&](const auto& g) {
      return std::abs(g.x2 - t) < 1e-12 && std::abs(g.x_lo - lo) < 1e-9 &&
             std::abs(g.x_hi - hi) < 1e-9;
    });
    if (it == spec.gamma0.end())
      throw DomainError("boundary not closed at x2=" + std::to_string(t) +
                        ": missing gamma0 segment [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    d.gamma0.push_back({t, lo, hi, loc});
    d.corners.push_back({lo, t});
    d.corners.push_back({hi, t});
  };
  close_end(y0, Gamma0Segment::Location::Bottom);
  close_end(y1, Gamma0Segment::Location::Top);
  if (d.gamma0.size() + (d.singularity_points.size() ? 1 : 0) == 0)
    throw DomainError("boundary not closed");
  if (spec.gamma0.size() != d.gamma0.size())
    throw DomainError("gamma0 contains segments that match no graph gap");

  // Interior piece junctions become corner points (general-case validation).
  for (const auto* g : {&d.inflow, &d.outflow})
    for (std::size_t i = 0; i + 1 < g->pieces.size(); ++i) {
      const double k = g->pieces[i].t1;
      d.corners.push_back({g->pieces[i].fn.eval(k), k});
      d.corners.push_back({g->pieces[i + 1].fn.eval(k), k});
    }
  return d;
}

// ---------------------------------------------------------------------------
// Pointwise boundary quantities
// ---------------------------------------------------------------------------

struct Classified {
  PartRef part;
  double param = 0;  // x2 on graphs, x1 on gamma0 segments
};

inline Classified classify_boundary_point(const Domain& d, const Point& p,
                                          double tol = 1e-9) {
  for (const auto& c : d.corners)
    if (dist(p, c) <= d.eps_corner)
      throw CornerPointError("point lies on a corner of the boundary");
  const double scale = std::max(1.0, d.height_b);
  if (p.x2 >= d.y0 - tol && p.x2 <= d.y_top() + tol) {
    if (std::abs(p.x1 - d.x_lower(p.x2)) <= tol * scale)
      return {{PartRef::Kind::In, 0}, p.x2};
    if (std::abs(p.x1 - d.x_upper(p.x2)) <= tol * scale)
      return {{PartRef::Kind::Out, 0}, p.x2};
  }
  for (int i = 0; i < static_cast<int>(d.gamma0.size()); ++i) {
    const auto& g = d.gamma0[i];
    if (std::abs(p.x2 - g.x2) <= tol * scale && p.x1 >= g.x_lo - tol && p.x1 <= g.x_hi + tol)
      return {{PartRef::Kind::Gamma0, i}, p.x1};
  }
  throw DomainError("point does not lie on the boundary");
}

/// Outward unit normal on a graph part at height x2.
inline Point graph_normal(const Domain& d, Side side, double x2) {
  if (side == Side::Outflow) {
    const double g = d.dx_upper(x2);
    const double r = std::sqrt(1.0 + g * g);
    return {1.0 / r, -g / r};
  }
  const double g = d.dx_lower(x2);
  const double r = std::sqrt(1.0 + g * g);
  return {-1.0 / r, g / r};
}

/// Unit tangent with counterclockwise orientation of the boundary curve.
inline Point graph_tangent(const Domain& d, Side side, double x2) {
  const Point n = graph_normal(d, side, x2);
  return {-n.x2, n.x1};
}

inline Point normal_at(const Domain& d, const Point& p) {
  const auto c = classify_boundary_point(d, p);
  switch (c.part.kind) {
    case PartRef::Kind::In:
      return graph_normal(d, Side::Inflow, c.param);
    case PartRef::Kind::Out:
      return graph_normal(d, Side::Outflow, c.param);
    case PartRef::Kind::Gamma0: {
      const auto& g = d.gamma0[c.part.index];
      if (g.location == Gamma0Segment::Location::Bottom) return {0.0, -1.0};
      if (g.location == Gamma0Segment::Location::Top) return {0.0, 1.0};
      throw DomainError("normal on interior-step segments is not supported");
    }
  }
  throw DomainError("unreachable");
}

inline Point tangent_at(const Domain& d, const Point& p) {
  const Point n = normal_at(d, p);
  return {-n.x2, n.x1};
}

struct MeasureFactors {
  double ds_dx2 = 0;    // dS / dx2
  double n1_ds_dx2 = 0; // n^(1) dS / dx2  (+1 on outflow, -1 on inflow)
  double n2_ds_dx2 = 0; // n^(2) dS / dx2  (-x1' on outflow, +x1' on inflow)
};

inline MeasureFactors boundary_measure_factors(const Domain& d, const Point& p) {
  const auto c = classify_boundary_point(d, p);
  if (c.part.kind == PartRef::Kind::Gamma0)
    throw DomainError("measure factors in x2 are defined on graph parts only");
  if (c.part.kind == PartRef::Kind::Out) {
    const double g = d.dx_upper(c.param);
    return {std::sqrt(1.0 + g * g), 1.0, -g};
  }
  const double g = d.dx_lower(c.param);
  return {std::sqrt(1.0 + g * g), -1.0, g};
}

// ---------------------------------------------------------------------------
// Arclength and perimeter
// ---------------------------------------------------------------------------

/// Arclength along a graph part from the lower end of its x2 range to x2.
inline double graph_arclength(const Domain& d, Side side, double x2,
                              double tol = 1e-12) {
  const BoundaryGraph& g = (side == Side::Inflow) ? d.inflow : d.outflow;
  double total = 0.0;
  for (const auto& piece : g.pieces) {
    const double hi = std::min(x2, piece.t1);
    if (hi <= piece.t0) break;
    total += integrate(
        [&](double t) { return std::hypot(1.0, piece.fn.deriv(t)); }, piece.t0, hi, tol);
  }
  return total;
}

inline double part_length(const Domain& d, const PartRef& part) {
  switch (part.kind) {
    case PartRef::Kind::In:
      return graph_arclength(d, Side::Inflow, d.y_top());
    case PartRef::Kind::Out:
      return graph_arclength(d, Side::Outflow, d.y_top());
    case PartRef::Kind::Gamma0:
      return d.gamma0[part.index].length();
  }
  return 0.0;
}

inline double perimeter(const Domain& d) {
  double total = 0.0;
  for (const auto& p : d.parts()) total += part_length(d, p);
  return total;
}

// ---------------------------------------------------------------------------
// Flatness certificates (boundary no flatter than a polynomial)
// ---------------------------------------------------------------------------

struct FlatnessError : std::runtime_error {
  explicit FlatnessError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Analytic mode. `coeffs` are Taylor coefficients of x_2(x_1) at the
/// singularity point (constant term must vanish). Implements the first
/// nonvanishing derivative argument: C = |c_k| - M l with l shrunk until
/// C > 0; M defaults to a Taylor remainder bound from the tail coefficients.
inline FlatnessCertificate flatness_from_coeffs(const std::vector<double>& coeffs,
                                                double radius,
                                                std::optional<double> remainder_bound = {}) {
  if (!coeffs.empty() && std::abs(coeffs[0]) > 1e-14)
    throw FlatnessError("analytic mode expects a vanishing constant term");
  std::size_t k = 0;
  for (std::size_t i = 1; i < coeffs.size(); ++i)
    if (coeffs[i] != 0.0) {
      k = i;
      break;
    }
  if (k == 0) throw FlatnessError("all coefficients vanish: constant piece");

  double M;
  if (remainder_bound) {
    M = *remainder_bound;
  } else {
    // max |f^(k+1)| / (k+1)! over [-r, r], bounded coefficient-wise.
    M = 0.0;
    double fact_ratio = 1.0;  // j! / (j-k-1)! / (k+1)! accumulated per term
    for (std::size_t j = k + 1; j < coeffs.size(); ++j) {
      double binom = 1.0;
      for (std::size_t i = 0; i < k + 1; ++i)
        binom *= static_cast<double>(j - i) / static_cast<double>(k + 1 - i);
      M += std::abs(coeffs[j]) * binom * std::pow(radius, static_cast<double>(j - k - 1));
    }
    (void)fact_ratio;
  }

  double l = radius;
  double C = std::abs(coeffs[k]) - M * l;
  int guard = 0;
  while (C <= 0.0 && guard++ < 200) {
    l *= 0.5;
    C = std::abs(coeffs[k]) - M * l;
  }
  if (C <= 0.0) throw FlatnessError("could not certify a positive constant");
  return {static_cast<int>(k), C, l, 1.0 / static_cast<double>(k), false};
}

struct SampledFlatnessOptions {
  int n_max = 12;
  double pair_floor = 1e-13;  // ignore pairs closer than this in x1
};

/// Sampled mode. `pts` are boundary points near the singularity point `sing`
/// (the anchor). The exponent comes from a log-log least squares fit of
/// |dx2| against |dx1| over anchored pairs, rounded to the nearest integer;
/// the constant is then verified over all sample pairs.
inline FlatnessCertificate flatness_from_samples(const Point& sing,
                                                 const std::vector<Point>& pts,
                                                 double radius,
                                                 SampledFlatnessOptions opts = {}) {
  std::vector<Point> in_radius;
  for (const auto& p : pts)
    if (dist(p, sing) <= radius && dist(p, sing) > 0.0) in_radius.push_back(p);
  if (in_radius.size() < 4) throw FlatnessError("too few samples near the singularity point");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t m = 0;
  bool any_dx2 = false;
  for (const auto& p : in_radius) {
    const double dx1 = std::abs(p.x1 - sing.x1);
    const double dx2 = std::abs(p.x2 - sing.x2);
    if (dx1 < opts.pair_floor) continue;
    if (dx2 > opts.pair_floor) any_dx2 = true;
    const double lx = std::log(dx1);
    const double ly = std::log(std::max(dx2, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++m;
  }
  if (!any_dx2) throw FlatnessError("constant piece: x2 does not vary near the point");
  if (m < 3) throw FlatnessError("too few usable anchored pairs");
  const double denom = static_cast<double>(m) * sxx - sx * sx;
  if (std::abs(denom) < 1e-30) throw FlatnessError("degenerate sample spread");
  const double slope = (static_cast<double>(m) * sxy - sx * sy) / denom;
  if (!(slope > 0.5))
    throw FlatnessError("fitted exponent below 1: samples are not graph-like");
  const int N = static_cast<int>(std::lround(slope));
  if (N > opts.n_max || slope > static_cast<double>(opts.n_max) + 0.5)
    throw FlatnessError("no flatness exponent up to N_max=" + std::to_string(opts.n_max) +
                        " (fitted slope " + std::to_string(slope) + ")");

  // Empirical constant over all pairs (anchor included).
  std::vector<Point> all = in_radius;
  all.push_back(sing);
  double C = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      const double dx1 = std::abs(all[i].x1 - all[j].x1);
      const double dx2 = std::abs(all[i].x2 - all[j].x2);
      if (dx1 < opts.pair_floor) continue;
      C = std::min(C, dx2 / std::pow(dx1, static_cast<double>(std::max(N, 1))));
    }
  if (!(C > 0.0) || C == std::numeric_limits<double>::max())
    throw FlatnessError("flatness inequality fails on the samples for N=" +
                        std::to_string(N));
  return {N, C, radius, 1.0 / static_cast<double>(N), false};
}

/// Certificates for each singularity point of the domain, from curve samples
/// of the adjoining graph pieces. Returns one certificate per (point, side)
/// and the overall admissible Hoelder exponent delta = min over sides.
struct DomainFlatness {
  std::vector<FlatnessCertificate> certificates;
  double delta = std::numeric_limits<double>::infinity();  // no singularity points: no limit
};

inline DomainFlatness singularity_certificates(const Domain& d,
                                               double radius = -1.0,
                                               int samples_per_side = 64) {
  if (radius <= 0) radius = d.default_sing_radius;
  DomainFlatness out;
  for (const auto& sp : d.singularity_points) {
    for (const Side side : {Side::Inflow, Side::Outflow}) {
      const BoundaryGraph& g = (side == Side::Inflow) ? d.inflow : d.outflow;
      const bool at_bottom = std::abs(sp.x2 - d.y0) < std::abs(sp.x2 - d.y_top());
      std::vector<Point> pts;
      for (int i = 1; i <= samples_per_side; ++i) {
        const double dt = radius * static_cast<double>(i) / samples_per_side;
        const double t = at_bottom ? (d.y0 + dt) : (d.y_top() - dt);
        pts.push_back({g.eval(t), t});
      }
      // A side may be constant (horizontal) next to the point; skip it. The
      // paper allows constancy on at most one side.
      bool varies = false;
      for (const auto& p : pts)
        if (std::abs(p.x2 - sp.x2) > 1e-13) varies = true;
      if (!varies) {
        out.certificates.push_back({0, 0.0, radius, 0.0, true});
        continue;
      }
      auto cert = flatness_from_samples(sp, pts, radius * 2.0);
      out.certificates.push_back(cert);
      out.delta = std::min(out.delta, cert.delta);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Assumption on boundary data near singularity points
// ---------------------------------------------------------------------------

struct BoundarySample {
  Point p;
  double value = 0;  // d - n^(1) at p
};

struct Assumption1Report {
  double max_inflow = 0;   // sup |(d - n1) x_lower'|
  double max_outflow = 0;  // sup |(d - n1) x_upper'|
  bool pass = true;
  int samples_checked = 0;
};

/// Checks that (d - n^(1)) times the graph slopes stays below M in the
/// singularity neighborhoods.
inline Assumption1Report check_assumption1(const Domain& d,
                                           const std::vector<BoundarySample>& d_minus_n1,
                                           double M, double radius = -1.0) {
  if (radius <= 0) radius = d.default_sing_radius;
  Assumption1Report r;
  for (const auto& s : d_minus_n1) {
    bool near = false;
    for (const auto& sp : d.singularity_points)
      if (dist(s.p, sp) <= radius) near = true;
    if (!near) continue;
    ++r.samples_checked;
    Classified c;
    try {
      c = classify_boundary_point(d, s.p);
    } catch (const CornerPointError&) {
      continue;
    }
    if (c.part.kind == PartRef::Kind::In)
      r.max_inflow = std::max(r.max_inflow, std::abs(s.value * d.dx_lower(c.param)));
    else if (c.part.kind == PartRef::Kind::Out)
      r.max_outflow = std::max(r.max_outflow, std::abs(s.value * d.dx_upper(c.param)));
  }
  r.pass = (r.max_inflow <= M && r.max_outflow <= M);
  return r;
}

// ---------------------------------------------------------------------------
// Canonical test domains
// ---------------------------------------------------------------------------

/// Unit square: straight graphs x_lower = 0, x_upper = 1, two horizontal lids.
inline Domain unit_square_domain() {
  DomainSpec s;
  s.pieces_in.push_back({0.0, 1.0, PieceFn::poly({0.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0})});
  s.gamma0.push_back({0.0, 0.0, 1.0});
  s.gamma0.push_back({1.0, 0.0, 1.0});
  return build_domain(s);
}

/// Lens: x_lower = -x2(1-x2), x_upper = x2(1-x2); singularity points (0,0), (0,1).
inline Domain lens_domain() {
  DomainSpec s;
  s.pieces_in.push_back({0.0, 1.0, PieceFn::poly({0.0, -1.0, 1.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({0.0, 1.0, -1.0})});
  return build_domain(s);
}

/// Disk of diameter 1 through (0,0) and (0,1), sampled graphs +-sqrt(x2(1-x2)).
/// Near its singularity points the boundary behaves like x2 ~ x1^2.
inline Domain disk_domain(int knots = 129) {
  std::vector<double> t(knots), xin(knots), xout(knots);
  for (int i = 0; i < knots; ++i) {
    // Chebyshev clustering keeps the spline faithful near the endpoints.
    t[i] = 0.5 * (1.0 - std::cos(M_PI * static_cast<double>(i) / (knots - 1)));
    const double w = std::sqrt(std::max(0.0, t[i] * (1.0 - t[i])));
    xin[i] = -w;
    xout[i] = w;
  }
  t.front() = 0.0;
  t.back() = 1.0;
  DomainSpec s;
  s.pieces_in.push_back({0.0, 1.0, PieceFn::samples(t, xin)});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::samples(t, xout)});
  return build_domain(s);
}

}  // namespace inflow::geometry
