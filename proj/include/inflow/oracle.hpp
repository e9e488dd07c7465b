#pragma once

// Independent brute-force references used by the test suites: naive double
// sums for the fractional seminorms, closed-form steady transport solutions
// along exactly integrable characteristics, and a catalogue of manufactured
// solutions with hand-differentiated fields. Intentionally slow and simple;
// no code is shared with the optimized paths these check.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/grid.hpp"
#include "inflow/norms.hpp"

namespace inflow::oracle {

using fields::Grid;
using fields::NormParams;
using fields::ScalarField;
using fields::TraceSamples;

// ---------------------------------------------------------------------------
// Naive fractional seminorms
// ---------------------------------------------------------------------------

inline double naive_seminorm(const ScalarField& f, const NormParams& params) {
  params.validate();
  const Grid& g = *f.grid;
  const int n = g.n_nodes();
  const double sep = 1e-12 * std::max(1.0, g.domain.diameter());
  const double kexp = 2.0 + params.s * params.p;
  long double acc = 0.0L;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      if (a == b) continue;
      const double r = std::hypot(g.x1[a] - g.x1[b], g.x2[a] - g.x2[b]);
      if (r <= sep) continue;
      acc += std::pow(std::abs(f.v[a] - f.v[b]), params.p) /
             (params.epsilon + std::pow(r, kexp)) * g.area[a] * g.area[b];
    }
  }
  return std::pow(static_cast<double>(acc), 1.0 / params.p);
}

/// Same double loop with the roles of x and y swapped; used to exercise the
/// discrete kernel symmetry.
inline double naive_seminorm_swapped(const ScalarField& f, const NormParams& params) {
  params.validate();
  const Grid& g = *f.grid;
  const int n = g.n_nodes();
  const double sep = 1e-12 * std::max(1.0, g.domain.diameter());
  const double kexp = 2.0 + params.s * params.p;
  long double acc = 0.0L;
  for (int b = n - 1; b >= 0; --b) {
    for (int a = n - 1; a >= 0; --a) {
      if (a == b) continue;
      const double r = std::hypot(g.x1[b] - g.x1[a], g.x2[b] - g.x2[a]);
      if (r <= sep) continue;
      acc += std::pow(std::abs(f.v[b] - f.v[a]), params.p) /
             (params.epsilon + std::pow(r, kexp)) * g.area[b] * g.area[a];
    }
  }
  return std::pow(static_cast<double>(acc), 1.0 / params.p);
}

inline double naive_trace_seminorm(const TraceSamples& t, double s_trace, double p) {
  const std::size_t n = t.size();
  long double acc = 0.0L;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double ds = std::abs(t.arc[i] - t.arc[j]);
      if (ds <= 0.0) continue;
      acc += std::pow(std::abs(t.value[i] - t.value[j]), p) /
             std::pow(ds, 1.0 + s_trace * p) * t.weight(i) * t.weight(j);
    }
  return std::pow(static_cast<double>(acc), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Closed-form transport solutions
// ---------------------------------------------------------------------------

namespace poly {

using Coeffs = std::vector<double>;  // c0 + c1 t + ...

inline Coeffs mul(const Coeffs& a, const Coeffs& b) {
  Coeffs r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

inline void add_scaled(Coeffs& a, const Coeffs& b, double s) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += s * b[i];
}

inline double eval(const Coeffs& a, double t) {
  double r = 0.0;
  for (std::size_t i = a.size(); i-- > 0;) r = r * t + a[i];
  return r;
}

inline double integral(const Coeffs& a, double T) {
  double r = 0.0;
  for (std::size_t i = a.size(); i-- > 0;)
    r += a[i] * std::pow(T, static_cast<double>(i + 1)) / static_cast<double>(i + 1);
  return r;
}

/// J_k(T) = int_0^T e^{-(T-t)} t^k dt via J_k = T^k - k J_{k-1}.
inline double damped_moment(int k, double T) {
  double J = -std::expm1(-T);
  for (int m = 1; m <= k; ++m) J = std::pow(T, m) - m * J;
  return J;
}

inline double damped_integral(const Coeffs& a, double T) {
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    r += a[k] * damped_moment(static_cast<int>(k), T);
  return r;
}

}  // namespace poly

/// Exact solution of w_{x1} + U . grad w (+ w) = H on a domain with inflow
/// boundary on {x1 = 0}, for U = (0, c0 + c1 x1), polynomial H(x1, x2) given
/// as coefficient matrix h[k][l] of x1^k x2^l, and closed-form w_in(x2).
/// The characteristic through x is pos(t) = (t, y0 + c0 t + c1 t^2 / 2).
struct ExactTransport {
  double c0 = 0.0, c1 = 0.0;
  std::vector<std::vector<double>> h;  // h[k][l]
  std::function<double(double)> w_in = [](double) { return 0.0; };
  bool damped = false;

  double foot_x2(const Point& x) const {
    return x.x2 - c0 * x.x1 - 0.5 * c1 * x.x1 * x.x1;
  }

  double operator()(const Point& x) const {
    const double T = x.x1;
    const double y0 = foot_x2(x);
    // H along the path as a polynomial in the travel parameter t.
    poly::Coeffs along{0.0};
    const poly::Coeffs x2_of_t{y0, c0, 0.5 * c1};
    poly::Coeffs x2_pow{1.0};
    for (std::size_t l = 0;; ++l) {
      bool used = false;
      poly::Coeffs tk{1.0};
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (l < h[k].size() && h[k][l] != 0.0) {
          poly::add_scaled(along, poly::mul(tk, x2_pow), h[k][l]);
          used = true;
        }
        tk.insert(tk.begin(), 0.0);  // multiply by t
      }
      (void)used;
      bool more = false;
      for (const auto& row : h)
        if (l + 1 < row.size()) more = true;
      if (!more) break;
      x2_pow = poly::mul(x2_pow, x2_of_t);
    }
    if (damped)
      return w_in(y0) * std::exp(-T) + poly::damped_integral(along, T);
    return w_in(y0) + poly::integral(along, T);
  }
};

// ---------------------------------------------------------------------------
// Manufactured solutions
// ---------------------------------------------------------------------------

/// A scalar function with hand-coded derivatives up to second order.
struct Fn2 {
  std::function<double(double, double)> v, dx1, dx2, dx1x1, dx2x2, dx1x2;
};

struct MomentumParamsView {
  double mu = 1.0, nu = 1.0, gamma = 1.0;
};

struct ManufacturedCase {
  std::string name;
  Fn2 u1, u2, w;

  /// F = d_x1 u - mu Lap u - (nu+mu) grad div u + gamma grad w, componentwise.
  Point momentum_source(const MomentumParamsView& p, const Point& x) const {
    const double f1 = u1.dx1(x.x1, x.x2) -
                      p.mu * (u1.dx1x1(x.x1, x.x2) + u1.dx2x2(x.x1, x.x2)) -
                      (p.nu + p.mu) * (u1.dx1x1(x.x1, x.x2) + u2.dx1x2(x.x1, x.x2)) +
                      p.gamma * w.dx1(x.x1, x.x2);
    const double f2 = u2.dx1(x.x1, x.x2) -
                      p.mu * (u2.dx1x1(x.x1, x.x2) + u2.dx2x2(x.x1, x.x2)) -
                      (p.nu + p.mu) * (u1.dx1x2(x.x1, x.x2) + u2.dx2x2(x.x1, x.x2)) +
                      p.gamma * w.dx2(x.x1, x.x2);
    return {f1, f2};
  }

  /// Tangential slip data B = n . 2 mu D(u) . tau + f u . tau at a boundary
  /// point with normal n, tangent tau and friction value fval.
  double boundary_stress(const MomentumParamsView& p, const Point& x, const Point& n,
                         const Point& tau, double fval) const {
    const double d11 = u1.dx1(x.x1, x.x2);
    const double d22 = u2.dx2(x.x1, x.x2);
    const double d12 = 0.5 * (u1.dx2(x.x1, x.x2) + u2.dx1(x.x1, x.x2));
    const double stress =
        2.0 * p.mu *
        (n.x1 * (d11 * tau.x1 + d12 * tau.x2) + n.x2 * (d12 * tau.x1 + d22 * tau.x2));
    const double ut = u1.v(x.x1, x.x2) * tau.x1 + u2.v(x.x1, x.x2) * tau.x2;
    return stress + fval * ut;
  }

  double div_u(const Point& x) const {
    return u1.dx1(x.x1, x.x2) + u2.dx2(x.x1, x.x2);
  }
};

inline ManufacturedCase mms_case(const std::string& name) {
  const double pi = M_PI;
  auto G = [](double t) { return t * (1.0 - t); };
  auto Gp = [](double t) { return 1.0 - 2.0 * t; };

  if (name == "zero") {
    Fn2 z{[](double, double) { return 0.0; }, [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
          [](double, double) { return 0.0; }, [](double, double) { return 0.0; }};
    return {name, z, z, z};
  }

  if (name == "trig1") {
    // u . n = 0 on the unit square.
    Fn2 u1{[=](double x, double y) { return std::sin(pi * x) * std::cos(pi * y); },
           [=](double x, double y) { return pi * std::cos(pi * x) * std::cos(pi * y); },
           [=](double x, double y) { return -pi * std::sin(pi * x) * std::sin(pi * y); },
           [=](double x, double y) { return -pi * pi * std::sin(pi * x) * std::cos(pi * y); },
           [=](double x, double y) { return -pi * pi * std::sin(pi * x) * std::cos(pi * y); },
           [=](double x, double y) { return -pi * pi * std::cos(pi * x) * std::sin(pi * y); }};
    Fn2 u2{[=](double x, double y) { return std::cos(pi * x) * std::sin(pi * y); },
           [=](double x, double y) { return -pi * std::sin(pi * x) * std::sin(pi * y); },
           [=](double x, double y) { return pi * std::cos(pi * x) * std::cos(pi * y); },
           [=](double x, double y) { return -pi * pi * std::cos(pi * x) * std::sin(pi * y); },
           [=](double x, double y) { return -pi * pi * std::cos(pi * x) * std::sin(pi * y); },
           [=](double x, double y) { return -pi * pi * std::sin(pi * x) * std::cos(pi * y); }};
    Fn2 w{[=](double x, double y) { return std::cos(pi * x) * std::cos(pi * y); },
          [=](double x, double y) { return -pi * std::sin(pi * x) * std::cos(pi * y); },
          [=](double x, double y) { return -pi * std::cos(pi * x) * std::sin(pi * y); },
          [=](double x, double y) { return -pi * pi * std::cos(pi * x) * std::cos(pi * y); },
          [=](double x, double y) { return -pi * pi * std::cos(pi * x) * std::cos(pi * y); },
          [=](double x, double y) { return pi * pi * std::sin(pi * x) * std::sin(pi * y); }};
    return {name, u1, u2, w};
  }

  if (name == "poly2") {
    // Polynomial case on the unit square, u . n = 0 there.
    Fn2 u1{[=](double x, double y) { return G(x) * G(y); },
           [=](double x, double y) { return Gp(x) * G(y); },
           [=](double x, double y) { return G(x) * Gp(y); },
           [=](double, double y) { return -2.0 * G(y); },
           [=](double x, double) { return -2.0 * G(x); },
           [=](double x, double y) { return Gp(x) * Gp(y); }};
    Fn2 u2{[=](double x, double y) { return -G(x) * G(y); },
           [=](double x, double y) { return -Gp(x) * G(y); },
           [=](double x, double y) { return -G(x) * Gp(y); },
           [=](double, double y) { return 2.0 * G(y); },
           [=](double x, double) { return 2.0 * G(x); },
           [=](double x, double y) { return -Gp(x) * Gp(y); }};
    Fn2 w{[](double x, double y) { return 1.0 + x * y * y; },
          [](double, double y) { return y * y; },
          [](double x, double y) { return 2.0 * x * y; },
          [](double, double) { return 0.0; },
          [](double x, double) { return 2.0 * x; },
          [](double, double y) { return 2.0 * y; }};
    return {name, u1, u2, w};
  }

  if (name == "poly_slant") {
    // Slanted channel x_lower = q x2, x_upper = 1 + q x2. Streamfunction
    // psi = G(x1 - q x2) G(x2) gives u . n = 0 on all four sides.
    const double q = 0.3;
    auto xi = [=](double x, double y) { return x - q * y; };
    Fn2 u1{[=](double x, double y) { return -q * Gp(xi(x, y)) * G(y) + G(xi(x, y)) * Gp(y); },
           [=](double x, double y) { return 2.0 * q * G(y) + Gp(xi(x, y)) * Gp(y); },
           [=](double x, double y) {
             return q * q * (-2.0) * G(y) - 2.0 * q * Gp(xi(x, y)) * Gp(y) +
                    G(xi(x, y)) * (-2.0);
           },
           [=](double, double y) { return -2.0 * Gp(y); },
           [=](double x, double y) {
             return 3.0 * q * q * (-2.0) * Gp(y) - 3.0 * q * Gp(xi(x, y)) * (-2.0);
           },
           [=](double x, double y) { return -2.0 * q * (-2.0) * Gp(y) + Gp(xi(x, y)) * (-2.0); }};
    Fn2 u2{[=](double x, double y) { return -Gp(xi(x, y)) * G(y); },
           [=](double, double y) { return 2.0 * G(y); },
           [=](double x, double y) { return q * (-2.0) * G(y) - Gp(xi(x, y)) * Gp(y); },
           [=](double, double) { return 0.0; },
           [=](double x, double y) { return 2.0 * q * (-2.0) * Gp(y) - Gp(xi(x, y)) * (-2.0); },
           [=](double, double y) { return -(-2.0) * Gp(y); }};
    Fn2 w{[=](double x, double y) { return xi(x, y) * y; },
          [=](double, double y) { return y; },
          [=](double x, double y) { return -q * y + xi(x, y); },
          [=](double, double) { return 0.0; },
          [=](double, double) { return -2.0 * q; },
          [=](double, double) { return 1.0; }};
    return {name, u1, u2, w};
  }

  throw std::invalid_argument("unknown manufactured case '" + name + "'");
}

/// Domain matching the poly_slant case.
inline geometry::Domain slant_channel_domain() {
  geometry::DomainSpec s;
  const double q = 0.3;
  s.pieces_in.push_back({0.0, 1.0, geometry::PieceFn::poly({0.0, q})});
  s.pieces_out.push_back({0.0, 1.0, geometry::PieceFn::poly({1.0, q})});
  s.gamma0.push_back({0.0, 0.0, 1.0});
  s.gamma0.push_back({1.0, q, 1.0 + q});
  return geometry::build_domain(s);
}

}  // namespace inflow::oracle
