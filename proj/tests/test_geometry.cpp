#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "inflow/geometry.hpp"

using namespace inflow;
using namespace inflow::geometry;

namespace {

DomainSpec unit_square_spec() {
  DomainSpec s;
  s.pieces_in.push_back({0.0, 1.0, PieceFn::poly({0.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0})});
  s.gamma0.push_back({0.0, 0.0, 1.0});
  s.gamma0.push_back({1.0, 0.0, 1.0});
  return s;
}

Domain slant_domain(double q) {
  DomainSpec s;
  s.pieces_in.push_back({0.0, 1.0, PieceFn::poly({0.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0, q})});
  s.gamma0.push_back({0.0, 0.0, 1.0});
  s.gamma0.push_back({1.0, 0.0, 1.0 + q});
  return build_domain(s);
}

}  // namespace

TEST_CASE("unit square: straight graphs, corners only", "[geometry]") {
  const Domain d = build_domain(unit_square_spec());
  CHECK(d.singularity_points.empty());
  CHECK(d.corners.size() == 4);
  CHECK(d.height_b == 1.0);
  CHECK(d.gamma0.size() == 2);
  CHECK(d.width(0.5) == 1.0);
}

TEST_CASE("lens: graphs meet at two singularity points", "[geometry]") {
  const Domain d = lens_domain();
  REQUIRE(d.singularity_points.size() == 2);
  CHECK(d.singularity_points[0].x1 == Catch::Approx(0.0).margin(1e-14));
  CHECK(d.singularity_points[0].x2 == Catch::Approx(0.0).margin(1e-14));
  CHECK(d.singularity_points[1].x2 == Catch::Approx(1.0).margin(1e-14));
  CHECK(d.gamma0.empty());
  // by construction both graphs vanish at the ends
  CHECK(d.x_lower(0.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(d.x_upper(0.0) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("junction ordering violation is rejected", "[geometry]") {
  DomainSpec s;
  // second inflow piece starts right of where the first ends
  s.pieces_in.push_back({0.0, 0.5, PieceFn::poly({0.0})});
  s.pieces_in.push_back({0.5, 1.0, PieceFn::poly({0.2})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0})});
  s.gamma0.push_back({0.0, 0.0, 1.0});
  s.gamma0.push_back({1.0, 0.2, 1.0});
  CHECK_THROWS_AS(build_domain(s), DomainError);
}

TEST_CASE("non-contiguous intervals are rejected", "[geometry]") {
  DomainSpec s;
  s.pieces_in.push_back({0.0, 0.4, PieceFn::poly({0.0})});
  s.pieces_in.push_back({0.5, 1.0, PieceFn::poly({0.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0})});
  CHECK_THROWS_AS(build_domain(s), DomainError);
}

TEST_CASE("self-intersecting boundary is rejected", "[geometry]") {
  DomainSpec s;
  // graphs cross in the middle
  s.pieces_in.push_back({0.0, 1.0, PieceFn::poly({0.0, 2.0})});
  s.pieces_out.push_back({0.0, 1.0, PieceFn::poly({1.0, -2.0})});
  CHECK_THROWS_AS(build_domain(s), DomainError);
}

TEST_CASE("normals on straight graphs", "[geometry]") {
  const Domain d = build_domain(unit_square_spec());
  const Point n_out = normal_at(d, {1.0, 0.5});
  CHECK(n_out.x1 == Catch::Approx(1.0));
  CHECK(n_out.x2 == Catch::Approx(0.0).margin(1e-15));
  const Point n_in = normal_at(d, {0.0, 0.5});
  CHECK(n_in.x1 == Catch::Approx(-1.0));
  CHECK(n_in.x2 == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("normal on the lens outflow at x2 = 1/4", "[geometry]") {
  const Domain d = lens_domain();
  // x_upper' = 1 - 2 x2 = 1/2; n = [1, -1/2]/sqrt(5/4)
  const double x2 = 0.25;
  const Point n = normal_at(d, {d.x_upper(x2), x2});
  const double r = std::sqrt(1.25);
  CHECK(n.x1 == Catch::Approx(1.0 / r).epsilon(1e-12));
  CHECK(n.x2 == Catch::Approx(-0.5 / r).epsilon(1e-12));

  // cross-check against a finite-difference tangent rotated outward
  const double h = 1e-6;
  const Point a{d.x_upper(x2 - h), x2 - h}, b{d.x_upper(x2 + h), x2 + h};
  const double tl = std::hypot(b.x1 - a.x1, b.x2 - a.x2);
  const Point tau_fd{(b.x1 - a.x1) / tl, (b.x2 - a.x2) / tl};
  CHECK(n.x1 == Catch::Approx(tau_fd.x2).epsilon(1e-6));
  CHECK(n.x2 == Catch::Approx(-tau_fd.x1).epsilon(1e-6));
}

TEST_CASE("normal is unit and orthogonal to the tangent at random points", "[geometry]") {
  const Domain d = lens_domain();
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int m = 0; m < 40; ++m) {
    const double x2 = u(rng);
    const bool in = m % 2 == 0;
    const Point p = in ? Point{d.x_lower(x2), x2} : Point{d.x_upper(x2), x2};
    const Point n = normal_at(d, p);
    CHECK(std::hypot(n.x1, n.x2) == Catch::Approx(1.0).margin(1e-12));
    const double slope = in ? d.dx_lower(x2) : d.dx_upper(x2);
    const Point tau{slope / std::hypot(1.0, slope), 1.0 / std::hypot(1.0, slope)};
    CHECK(std::abs(n.x1 * tau.x1 + n.x2 * tau.x2) < 1e-10);
  }
}

TEST_CASE("corner points are signaled distinctly", "[geometry]") {
  const Domain d = build_domain(unit_square_spec());
  CHECK_THROWS_AS(normal_at(d, {0.0, 0.0}), CornerPointError);
  CHECK_THROWS_AS(normal_at(d, {1.0, 1.0}), CornerPointError);
}

TEST_CASE("boundary measure factors", "[geometry]") {
  const Domain sq = build_domain(unit_square_spec());
  const auto mf_in = boundary_measure_factors(sq, {0.0, 0.3});
  CHECK(mf_in.ds_dx2 == Catch::Approx(1.0));
  CHECK(mf_in.n1_ds_dx2 == Catch::Approx(-1.0));
  CHECK(mf_in.n2_ds_dx2 == Catch::Approx(0.0).margin(1e-15));

  const Domain sl = slant_domain(1.0);  // outflow slope 1
  const auto mf_out = boundary_measure_factors(sl, {1.0 + 0.5, 0.5});
  CHECK(mf_out.ds_dx2 == Catch::Approx(std::sqrt(2.0)));
  CHECK(mf_out.n1_ds_dx2 == Catch::Approx(1.0));
  CHECK(mf_out.n2_ds_dx2 == Catch::Approx(-1.0));
}

TEST_CASE("measure factors are consistent with the normal", "[geometry]") {
  const Domain d = lens_domain();
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int m = 0; m < 20; ++m) {
    const double x2 = u(rng);
    const bool in = m % 2 == 0;
    const Point p = in ? Point{d.x_lower(x2), x2} : Point{d.x_upper(x2), x2};
    const auto mf = boundary_measure_factors(d, p);
    const Point n = normal_at(d, p);
    CHECK(mf.n1_ds_dx2 == Catch::Approx(n.x1 * mf.ds_dx2).margin(1e-12));
    CHECK(mf.n2_ds_dx2 == Catch::Approx(n.x2 * mf.ds_dx2).margin(1e-12));
    // n1 dS/dx2 is exactly +-1 on the graphs
    CHECK(std::abs(mf.n1_ds_dx2) == Catch::Approx(1.0).margin(1e-13));
  }
}

TEST_CASE("flatness certificate, analytic monomials", "[geometry]") {
  for (int N = 1; N <= 6; ++N) {
    std::vector<double> coeffs(N + 1, 0.0);
    coeffs[N] = 1.0;
    const auto cert = flatness_from_coeffs(coeffs, 0.25);
    CHECK(cert.exponent == N);
    CHECK(cert.constant == Catch::Approx(1.0));  // no remainder
    CHECK(cert.delta == Catch::Approx(1.0 / N));
  }
}

TEST_CASE("flatness certificate, analytic with remainder", "[geometry]") {
  // f = x^3 - x^4, supplied remainder bound M = 1: C = 1 - l
  const auto cert = flatness_from_coeffs({0, 0, 0, 1, -1}, 0.5, 1.0);
  CHECK(cert.exponent == 3);
  CHECK(cert.constant == Catch::Approx(1.0 - cert.radius));
  CHECK(cert.radius <= 0.5);
  CHECK(cert.constant > 0.0);
}

TEST_CASE("flatness certificate errors", "[geometry]") {
  CHECK_THROWS_AS(flatness_from_coeffs({0.0, 0.0, 0.0}, 0.1), FlatnessError);
  CHECK_THROWS_AS(flatness_from_coeffs({1.0, 1.0}, 0.1), FlatnessError);
}

TEST_CASE("flatness certificate, sampled monomials recover N exactly", "[geometry]") {
  for (int N = 1; N <= 6; ++N) {
    std::vector<Point> pts;
    for (int i = 1; i <= 64; ++i) {
      const double x = 0.2 * i / 64.0;
      pts.push_back({x, std::pow(x, N)});
    }
    const auto cert = flatness_from_samples({0.0, 0.0}, pts, 0.5);
    CHECK(cert.exponent == N);
    CHECK(cert.constant > 0.0);
  }
}

TEST_CASE("flatness rejects the non-analytic exp(-1/x^2) boundary", "[geometry]") {
  std::vector<Point> pts;
  for (int i = 1; i <= 64; ++i) {
    const double x = 0.2 * i / 64.0;
    pts.push_back({x, x * std::exp(-1.0 / (x * x))});
  }
  CHECK_THROWS_AS(flatness_from_samples({0.0, 0.0}, pts, 0.5), FlatnessError);
}

TEST_CASE("domain certificates: lens has delta 1, disk delta 1/2", "[geometry]") {
  const auto lens = singularity_certificates(lens_domain());
  CHECK(lens.delta == Catch::Approx(1.0));
  REQUIRE(lens.certificates.size() == 4);

  const auto disk = singularity_certificates(disk_domain());
  CHECK(disk.delta == Catch::Approx(0.5));

  const auto square = singularity_certificates(build_domain(unit_square_spec()));
  CHECK(std::isinf(square.delta));
  CHECK(square.certificates.empty());
}

TEST_CASE("assumption 1 boundedness check", "[geometry]") {
  const Domain lens = lens_domain();

  SECTION("zero perturbation passes with max 0") {
    std::vector<BoundarySample> samples;
    for (int i = 1; i < 40; ++i) {
      const double x2 = i / 40.0;
      samples.push_back({{lens.x_lower(x2), x2}, 0.0});
    }
    const auto r = check_assumption1(lens, samples, 0.1);
    CHECK(r.pass);
    CHECK(r.max_inflow == 0.0);
  }

  SECTION("polynomial perturbation matches the closed-form sup") {
    std::vector<BoundarySample> samples;
    double expected = 0.0;
    const double radius = lens.default_sing_radius;
    for (int i = 1; i <= 4000; ++i) {
      const double x2 = i / 4000.0 * 0.2;
      const Point p{lens.x_lower(x2), x2};
      const double v = x2 * (1.0 - x2);
      samples.push_back({p, v});
      if (dist(p, {0.0, 0.0}) <= radius)
        expected = std::max(expected, std::abs(v * lens.dx_lower(x2)));
    }
    const auto r = check_assumption1(lens, samples, 1.0);
    CHECK(r.max_inflow == Catch::Approx(expected));
    CHECK(r.pass);
  }

  SECTION("order-one data over a steep boundary fails") {
    const Domain disk = disk_domain();
    std::vector<BoundarySample> samples;
    for (int i = 1; i <= 400; ++i) {
      const double x2 = i / 400.0 * 0.05;
      samples.push_back({{disk.x_lower(x2), x2}, 1.0});
    }
    const auto r = check_assumption1(disk, samples, 1.0);
    CHECK_FALSE(r.pass);
    CHECK(r.max_inflow > 1.0);
  }
}

TEST_CASE("lens perimeter matches the closed form", "[geometry]") {
  const Domain d = lens_domain();
  // arclength of x1 = x2(1-x2): (sqrt(2) + asinh(1)) / 2 per side
  const double side = 0.5 * (std::sqrt(2.0) + std::asinh(1.0));
  const double closed_form = 2.0 * side;
  CHECK(perimeter(d) == Catch::Approx(closed_form).margin(1e-6));

  // independent high-order quadrature oracle
  const double oracle = inflow::integrate(
      [&](double t) { return std::hypot(1.0, 1.0 - 2.0 * t); }, 0.0, 1.0, 1e-14);
  CHECK(perimeter(d) == Catch::Approx(2.0 * oracle).margin(1e-9));
}

TEST_CASE("spline piece reproduces samples and stays C1", "[geometry]") {
  std::vector<double> t, x;
  for (int i = 0; i <= 32; ++i) {
    t.push_back(i / 32.0);
    x.push_back(std::sin(t.back()));
  }
  const PieceFn f = PieceFn::samples(t, x);
  for (int i = 0; i <= 32; ++i)
    CHECK(f.eval(i / 32.0) == Catch::Approx(std::sin(i / 32.0)).margin(1e-14));
  CHECK(f.deriv(0.5) == Catch::Approx(std::cos(0.5)).margin(1e-4));
  CHECK(f.deriv2(0.5) == Catch::Approx(-std::sin(0.5)).margin(1e-2));
}
