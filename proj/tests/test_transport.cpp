#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "inflow/oracle.hpp"
#include "inflow/transport.hpp"

using namespace inflow;
using namespace inflow::fields;
using namespace inflow::transport;

namespace {

GridPtr square_grid(int n) { return make_grid(geometry::unit_square_domain(), n, n); }

template <class F>
TraceSamples inflow_trace(const Grid& g, F fn) {
  TraceSamples t;
  for (int j = 0; j < g.ny; ++j) {
    const double y = g.x2[g.idx(0, j)];
    t.param.push_back(y);
    t.arc.push_back(g.arc_in[j]);
    t.value.push_back(fn(y));
  }
  return t;
}

}  // namespace

TEST_CASE("straight characteristic in the unit square", "[transport]") {
  auto g = square_grid(33);
  const VectorField U(g);
  const auto path = trace_characteristic(U, {0.5, 0.3});
  REQUIRE(path.ok());
  CHECK(path.foot.x1 == Catch::Approx(0.0).margin(1e-10));
  CHECK(path.foot.x2 == Catch::Approx(0.3).margin(1e-10));
  CHECK(path.arclength == Catch::Approx(0.5).margin(1e-9));
  CHECK(path.travel == Catch::Approx(0.5).margin(1e-9));
  CHECK_FALSE(path.near_tangential);
}

TEST_CASE("constant shear field: foot point matches the exact flow", "[transport]") {
  auto g = square_grid(33);
  const auto U = VectorField::sample(g, [](double, double) { return 0.0; },
                                     [](double, double) { return 0.1; });
  const auto path = trace_characteristic(U, {0.5, 0.3});
  REQUIRE(path.ok());
  oracle::ExactTransport ex;
  ex.c0 = 0.1;
  CHECK(path.foot.x2 == Catch::Approx(ex.foot_x2({0.5, 0.3})).margin(1e-9));
  CHECK(path.travel == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("path tangent follows [1,0] + U", "[transport]") {
  auto g = square_grid(33);
  const auto U = VectorField::sample(
      g, [](double, double) { return 0.0; },
      [](double x, double) { return 0.1 * std::sin(M_PI * x); });
  const auto path = trace_characteristic(U, {0.8, 0.5});
  REQUIRE(path.ok());
  REQUIRE(path.nodes.size() > 4);
  for (std::size_t m = 0; m + 1 < path.nodes.size(); ++m) {
    const double dt = path.t[m + 1] - path.t[m];
    if (dt <= 1e-12) continue;
    // backward trace: segment direction is -(e1 + U) at the midpoint
    const Point mid{0.5 * (path.nodes[m].x1 + path.nodes[m + 1].x1),
                    0.5 * (path.nodes[m].x2 + path.nodes[m + 1].x2)};
    const Point u = interp(U, mid);
    const double dx1 = (path.nodes[m + 1].x1 - path.nodes[m].x1) / dt;
    const double dx2 = (path.nodes[m + 1].x2 - path.nodes[m].x2) / dt;
    CHECK(dx1 == Catch::Approx(-(1.0 + u.x1)).margin(1e-4));
    CHECK(dx2 == Catch::Approx(-u.x2).margin(1e-4));
  }
}

TEST_CASE("path length is comparable to the horizontal gap", "[transport]") {
  auto g = square_grid(33);
  const auto U = VectorField::sample(g, [](double, double) { return -0.05; },
                                     [](double, double) { return 0.08; });
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> un(0.1, 0.9);
  for (int m = 0; m < 25; ++m) {
    const Point x{un(rng), un(rng)};
    const auto path = trace_characteristic(U, x);
    REQUIRE(path.ok());
    const double gap = std::abs(x.x1 - g->domain.x_lower(x.x2));
    CHECK(path.arclength <= 2.0 * gap);
    CHECK(path.arclength >= 0.5 * gap);
    CHECK(path.arclength <= 2.0 * g->domain.diameter());
  }
}

TEST_CASE("singularity neighborhood is flagged on the lens", "[transport]") {
  auto g = make_grid(geometry::lens_domain(), 33, 33);
  const VectorField U(g);
  const double y = 0.02;  // within the default 5% radius of (0,0)
  const Point x{0.5 * (g->domain.x_lower(y) + g->domain.x_upper(y)), y};
  const auto path = trace_characteristic(U, x);
  CHECK(path.near_tangential);
}

TEST_CASE("origin outside the domain throws", "[transport]") {
  auto g = square_grid(16);
  const VectorField U(g);
  CHECK_THROWS_AS(trace_characteristic(U, {-0.2, 0.5}), std::invalid_argument);
}

TEST_CASE("transport with zero source carries the inflow trace", "[transport]") {
  auto g = square_grid(25);
  const VectorField U(g);
  const ScalarField H(g);
  TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = inflow_trace(*g, [](double) { return 3.25; });
  auto [w, q] = solve_transport(prob);
  for (double v : w.v) CHECK(v == Catch::Approx(3.25).margin(1e-12));
  CHECK(q.untraceable == 0);
}

TEST_CASE("damped solve: w = 1 - exp(-x1) to 1e-6 at 64x64", "[transport]") {
  auto g = square_grid(65);
  const VectorField U(g);
  const auto H = ScalarField::sample(g, [](double, double) { return 1.0; });
  TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = inflow_trace(*g, [](double) { return 0.0; });
  prob.damped = true;
  auto [w, q] = solve_transport(prob);
  double linf = 0;
  for (int k = 0; k < g->n_nodes(); ++k)
    linf = std::max(linf, std::abs(w.v[k] - (1.0 - std::exp(-g->x1[k]))));
  CHECK(linf <= 1e-6);
  CHECK(q.untraceable == 0);
}

TEST_CASE("undamped solve converges at second order to the line-integral oracle",
          "[transport]") {
  // U = (0, 0.05), H = x1 x2 + x2^2, w_in = sin(2 pi x2)
  oracle::ExactTransport ex;
  ex.c0 = 0.05;
  ex.h = {{0.0, 0.0, 1.0}, {0.0, 1.0}};
  ex.w_in = [](double y) { return std::sin(2 * M_PI * y); };

  std::vector<double> errs;
  for (int n : {17, 33, 65}) {
    auto g = square_grid(n);
    const auto U = VectorField::sample(g, [](double, double) { return 0.0; },
                                       [](double, double) { return 0.05; });
    const auto H = ScalarField::sample(
        g, [](double x, double y) { return x * y + y * y; });
    TransportProblem prob;
    prob.U = &U;
    prob.H = &H;
    prob.w_in = inflow_trace(*g, [](double y) { return std::sin(2 * M_PI * y); });
    auto [w, q] = solve_transport(prob);
    double linf = 0;
    for (int k = 0; k < g->n_nodes(); ++k) {
      if (g->x2[k] < 0.1 || g->x2[k] > 0.9) continue;  // feet stay on Gamma_in
      linf = std::max(linf, std::abs(w.v[k] - ex({g->x1[k], g->x2[k]})));
    }
    errs.push_back(linf);
  }
  const double order1 = std::log2(errs[0] / errs[1]);
  const double order2 = std::log2(errs[1] / errs[2]);
  CHECK(order1 >= 1.9);
  CHECK(order2 >= 1.9);
}

TEST_CASE("discrete residual of the damped equation is O(h^2)", "[transport]") {
  std::vector<double> res;
  for (int n : {33, 65}) {
    auto g = square_grid(n);
    const VectorField U(g);
    const auto H = ScalarField::sample(
        g, [](double x, double y) { return std::sin(x) * std::cos(y); });
    TransportProblem prob;
    prob.U = &U;
    prob.H = &H;
    prob.w_in = inflow_trace(*g, [](double) { return 0.0; });
    prob.damped = true;
    auto [w, q] = solve_transport(prob);
    double linf = 0;
    for (int j = 2; j + 2 < g->ny; ++j)
      for (int i = 2; i + 2 < g->nx; ++i) {
        const double r = w.at(i, j) + apply_deriv(*g, w.v, i, j, PhysDeriv::X1) -
                         H.at(i, j);
        linf = std::max(linf, std::abs(r));
      }
    res.push_back(linf);
  }
  CHECK(std::log2(res[0] / res[1]) >= 1.7);
}

TEST_CASE("monotone dependence and damped maximum principle", "[transport]") {
  auto g = square_grid(33);
  const auto U = VectorField::sample(g, [](double, double) { return 0.05; },
                                     [](double, double) { return -0.03; });
  const auto H = ScalarField::sample(
      g, [](double x, double y) { return 0.5 + 0.5 * std::sin(3 * x + y); });
  TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = inflow_trace(*g, [](double y) { return y * (1 - y); });

  auto [w, q] = solve_transport(prob);
  for (double v : w.v) CHECK(v >= -1e-14);  // H >= 0 and w_in >= 0

  prob.damped = true;
  auto [wd, qd] = solve_transport(prob);
  const double bound = 1.0;  // max(||w_in||_inf, ||H||_inf)
  for (double v : wd.v) CHECK(std::abs(v) <= bound + 1e-12);
}

TEST_CASE("advecting field beyond the smallness bound is rejected", "[transport]") {
  auto g = square_grid(16);
  const auto U = VectorField::sample(g, [](double, double) { return 0.6; },
                                     [](double, double) { return 0.0; });
  const ScalarField H(g);
  TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = inflow_trace(*g, [](double) { return 0.0; });
  CHECK_THROWS_AS(solve_transport(prob), std::invalid_argument);
}

TEST_CASE("L2 transport bound is stable under refinement", "[transport]") {
  std::vector<double> consts;
  for (int n : {33, 65}) {
    auto g = square_grid(n);
    const VectorField U(g);
    const auto H = ScalarField::sample(
        g, [](double x, double y) { return std::cos(2 * x) * y; });
    TransportProblem prob;
    prob.U = &U;
    prob.H = &H;
    prob.w_in = inflow_trace(*g, [](double y) { return 0.1 * std::sin(2 * M_PI * y); });
    auto [w, q] = solve_transport(prob);
    consts.push_back(transport_l2_report(w, H, prob.w_in).constant);
  }
  CHECK(std::abs(consts[0] - consts[1]) / consts[1] < 0.05);
}

TEST_CASE("singularity conditions on the data", "[transport]") {
  auto g = make_grid(geometry::lens_domain(), 49, 49);
  const auto w_in_zero = inflow_trace(*g, [](double) { return 0.0; });

  SECTION("tangential field passes with zero sup") {
    const VectorField u(g);
    const auto r = check_sing_conditions(u, w_in_zero, 0.1);
    CHECK(r.pass);
    CHECK(r.sup_in == 0.0);
    CHECK(r.sup_out == 0.0);
  }

  SECTION("normal trace of order one fails the slope-weighted bound") {
    const auto u = VectorField::sample(g, [](double, double) { return 0.0; },
                                       [](double, double) { return 1.0; });
    const auto r = check_sing_conditions(u, w_in_zero, 0.1);
    CHECK_FALSE(r.pass);
    CHECK(r.sup_in > 0.1);
  }

  SECTION("nonzero inflow trace near a singularity point fails") {
    const auto w_in = inflow_trace(*g, [](double) { return 0.01; });
    const VectorField u(g);
    const auto r = check_sing_conditions(u, w_in, 1.0);
    CHECK_FALSE(r.w_in_zero);
    CHECK_FALSE(r.pass);
  }
}

TEST_CASE("transport estimate report", "[transport]") {
  SECTION("trivial data is flagged") {
    auto g = square_grid(16);
    const ScalarField w(g), H(g);
    TraceSamples w_in;
    w_in.param = {0.0, 1.0};
    w_in.arc = {0.0, 1.0};
    w_in.value = {0.0, 0.0};
    const auto r = transport_estimate_report(w, H, w_in, {0.5, 5.0, 0.0}, 1.0);
    CHECK(r.trivial);
    CHECK(r.admissible);
  }

  SECTION("s above the certificate exponent is inadmissible") {
    auto g = square_grid(16);
    const ScalarField w(g), H(g);
    TraceSamples w_in;
    w_in.param = {0.0, 1.0};
    w_in.arc = {0.0, 1.0};
    w_in.value = {0.0, 0.0};
    const auto r = transport_estimate_report(w, H, w_in, {0.75, 4.0, 0.0}, 0.5);
    CHECK_FALSE(r.admissible);
  }

  SECTION("measured constant on the lens is stable under one refinement") {
    std::vector<double> consts;
    for (int n : {33, 49}) {
      auto g = make_grid(geometry::lens_domain(), n, n);
      const VectorField u(g);
      const auto H = ScalarField::sample(g, [](double x, double y) {
        return 0.05 * std::cos(M_PI * x) * std::cos(M_PI * y);
      });
      TransportProblem prob;
      prob.U = &u;
      prob.H = &H;
      prob.w_in = inflow_trace(*g, [](double) { return 0.0; });
      prob.damped = true;
      auto [w, q] = solve_transport(prob);
      const auto r =
          transport_estimate_report(w, H, prob.w_in, {0.5, 5.0, 0.0}, 1.0);
      CHECK(r.admissible);
      consts.push_back(r.constant);
    }
    CHECK(std::abs(consts[0] - consts[1]) / consts[1] < 0.2);
  }
}
