#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include "inflow/grid.hpp"
#include "inflow/norms.hpp"
#include "inflow/oracle.hpp"

using namespace inflow;
using namespace inflow::fields;

namespace {

GridPtr square_grid(int n) { return make_grid(geometry::unit_square_domain(), n, n); }

/// Continuum value of the x1 seminorm on the unit square via the correlation
/// reduction: the 4D double integral collapses to a smooth 1D quadrature in
/// the polar angle with a closed-form radial part.
double exact_x1_seminorm(double s, double p) {
  const double a = p - 1.0 - s * p;
  auto f = [&](double th) {
    const double c = std::cos(th), sb = std::sin(th);
    const double R = 1.0 / std::max(c, sb);
    const double I = std::pow(R, a + 1) / (a + 1) -
                     (c + sb) * std::pow(R, a + 2) / (a + 2) +
                     c * sb * std::pow(R, a + 3) / (a + 3);
    return std::pow(c, p) * I;
  };
  const double I = 4.0 * (integrate(f, 0.0, M_PI / 4, 1e-14) +
                          integrate(f, M_PI / 4, M_PI / 2, 1e-14));
  return std::pow(I, 1.0 / p);
}

ScalarField random_trig_field(GridPtr g, std::mt19937& rng, double amp = 1.0) {
  std::uniform_real_distribution<double> a(-amp, amp);
  std::uniform_int_distribution<int> mode(1, 4);
  const double a1 = a(rng), a2 = a(rng), a3 = a(rng);
  const int k1 = mode(rng), k2 = mode(rng), k3 = mode(rng);
  return ScalarField::sample(g, [=](double x, double y) {
    return a1 * std::sin(M_PI * k1 * x) * std::cos(M_PI * k2 * y) +
           a2 * std::cos(M_PI * k3 * x) + a3 * x * y;
  });
}

}  // namespace

TEST_CASE("grid: boundary nodes sit on the graphs, areas sum to the area", "[fields]") {
  auto g = square_grid(17);
  for (int j = 0; j < g->ny; ++j) {
    CHECK(std::abs(g->x1[g->idx(0, j)] - 0.0) < 1e-10);
    CHECK(std::abs(g->x1[g->idx(g->nx - 1, j)] - 1.0) < 1e-10);
  }
  CHECK(g->total_area() == Catch::Approx(1.0).margin(1e-13));

  auto lens = make_grid(geometry::lens_domain(), 33, 33);
  for (int j = 0; j < lens->ny; ++j) {
    const double y = lens->x2[lens->idx(0, j)];
    CHECK(std::abs(lens->x1[lens->idx(0, j)] - lens->domain.x_lower(y)) < 1e-10);
  }
  // parabolic lens area: int 2 x2(1-x2) = 1/3
  CHECK(lens->total_area() == Catch::Approx(1.0 / 3.0).epsilon(2e-3));
  CHECK(lens->row_collapsed.front());
  CHECK(lens->row_collapsed.back());
}

TEST_CASE("lq_norm basics", "[fields]") {
  auto g = square_grid(65);
  const auto one = ScalarField::sample(g, [](double, double) { return 1.0; });
  CHECK(lq_norm(one, 2.0) == Catch::Approx(1.0).margin(1e-13));

  const auto fx = ScalarField::sample(g, [](double x, double) { return x; });
  const double exact = 1.0 / std::sqrt(3.0);
  CHECK(lq_norm(fx, 2.0) == Catch::Approx(exact).epsilon(5e-4));
  // trapezoid-order convergence toward the exact integral
  auto g2 = square_grid(33);
  const auto fx2 = ScalarField::sample(g2, [](double x, double) { return x; });
  CHECK(std::abs(lq_norm(fx2, 2.0) - exact) > std::abs(lq_norm(fx, 2.0) - exact));

  const auto fs = ScalarField::sample(g, [](double, double y) { return std::sin(M_PI * y); });
  CHECK(lq_norm(fs, std::numeric_limits<double>::infinity()) ==
        Catch::Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(lq_norm(one, 0.5), std::invalid_argument);
}

TEST_CASE("seminorm of a constant field is exactly zero", "[fields]") {
  auto g = square_grid(16);
  const auto c = ScalarField::sample(g, [](double, double) { return 3.7; });
  CHECK(slobodetskii_seminorm(c, {0.5, 2.0, 0.0}) == 0.0);
  CHECK(slobodetskii_seminorm(c, {0.3, 8.0, 1e-6}) == 0.0);
}

TEST_CASE("seminorm equals the brute-force double sum at equal discretization",
          "[fields]") {
  auto g = square_grid(8);
  std::mt19937 rng(2024);
  const auto f = random_trig_field(g, rng);
  for (const auto& [s, p] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {0.3, 8.0}}) {
    for (double eps : {0.0, 1e-6}) {
      const NormParams np{s, p, eps};
      const double a = slobodetskii_seminorm(f, np);
      const double b = oracle::naive_seminorm(f, np);
      CHECK(std::abs(a - b) <= 1e-12 * b);
    }
  }
}

TEST_CASE("seminorm is monotone in the kernel regularization", "[fields]") {
  auto g = square_grid(12);
  const auto f = ScalarField::sample(g, [](double x, double y) { return x + y * y; });
  const double v0 = slobodetskii_seminorm(f, {0.5, 2.0, 0.0});
  const double v1 = slobodetskii_seminorm(f, {0.5, 2.0, 1e-3});
  CHECK(v1 < v0);
}

TEST_CASE("eps-limit: seminorm increases to the eps = 0 value", "[fields]") {
  auto g = square_grid(16);
  const auto f = ScalarField::sample(g, [](double x, double y) {
    return std::sin(2 * M_PI * x) * std::cos(M_PI * y);
  });
  const NormParams base{0.5, 5.0, 0.0};
  const double v0 = slobodetskii_seminorm(f, base);
  double prev = 0.0;
  for (int k = 1; k <= 12; ++k) {
    NormParams np = base;
    np.epsilon = std::pow(10.0, -k);
    const double v = slobodetskii_seminorm(f, np);
    CHECK(v >= prev);
    CHECK(v <= v0 * (1.0 + 1e-15));
    prev = v;
  }
  CHECK((v0 - prev) / v0 < 1e-6);
}

TEST_CASE("seminorm converges to the continuum double integral", "[fields]") {
  const auto dom = geometry::unit_square_domain();
  const NormParams np{0.5, 2.0, 0.0};
  const double exact = exact_x1_seminorm(np.s, np.p);
  QuadOptions q;
  q.near_diag_subsample = true;
  double prev_err = std::numeric_limits<double>::max();
  for (int n : {16, 32, 64}) {
    auto g = make_grid(dom, n, n);
    const auto f = ScalarField::sample(g, [](double x, double) { return x; });
    const double err = std::abs(slobodetskii_seminorm(f, np, q) - exact) / exact;
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 0.02);
}

TEST_CASE("seminorm axioms: homogeneity and triangle inequality", "[fields]") {
  auto g = square_grid(10);
  std::mt19937 rng(555);
  const NormParams np{0.4, 3.0, 0.0};
  for (int m = 0; m < 20; ++m) {
    const auto f = random_trig_field(g, rng);
    const auto h = random_trig_field(g, rng);
    const double alpha = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    ScalarField af = f;
    for (auto& v : af.v) v *= alpha;
    const double nf = slobodetskii_seminorm(f, np);
    CHECK(slobodetskii_seminorm(af, np) ==
          Catch::Approx(std::abs(alpha) * nf).epsilon(1e-9));
    ScalarField sum = f;
    axpy(1.0, h, sum);
    const double nsum = slobodetskii_seminorm(sum, np);
    const double nh = slobodetskii_seminorm(h, np);
    CHECK(nsum <= (nf + nh) * (1.0 + 1e-9));
  }
}

TEST_CASE("kernel symmetry: pair order does not matter", "[fields]") {
  auto g = square_grid(9);
  std::mt19937 rng(31);
  const auto f = random_trig_field(g, rng);
  const NormParams np{0.5, 4.0, 0.0};
  const double a = oracle::naive_seminorm(f, np);
  const double b = oracle::naive_seminorm_swapped(f, np);
  CHECK(std::abs(a - b) <= 1e-13 * std::abs(a));
  CHECK(slobodetskii_seminorm(f, np) == Catch::Approx(a).epsilon(1e-12));
}

TEST_CASE("wsp_norm: full norm behavior", "[fields]") {
  auto g = square_grid(32);
  const auto one = ScalarField::sample(g, [](double, double) { return 1.0; });
  const NormParams np{0.5, 2.0, 0.0};
  CHECK(wsp_norm(one, np) == Catch::Approx(1.0).margin(1e-12));

  const auto fx = ScalarField::sample(g, [](double x, double) { return x; });
  const double expected = lq_norm(fx, np.p) + oracle::naive_seminorm(fx, np);
  CHECK(wsp_norm(fx, np) == Catch::Approx(expected).epsilon(1e-11));

  ScalarField f2 = fx;
  for (auto& v : f2.v) v *= 2.0;
  CHECK(wsp_norm(f2, np) == Catch::Approx(2.0 * wsp_norm(fx, np)).epsilon(1e-12));

  // norm, not seminorm: zero iff the field vanishes
  const auto zero = ScalarField(g);
  CHECK(wsp_norm(zero, np) == 0.0);
  CHECK(wsp_norm(one, np) > 0.0);
}

TEST_CASE("w1sp_norm on constant, linear and quadratic fields", "[fields]") {
  auto g = square_grid(24);
  const NormParams np{0.5, 2.0, 0.0};

  const auto c = VectorField::sample(g, [](double, double) { return 0.3; },
                                     [](double, double) { return -0.4; });
  CHECK(w1sp_norm(c, np) == Catch::Approx(lq_norm(c, np.p)).margin(1e-10));

  const auto lin = VectorField::sample(g, [](double x, double) { return x; },
                                       [](double, double) { return 0.0; });
  // gradient is the constant (1,0): seminorms of all derivatives vanish
  CHECK(w1sp_norm(lin, np) ==
        Catch::Approx(lq_norm(lin, np.p) + 1.0).epsilon(1e-9));

  const auto quad = VectorField::sample(g, [](double x, double y) { return x * x + y; },
                                        [](double x, double y) { return x * y; });
  double expected = lq_norm(quad, np.p);
  for (const auto* comp : {&quad.v1, &quad.v2})
    for (const PhysDeriv d : {PhysDeriv::X1, PhysDeriv::X2}) {
      ScalarField df(g);
      for (int j = 0; j < g->ny; ++j)
        for (int i = 0; i < g->nx; ++i) df.at(i, j) = apply_deriv(*g, *comp, i, j, d);
      expected += lq_norm(df, np.p) + oracle::naive_seminorm(df, np);
    }
  CHECK(w1sp_norm(quad, np) == Catch::Approx(expected).epsilon(1e-10));
}

TEST_CASE("trace seminorm: constant, linear, refinement", "[fields]") {
  auto make_trace = [](int n, auto fn) {
    TraceSamples t;
    for (int i = 0; i < n; ++i) {
      const double s = static_cast<double>(i) / (n - 1);
      t.param.push_back(s);
      t.arc.push_back(s);
      t.value.push_back(fn(s));
    }
    return t;
  };

  const auto c = make_trace(33, [](double) { return 2.0; });
  CHECK(trace_seminorm(c, 0.3, 2.0) == 0.0);

  const double p = 2.0, t_ord = 0.3;
  const auto lin = make_trace(65, [](double s) { return s; });
  const double impl = trace_seminorm(lin, t_ord, p);
  CHECK(impl == Catch::Approx(oracle::naive_trace_seminorm(lin, t_ord, p)).epsilon(1e-12));
  // continuum: (2 L^{p+1-tp} / ((p - tp)(p + 1 - tp)))^{1/p} with L = 1
  const double exact = std::pow(2.0 / ((p - t_ord * p) * (p + 1 - t_ord * p)), 1.0 / p);
  CHECK(impl == Catch::Approx(exact).epsilon(0.02));

  const auto smooth = make_trace(64, [](double s) { return std::sin(2 * M_PI * s); });
  const auto smooth2 = make_trace(128, [](double s) { return std::sin(2 * M_PI * s); });
  const double v1 = trace_seminorm(smooth, 0.4, 3.0);
  const double v2 = trace_seminorm(smooth2, 0.4, 3.0);
  CHECK(std::abs(v1 - v2) / v2 < 0.02);

  TraceSamples tiny;
  tiny.param = {0.0};
  tiny.arc = {0.0};
  tiny.value = {1.0};
  CHECK_THROWS_AS(trace_seminorm(tiny, 0.3, 2.0), std::invalid_argument);
}

namespace {

BoundaryData background_data(const Grid& g) {
  BoundaryData data;
  const auto& dom = g.domain;
  for (const auto& part : dom.parts()) {
    data.f.push_back(sample_part_trace(g, part, [](const BoundaryNode&) { return 1.0; }));
    data.d.push_back(
        sample_part_trace(g, part, [](const BoundaryNode& bn) { return bn.n.x1; }));
    data.b.push_back(
        sample_part_trace(g, part, [](const BoundaryNode& bn) { return bn.tau.x1; }));
  }
  data.rho_in = sample_part_trace(g, {geometry::PartRef::Kind::In, 0},
                                  [](const BoundaryNode&) { return 1.0; });
  return data;
}

}  // namespace

TEST_CASE("compute_d0: constant flow gives exactly zero", "[fields]") {
  auto g = square_grid(33);
  const auto data = background_data(*g);
  CHECK(compute_d0(data, g->domain, {0.5, 5.0, 0.0}) == 0.0);
}

TEST_CASE("compute_d0: density perturbation scales by its trace norm", "[fields]") {
  auto g = square_grid(33);
  auto data = background_data(*g);
  const double amp = 0.01;
  data.rho_in = sample_part_trace(*g, {geometry::PartRef::Kind::In, 0},
                                  [&](const BoundaryNode& bn) {
                                    return 1.0 + amp * std::sin(2 * M_PI * bn.param);
                                  });
  const NormParams np{0.5, 5.0, 0.0};
  const double d0 = compute_d0(data, g->domain, np);

  TraceSamples sin_trace = data.rho_in.samples;
  for (std::size_t i = 0; i < sin_trace.size(); ++i)
    sin_trace.value[i] = std::sin(2 * M_PI * sin_trace.param[i]);
  const double expected = amp * trace_w_norm(sin_trace, np.s, np.p);
  CHECK(d0 == Catch::Approx(expected).epsilon(1e-12));

  // doubling every perturbation doubles D_0
  auto data2 = data;
  for (std::size_t i = 0; i < data2.rho_in.samples.size(); ++i)
    data2.rho_in.samples.value[i] = 1.0 + 2.0 * (data.rho_in.samples.value[i] - 1.0);
  CHECK(compute_d0(data2, g->domain, np) == Catch::Approx(2.0 * d0).epsilon(1e-12));
}

TEST_CASE("compute_d0: missing trace is an error", "[fields]") {
  auto g = square_grid(16);
  auto data = background_data(*g);
  data.f.pop_back();
  CHECK_THROWS(compute_d0(data, g->domain, {0.5, 5.0, 0.0}));
}

TEST_CASE("imbedding check: constant field and random family", "[fields]") {
  auto g16 = square_grid(16);
  const auto one = ScalarField::sample(g16, [](double, double) { return 2.5; });
  const auto c = check_imbedding(one, {0.5, 5.0, 0.0}, 4.0);
  CHECK(c.ratio == Catch::Approx(1.0).margin(1e-10));  // |Omega| = 1
  CHECK(c.hypothesis_ok);

  const auto bad = check_imbedding(one, {0.5, 3.0, 0.0}, 4.0);
  CHECK_FALSE(bad.hypothesis_ok);  // sp = 1.5 < 2

  // max ratio over a random smooth family is stable under refinement
  const double q = std::numeric_limits<double>::infinity();
  double max16 = 0, max32 = 0;
  auto g32 = square_grid(32);
  std::mt19937 rng(99);
  for (int m = 0; m < 50; ++m) {
    std::mt19937 rng_copy = rng;
    const auto f16 = random_trig_field(g16, rng);
    const auto f32 = random_trig_field(g32, rng_copy);
    max16 = std::max(max16, check_imbedding(f16, {0.5, 5.0, 0.0}, q).ratio);
    max32 = std::max(max32, check_imbedding(f32, {0.5, 5.0, 0.0}, q).ratio);
  }
  CHECK(std::abs(max16 - max32) / max32 < 0.10);
}

TEST_CASE("interpolation inequality with a calibrated constant", "[fields]") {
  auto g = square_grid(16);
  std::mt19937 rng(7);
  const NormParams np{0.5, 5.0, 0.0};
  const double q = std::numeric_limits<double>::infinity();
  const double delta = 0.05;
  std::vector<ScalarField> family;
  for (int m = 0; m < 30; ++m) family.push_back(random_trig_field(g, rng));

  double c_delta = 0.0;
  for (const auto& f : family) {
    const double lq = lq_norm(f, q), wsp = wsp_norm(f, np), l2 = lq_norm(f, 2.0);
    if (l2 > 0) c_delta = std::max(c_delta, (lq - delta * wsp) / l2);
  }
  for (const auto& f : family)
    CHECK(check_interpolation(f, np, q, delta, c_delta).residual <= 1e-12);

  // a fresh field stays below with doubled headroom
  const auto fresh = random_trig_field(g, rng);
  CHECK(check_interpolation(fresh, np, q, delta, 2.0 * c_delta).residual <= 0.0);
}

TEST_CASE("field dump and load round-trip", "[fields]") {
  auto g = square_grid(9);
  std::mt19937 rng(3);
  const auto f = random_trig_field(g, rng);
  std::stringstream ss;
  dump_field(ss, f, "w");
  const auto back = load_scalar_field(ss, g);
  for (int k = 0; k < g->n_nodes(); ++k) CHECK(back.v[k] == f.v[k]);
}
