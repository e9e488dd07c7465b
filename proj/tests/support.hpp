#pragma once

// Shared helpers for the unit and acceptance suites: canonical grids,
// inflow traces, manufactured boundary data, and the coupled linear solve
// (transport + momentum sub-iteration) used by the energy-estimate checks.

#include <cmath>
#include <random>

#include "inflow/momentum.hpp"
#include "inflow/oracle.hpp"
#include "inflow/transport.hpp"

namespace testsup {

using namespace inflow;
using namespace inflow::fields;

inline GridPtr square_grid(int n) {
  return make_grid(geometry::unit_square_domain(), n, n);
}

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

/// Momentum boundary data of a manufactured case with friction f = 1.
inline momentum::MomentumBC mms_bc(const Grid& g, const oracle::ManufacturedCase& c,
                                   const momentum::FluidParams& fp) {
  momentum::MomentumBC bc(g.n_nodes());
  for (auto& v : bc.f) v = 1.0;
  for (const auto& bn : boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    bc.B[bn.k] = c.boundary_stress({fp.mu, fp.nu, fp.gamma}, {g.x1[bn.k], g.x2[bn.k]},
                                   bn.n, bn.tau, 1.0);
  }
  return bc;
}

inline VectorField mms_velocity(GridPtr g, const oracle::ManufacturedCase& c) {
  return VectorField::sample(
      g, [&](double x, double y) { return c.u1.v(x, y); },
      [&](double x, double y) { return c.u2.v(x, y); });
}

inline ScalarField mms_density(GridPtr g, const oracle::ManufacturedCase& c) {
  return ScalarField::sample(g, [&](double x, double y) { return c.w.v(x, y); });
}

inline VectorField mms_momentum_source(GridPtr g, const oracle::ManufacturedCase& c,
                                       const momentum::FluidParams& fp) {
  return VectorField::sample(
      g,
      [&](double x, double y) {
        return c.momentum_source({fp.mu, fp.nu, fp.gamma}, {x, y}).x1;
      },
      [&](double x, double y) {
        return c.momentum_source({fp.mu, fp.nu, fp.gamma}, {x, y}).x2;
      });
}

/// One random small-data scenario for the linearized system, defined by
/// continuum expressions so the same data can be sampled on several grids.
struct LinearScenario {
  double a1, a2, a3, a4, a5;
  int k1, k2;

  static LinearScenario draw(std::mt19937& rng, double amp) {
    std::uniform_real_distribution<double> a(-amp, amp);
    std::uniform_int_distribution<int> mode(1, 3);
    return {a(rng), a(rng), a(rng), a(rng), a(rng), mode(rng), mode(rng)};
  }

  VectorField F(GridPtr g) const {
    return VectorField::sample(
        g,
        [this](double x, double y) {
          return a1 * std::sin(M_PI * k1 * x) * std::cos(M_PI * k2 * y);
        },
        [this](double x, double y) {
          return a2 * std::cos(M_PI * k1 * x) * std::sin(M_PI * k2 * y);
        });
  }
  ScalarField G(GridPtr g) const {
    return ScalarField::sample(g, [this](double x, double y) {
      return a3 * std::cos(M_PI * k2 * x) * std::cos(M_PI * k1 * y);
    });
  }
  TraceSamples w_in(const Grid& g) const {
    return inflow_trace(g, [this](double y) { return a4 * std::sin(2 * M_PI * y); });
  }
  momentum::MomentumBC bc(const Grid& g) const {
    momentum::MomentumBC out(g.n_nodes());
    for (auto& v : out.f) v = 1.0;
    for (const auto& bn : boundary_nodes(g)) {
      if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
      out.B[bn.k] = a5 * std::sin(M_PI * k1 * bn.arc) * bn.tau.x1;
    }
    return out;
  }
};

struct CoupledSolution {
  VectorField u;
  ScalarField w;
  int sweeps = 0;
  double last_step = 0;
  bool converged = false;
};

/// Solves the coupled linearized system (U = 0 data) by alternating the
/// characteristic transport solve and the momentum solve until the update
/// stalls. The momentum factorization is reused across sweeps.
inline CoupledSolution solve_linear_coupled(const momentum::MomentumSolver& solver,
                                            const VectorField& F, const ScalarField& G,
                                            const momentum::MomentumBC& bc,
                                            const TraceSamples& w_in,
                                            double tol = 1e-11, int max_sweeps = 40) {
  GridPtr g = F.grid;
  CoupledSolution out{VectorField(g), ScalarField(g), 0, 0.0, false};
  VectorField U0(g);
  transport::TransportProblem prob;
  prob.U = &U0;
  prob.w_in = w_in;
  for (; out.sweeps < max_sweeps; ++out.sweeps) {
    ScalarField H = G;
    const ScalarField divu = divergence(out.u);
    axpy(-1.0, divu, H);
    prob.H = &H;
    auto [w_new, q] = transport::solve_transport(prob);
    const Eigen::VectorXd rhs = momentum::momentum_rhs(solver.system(), w_new, F, bc);
    VectorField u_new = solver.solve(rhs, bc);
    VectorField du = u_new;
    axpy(-1.0, out.u, du);
    ScalarField dw = w_new;
    axpy(-1.0, out.w, dw);
    out.last_step = w12_norm(du) + lq_norm(dw, 2.0);
    out.u = std::move(u_new);
    out.w = std::move(w_new);
    if (out.last_step < tol) {
      out.converged = true;
      ++out.sweeps;
      break;
    }
  }
  return out;
}

/// Least-squares slope of log(err) against log(h) over a refinement ladder
/// with uniform ratio; with two errors this is the usual log2 ratio.
inline double convergence_order(const std::vector<double>& errs) {
  const std::size_t n = errs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = -static_cast<double>(i) * std::log(2.0);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsup
