#pragma once

// Nonlinear driver. Builds the extension field u0 (vector Laplace lifting of
// the normal-velocity excess) and the density lifting w0 (characteristics
// extension of the inflow density excess), forms the right-hand sides F, G, B
// from the current iterate, and alternates transport and momentum solves of
// the linearized system until the step difference stalls below tolerance.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/grid.hpp"
#include "inflow/momentum.hpp"
#include "inflow/norms.hpp"
#include "inflow/report.hpp"
#include "inflow/transport.hpp"

namespace inflow::picard {

using fields::BoundaryData;
using fields::Grid;
using fields::GridPtr;
using fields::NodeKind;
using fields::NormParams;
using fields::PartTrace;
using fields::PhysDeriv;
using fields::ScalarField;
using fields::TraceSamples;
using fields::VectorField;
using momentum::FluidParams;
using momentum::MomentumBC;

struct PositivityError : std::runtime_error {
  explicit PositivityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Barotropic pressure pi(rho) = rho^kappa; pi'(1) = kappa.
struct PressureLaw {
  double kappa = 1.0;
  double gamma() const { return kappa; }
  double dpi(double rho) const {
    if (rho <= 0.0) throw PositivityError("density lost positivity in the pressure law");
    return kappa * std::pow(rho, kappa - 1.0);
  }
};

// ---------------------------------------------------------------------------
// Extension fields
// ---------------------------------------------------------------------------

namespace detail {

inline void node_array_from_traces(const Grid& g, const std::vector<PartTrace>& traces,
                                   std::vector<double>& out, const char* what) {
  out.assign(g.n_nodes(), 0.0);
  for (const auto& part : g.domain.parts()) {
    const auto& tr = fields::find_part(traces, part, what);
    const auto nodes = fields::part_nodes(g, part);
    if (tr.samples.size() != nodes.size())
      throw std::runtime_error(std::string("trace '") + what +
                               "' is not aligned with the grid boundary nodes");
    for (std::size_t m = 0; m < nodes.size(); ++m) out[nodes[m].k] = tr.samples.value[m];
  }
}

}  // namespace detail

/// Discrete vector Laplace lifting: u0 . n = trace, u0 . tau = 0 on Gamma.
inline VectorField build_extension_u0(GridPtr grid,
                                      const std::vector<PartTrace>& d_minus_n1) {
  const Grid& g = *grid;
  std::vector<double> trace;
  detail::node_array_from_traces(g, d_minus_n1, trace, "d - n1");

  using Trip = Eigen::Triplet<double>;
  const int n = g.n_nodes();
  std::vector<Trip> trips;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      switch (g.kind[k]) {
        case NodeKind::Interior:
          for (int c = 0; c < 2; ++c) {
            const int row = 2 * k + c;
            for (const PhysDeriv d : {PhysDeriv::X1X1, PhysDeriv::X2X2})
              fields::emit_deriv(g, i, j, d, -1.0,
                                 [&](int kk, double w) { trips.emplace_back(row, 2 * kk + c, w); });
          }
          break;
        case NodeKind::Corner:
        case NodeKind::Collapsed:
          trips.emplace_back(2 * k, 2 * k, 1.0);
          trips.emplace_back(2 * k + 1, 2 * k + 1, 1.0);
          break;
        default:
          break;
      }
    }
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    trips.emplace_back(2 * bn.k, 2 * bn.k, bn.n.x1);
    trips.emplace_back(2 * bn.k, 2 * bn.k + 1, bn.n.x2);
    trips.emplace_back(2 * bn.k + 1, 2 * bn.k, bn.tau.x1);
    trips.emplace_back(2 * bn.k + 1, 2 * bn.k + 1, bn.tau.x2);
    rhs[2 * bn.k] = trace[bn.k];
  }
  Eigen::SparseMatrix<double> A(2 * n, 2 * n);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw momentum::SolveError("extension-field factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  if (((A * x - rhs).norm()) > 1e-9 * std::max(1.0, rhs.norm()))
    throw momentum::SolveError("extension-field solve did not converge");

  VectorField u0(grid);
  for (int k = 0; k < n; ++k) {
    u0.v1[k] = x[2 * k];
    u0.v2[k] = x[2 * k + 1];
  }
  // Land the boundary values exactly on the prescribed trace.
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    u0.v1[bn.k] = trace[bn.k] * bn.n.x1;
    u0.v2[bn.k] = trace[bn.k] * bn.n.x2;
  }
  return u0;
}

/// Measured constant of ||u0||_{W^{1+s}_p} <= C ||d - n1||_{W^{1+s-1/p}_p(Gamma)}.
inline EstimateReport extension_bound_report(const VectorField& u0,
                                             const std::vector<PartTrace>& d_minus_n1,
                                             const NormParams& params) {
  double trace_norm = 0.0;
  for (const auto& t : d_minus_n1)
    trace_norm += fields::trace_w1_norm(t.samples, params.s - 1.0 / params.p, params.p);
  return EstimateReport::make("extension_bound", fields::w1sp_norm(u0, params), trace_norm);
}

/// w0: characteristics-constant extension of the inflow density excess
/// (zero-source transport advected by u0).
inline ScalarField build_w0(GridPtr grid, const VectorField& u0, const TraceSamples& w_in,
                            const transport::TraceOptions& topts = {}) {
  ScalarField zero(grid);
  transport::TransportProblem prob;
  prob.U = &u0;
  prob.H = &zero;
  prob.w_in = w_in;
  prob.damped = false;
  return transport::solve_transport(prob, topts).first;
}

// ---------------------------------------------------------------------------
// Right-hand sides of the perturbation system
// ---------------------------------------------------------------------------

struct RhsFields {
  VectorField F;
  ScalarField G;
};

/// Evaluates F(u,w) and G(u,w):
///   F = -w (u + e1 + u0) . grad(u + u0) - u0 . grad u - u . grad u0
///       + mu Lap u0 + (nu+mu) grad div u0 - u0 . grad u0
///       - [pi'(w + w0 + 1) - pi'(1)] grad w,
///   G = -(w + 1) div u0 - w div u.
inline RhsFields compute_rhs(const VectorField& u, const ScalarField& w,
                             const VectorField& u0, const ScalarField& w0,
                             const FluidParams& fluid, const PressureLaw& pressure) {
  const Grid& g = *u.grid;
  RhsFields out{VectorField(u.grid), ScalarField(w.grid)};
  const double gamma1 = pressure.dpi(1.0);

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] == NodeKind::Collapsed) continue;

      const double rho = w.v[k] + w0.v[k] + 1.0;
      if (rho <= 0.0)
        throw PositivityError("density w + w0 + 1 lost positivity at a grid node");

      const double du1x = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1);
      const double du1y = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X2);
      const double du2x = fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X1);
      const double du2y = fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
      const double d01x = fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X1);
      const double d01y = fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X2);
      const double d02x = fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X1);
      const double d02y = fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X2);
      const double wx = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X1);
      const double wy = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X2);

      // advection of u + u0 by the full velocity u + e1 + u0, weighted by -w
      const double a1 = u.v1[k] + 1.0 + u0.v1[k];
      const double a2 = u.v2[k] + u0.v2[k];
      const double adv1 = a1 * (du1x + d01x) + a2 * (du1y + d01y);
      const double adv2 = a1 * (du2x + d02x) + a2 * (du2y + d02y);

      double F1 = -w.v[k] * adv1;
      double F2 = -w.v[k] * adv2;
      // - u0 . grad u - u . grad u0 - u0 . grad u0
      F1 += -(u0.v1[k] * du1x + u0.v2[k] * du1y) - (u.v1[k] * d01x + u.v2[k] * d01y) -
            (u0.v1[k] * d01x + u0.v2[k] * d01y);
      F2 += -(u0.v1[k] * du2x + u0.v2[k] * du2y) - (u.v1[k] * d02x + u.v2[k] * d02y) -
            (u0.v1[k] * d02x + u0.v2[k] * d02y);

      if (g.kind[k] == NodeKind::Interior) {
        const double lap01 = fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X1X1) +
                             fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X2X2);
        const double lap02 = fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X1X1) +
                             fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X2X2);
        const double gdiv01 = fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X1X1) +
                              fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X1X2);
        const double gdiv02 = fields::apply_deriv(g, u0.v1, i, j, PhysDeriv::X1X2) +
                              fields::apply_deriv(g, u0.v2, i, j, PhysDeriv::X2X2);
        F1 += fluid.mu * lap01 + (fluid.nu + fluid.mu) * gdiv01;
        F2 += fluid.mu * lap02 + (fluid.nu + fluid.mu) * gdiv02;
      }

      const double dpi = pressure.dpi(rho) - gamma1;
      F1 -= dpi * wx;
      F2 -= dpi * wy;

      out.F.v1[k] = F1;
      out.F.v2[k] = F2;
      out.G.v[k] = -(w.v[k] + 1.0) * (d01x + d02y) - w.v[k] * (du1x + du2y);
    }
  return out;
}

/// Boundary data for the momentum block: B = b - 2 mu n . D(u0) . tau - f tau1.
inline MomentumBC build_momentum_bc(GridPtr grid, const BoundaryData& data,
                                    const VectorField& u0, const FluidParams& fluid) {
  const Grid& g = *grid;
  MomentumBC bc(g.n_nodes());
  detail::node_array_from_traces(g, data.f, bc.f, "f");
  std::vector<double> bval;
  detail::node_array_from_traces(g, data.b, bval, "b");
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    const double d11 = fields::apply_deriv(g, u0.v1, bn.i, bn.j, PhysDeriv::X1);
    const double d22 = fields::apply_deriv(g, u0.v2, bn.i, bn.j, PhysDeriv::X2);
    const double d12 = 0.5 * (fields::apply_deriv(g, u0.v1, bn.i, bn.j, PhysDeriv::X2) +
                              fields::apply_deriv(g, u0.v2, bn.i, bn.j, PhysDeriv::X1));
    const double stress =
        2.0 * fluid.mu *
        (bn.n.x1 * (d11 * bn.tau.x1 + d12 * bn.tau.x2) +
         bn.n.x2 * (d12 * bn.tau.x1 + d22 * bn.tau.x2));
    bc.B[bn.k] = bval[bn.k] - stress - bc.f[bn.k] * bn.tau.x1;
  }
  return bc;
}

// ---------------------------------------------------------------------------
// Nonlinear residuals
// ---------------------------------------------------------------------------

struct ResidualReport {
  // momentum equation through the discrete operator
  double momentum_l2 = 0, momentum_linf = 0;
  // continuity residual with discrete derivatives
  double continuity_fd_l2 = 0, continuity_fd_linf = 0;
  // continuity residual against a transport re-solve (solver-consistent)
  double continuity_char_l2 = 0, continuity_char_linf = 0;
  double bc_normal_linf = 0, bc_tangential_linf = 0, inflow_trace_linf = 0;

  double solver_consistent_max() const {
    return std::max({momentum_linf, continuity_char_linf, bc_normal_linf,
                     bc_tangential_linf, inflow_trace_linf});
  }
};

inline ResidualReport nonlinear_residual(const VectorField& u, const ScalarField& w,
                                         const VectorField& u0, const ScalarField& w0,
                                         const MomentumBC& bc, const TraceSamples& w_in,
                                         const FluidParams& fluid,
                                         const PressureLaw& pressure,
                                         const transport::TraceOptions& topts = {}) {
  const Grid& g = *u.grid;
  ResidualReport r;
  const RhsFields rhs = compute_rhs(u, w, u0, w0, fluid, pressure);
  const VectorField Lu = momentum::apply_momentum_operator(g, fluid, u);

  long double mom2 = 0.0L, fd2 = 0.0L;
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] != NodeKind::Interior) continue;
      const double wx = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X1);
      const double wy = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X2);
      const double m1 = Lu.v1[k] + fluid.gamma * wx - rhs.F.v1[k];
      const double m2 = Lu.v2[k] + fluid.gamma * wy - rhs.F.v2[k];
      mom2 += (m1 * m1 + m2 * m2) * g.area[k];
      r.momentum_linf = std::max({r.momentum_linf, std::abs(m1), std::abs(m2)});

      const double divu = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1) +
                          fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
      const double c = divu + wx + (u.v1[k] + u0.v1[k]) * wx + (u.v2[k] + u0.v2[k]) * wy -
                       rhs.G.v[k];
      fd2 += c * c * g.area[k];
      r.continuity_fd_linf = std::max(r.continuity_fd_linf, std::abs(c));
    }
  r.momentum_l2 = std::sqrt(static_cast<double>(mom2));
  r.continuity_fd_l2 = std::sqrt(static_cast<double>(fd2));

  // Transport re-solve with the current iterate's data.
  VectorField U = u;
  axpy(1.0, u0, U);
  ScalarField H = rhs.G;
  const ScalarField divu = fields::divergence(u);
  axpy(-1.0, divu, H);
  transport::TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = w_in;
  prob.damped = false;
  const auto [w_re, quality] = transport::solve_transport(prob, topts);
  (void)quality;
  long double ch2 = 0.0L;
  for (int k = 0; k < g.n_nodes(); ++k) {
    if (g.kind[k] == NodeKind::Collapsed) continue;
    const double c = w.v[k] - w_re.v[k];
    ch2 += c * c * g.area[k];
    r.continuity_char_linf = std::max(r.continuity_char_linf, std::abs(c));
  }
  r.continuity_char_l2 = std::sqrt(static_cast<double>(ch2));

  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    const double un = u.v1[bn.k] * bn.n.x1 + u.v2[bn.k] * bn.n.x2;
    r.bc_normal_linf = std::max(r.bc_normal_linf, std::abs(un - bc.g[bn.k]));
    const double d11 = fields::apply_deriv(g, u.v1, bn.i, bn.j, PhysDeriv::X1);
    const double d22 = fields::apply_deriv(g, u.v2, bn.i, bn.j, PhysDeriv::X2);
    const double d12 = 0.5 * (fields::apply_deriv(g, u.v1, bn.i, bn.j, PhysDeriv::X2) +
                              fields::apply_deriv(g, u.v2, bn.i, bn.j, PhysDeriv::X1));
    const double stress =
        2.0 * fluid.mu *
        (bn.n.x1 * (d11 * bn.tau.x1 + d12 * bn.tau.x2) +
         bn.n.x2 * (d12 * bn.tau.x1 + d22 * bn.tau.x2));
    const double ut = u.v1[bn.k] * bn.tau.x1 + u.v2[bn.k] * bn.tau.x2;
    r.bc_tangential_linf =
        std::max(r.bc_tangential_linf, std::abs(stress + bc.f[bn.k] * ut - bc.B[bn.k]));
    if (bn.part.kind == geometry::PartRef::Kind::In)
      r.inflow_trace_linf =
          std::max(r.inflow_trace_linf, std::abs(w.v[bn.k] - w_in.interp_param(bn.param)));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Picard iteration
// ---------------------------------------------------------------------------

enum class PicardStatus { Converged, MaxIter, Diverged, Rejected, PositivityLost };

inline const char* to_string(PicardStatus s) {
  switch (s) {
    case PicardStatus::Converged: return "converged";
    case PicardStatus::MaxIter: return "max_iterations";
    case PicardStatus::Diverged: return "diverged";
    case PicardStatus::Rejected: return "rejected";
    case PicardStatus::PositivityLost: return "positivity_lost";
  }
  return "unknown";
}

struct PicardConfig {
  GridPtr grid;
  BoundaryData data;
  FluidParams fluid;
  PressureLaw pressure;
  NormParams norms;
  double tol = 1e-9;
  int max_iter = 25;
  double theta = 1.0;      // underrelaxation
  double d0_max = 0.05;
  int norm_every = 3;      // fractional norms every k-th iteration
  transport::TraceOptions trace_opts;
};

struct IterationRecord {
  int k = 0;
  double step_diff = 0;
  double q = 0;            // contraction factor
  double u_w12 = 0, w_l2 = 0;
  double u_w1sp = -1, w_wsp = -1;  // < 0: not evaluated this iteration
};

struct IterationReport {
  std::vector<IterationRecord> iterations;
  PicardStatus status = PicardStatus::MaxIter;
  double d0 = 0;
  double est_main_lhs = 0;    // ||v - e1||_{W^{1+s}_p} + ||rho - 1||_{W^s_p}
  double est_main_ratio = 0;  // lhs / D_0
  double min_density = 1.0;
  ResidualReport residual;
  transport::TransportQuality transport_quality;
  momentum::FrictionCheck friction;
};

struct PicardResult {
  VectorField u;
  ScalarField w;
  VectorField u0;
  ScalarField w0;
  IterationReport report;
};

/// Shared per-scenario state: factorized momentum operator, liftings, data.
struct PicardWorkspace {
  GridPtr grid;
  FluidParams fluid;
  PressureLaw pressure;
  MomentumBC bc;
  TraceSamples w_in;
  VectorField u0;
  ScalarField w0;
  std::shared_ptr<momentum::MomentumSolver> solver;
  transport::TraceOptions trace_opts;

  static PicardWorkspace build(const PicardConfig& cfg) {
    PicardWorkspace ws;
    ws.grid = cfg.grid;
    ws.fluid = cfg.fluid;
    ws.fluid.gamma = cfg.pressure.gamma();
    ws.pressure = cfg.pressure;
    ws.trace_opts = cfg.trace_opts;
    std::vector<PartTrace> d_excess;
    for (const auto& part : cfg.grid->domain.parts()) {
      const auto& td = fields::find_part(cfg.data.d, part, "d");
      PartTrace t = td;
      for (std::size_t m = 0; m < t.samples.size(); ++m)
        t.samples.value[m] -=
            fields::detail::normal1_at(cfg.grid->domain, part, t.samples.param[m]);
      d_excess.push_back(std::move(t));
    }
    ws.u0 = build_extension_u0(cfg.grid, d_excess);
    ws.w_in = cfg.data.w_in();
    ws.w0 = build_w0(cfg.grid, ws.u0, ws.w_in, cfg.trace_opts);
    ws.bc = build_momentum_bc(cfg.grid, cfg.data, ws.u0, ws.fluid);
    ws.solver = std::make_shared<momentum::MomentumSolver>(
        momentum::assemble_operator(cfg.grid, ws.fluid, ws.bc.f));
    return ws;
  }
};

struct SweepOutput {
  VectorField u;
  ScalarField w;
  transport::TransportQuality quality;
};

/// One Picard sweep: freeze F, G at (u, w), advance the density along the
/// characteristics of U = u + u0, then solve the momentum block.
inline SweepOutput picard_sweep(const PicardWorkspace& ws, const VectorField& u,
                                const ScalarField& w) {
  const RhsFields rhs = compute_rhs(u, w, ws.u0, ws.w0, ws.fluid, ws.pressure);
  VectorField U = u;
  axpy(1.0, ws.u0, U);
  ScalarField H = rhs.G;
  const ScalarField divu = fields::divergence(u);
  axpy(-1.0, divu, H);
  transport::TransportProblem prob;
  prob.U = &U;
  prob.H = &H;
  prob.w_in = ws.w_in;
  prob.damped = false;
  auto [w_new, quality] = transport::solve_transport(prob, ws.trace_opts);
  const Eigen::VectorXd mrhs = momentum::momentum_rhs(ws.solver->system(), w_new, rhs.F, ws.bc);
  VectorField u_new = ws.solver->solve(mrhs, ws.bc);
  return {std::move(u_new), std::move(w_new), quality};
}

inline PicardResult picard_solve(const PicardConfig& cfg,
                                 const VectorField* u_init = nullptr,
                                 const ScalarField* w_init = nullptr) {
  cfg.norms.validate();
  cfg.fluid.validate();
  const Grid& g = *cfg.grid;

  PicardResult res{VectorField(cfg.grid), ScalarField(cfg.grid), VectorField(cfg.grid),
                   ScalarField(cfg.grid), {}};
  IterationReport& rep = res.report;
  rep.d0 = fields::compute_d0(cfg.data, g.domain, cfg.norms);
  if (rep.d0 > cfg.d0_max) {
    rep.status = PicardStatus::Rejected;
    return res;
  }

  PicardWorkspace ws = PicardWorkspace::build(cfg);
  res.u0 = ws.u0;
  res.w0 = ws.w0;
  rep.friction = momentum::validate_friction(g, ws.bc.f);

  VectorField u = u_init ? *u_init : VectorField(cfg.grid);
  ScalarField w = w_init ? *w_init : ScalarField(cfg.grid);
  double prev_step = -1.0;
  int rising = 0;

  for (int k = 0; k < cfg.max_iter; ++k) {
    SweepOutput sw;
    try {
      sw = picard_sweep(ws, u, w);
    } catch (const PositivityError&) {
      rep.status = PicardStatus::PositivityLost;
      break;
    }
    VectorField u_next = u;
    ScalarField w_next = w;
    // theta-relaxed update
    for (int kk = 0; kk < g.n_nodes(); ++kk) {
      u_next.v1[kk] += cfg.theta * (sw.u.v1[kk] - u.v1[kk]);
      u_next.v2[kk] += cfg.theta * (sw.u.v2[kk] - u.v2[kk]);
      w_next.v[kk] += cfg.theta * (sw.w.v[kk] - w.v[kk]);
    }

    VectorField du = u_next;
    axpy(-1.0, u, du);
    ScalarField dw = w_next;
    axpy(-1.0, w, dw);
    const double step = fields::w12_norm(du) + fields::lq_norm(dw, 2.0);

    IterationRecord rec;
    rec.k = k;
    rec.step_diff = step;
    rec.q = (prev_step > 0) ? step / prev_step : 0.0;
    rec.u_w12 = fields::w12_norm(u_next);
    rec.w_l2 = fields::lq_norm(w_next, 2.0);
    if (cfg.norm_every > 0 && (k % cfg.norm_every == 0)) {
      rec.u_w1sp = fields::w1sp_norm(u_next, cfg.norms);
      rec.w_wsp = fields::wsp_norm(w_next, cfg.norms);
    }
    rep.iterations.push_back(rec);
    rep.transport_quality = sw.quality;

    double min_rho = std::numeric_limits<double>::max();
    for (int kk = 0; kk < g.n_nodes(); ++kk)
      min_rho = std::min(min_rho, 1.0 + w_next.v[kk] + ws.w0.v[kk]);
    rep.min_density = min_rho;
    if (min_rho <= 0.5) {
      rep.status = PicardStatus::PositivityLost;
      u = std::move(u_next);
      w = std::move(w_next);
      break;
    }

    u = std::move(u_next);
    w = std::move(w_next);

    if (step < cfg.tol) {
      rep.status = PicardStatus::Converged;
      break;
    }
    if (prev_step > 0 && step >= prev_step) {
      if (++rising >= 3) {
        rep.status = PicardStatus::Diverged;
        break;
      }
    } else {
      rising = 0;
    }
    prev_step = step;
  }

  res.u = u;
  res.w = w;
  if (rep.status != PicardStatus::Rejected) {
    VectorField v_pert = u;
    axpy(1.0, ws.u0, v_pert);
    ScalarField rho_pert = w;
    axpy(1.0, ws.w0, rho_pert);
    rep.est_main_lhs =
        fields::w1sp_norm(v_pert, cfg.norms) + fields::wsp_norm(rho_pert, cfg.norms);
    rep.est_main_ratio = rep.d0 > 0 ? rep.est_main_lhs / rep.d0 : 0.0;
    if (rep.status != PicardStatus::PositivityLost)
      rep.residual = nonlinear_residual(u, w, ws.u0, ws.w0, ws.bc, ws.w_in, ws.fluid,
                                        cfg.pressure, cfg.trace_opts);
  }
  return res;
}

}  // namespace inflow::picard
