#pragma once

// Linear momentum block of the linearized system:
//   d_x1 u - mu Lap u - (nu+mu) grad div u + gamma grad w = F   in Omega,
//   n . 2 mu D(u) . tau + f u . tau = B,  u . n = 0              on Gamma.
// Second-order finite differences in the grid's curvilinear metric; the
// pressure term gamma grad w goes to the right-hand side. Sparse direct
// factorization for moderate grids, ILUT-preconditioned BiCGSTAB beyond.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "inflow/boundary.hpp"
#include "inflow/grid.hpp"
#include "inflow/norms.hpp"
#include "inflow/report.hpp"

namespace inflow::momentum {

using fields::BoundaryNode;
using fields::Grid;
using fields::GridPtr;
using fields::NodeKind;
using fields::PhysDeriv;
using fields::ScalarField;
using fields::VectorField;

struct FluidParams {
  double mu = 1.0;        // shear viscosity
  double nu = 1.0;        // bulk-type viscosity
  double gamma = 1.0;     // pressure linearization pi'(1)

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("mu must be positive");
    if (!(nu >= 0.0)) throw std::invalid_argument("nu must be nonnegative");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  }
};

/// Per-node boundary data; only boundary-node entries are read.
struct MomentumBC {
  std::vector<double> f;  // friction trace
  std::vector<double> B;  // tangential stress data
  std::vector<double> g;  // normal velocity (0 for the perturbation problem)

  MomentumBC() = default;
  explicit MomentumBC(int n_nodes)
      : f(n_nodes, 0.0), B(n_nodes, 0.0), g(n_nodes, 0.0) {}
};

struct FrictionCheck {
  bool nonneg_on_outflow = true;
  bool sign_ok_on_inflow = true;       // f >= n1/2 (n1 < 0 there)
  double min_boundary_form = 0.0;      // min of f + n1/2 over boundary nodes
};

inline FrictionCheck validate_friction(const Grid& g, const std::vector<double>& fric) {
  FrictionCheck c;
  c.min_boundary_form = std::numeric_limits<double>::max();
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    const double f = fric[bn.k];
    if (bn.part.kind == geometry::PartRef::Kind::Out && f < 0) c.nonneg_on_outflow = false;
    if (bn.part.kind == geometry::PartRef::Kind::In && f < 0.5 * bn.n.x1)
      c.sign_ok_on_inflow = false;
    c.min_boundary_form = std::min(c.min_boundary_form, f + 0.5 * bn.n.x1);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

enum class RowKind : std::uint8_t { Interior, NormalBC, TangentialBC, Pinned };

struct LinearSystem {
  GridPtr grid;
  FluidParams params;
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;         // filled by assemble_momentum / momentum_rhs
  std::vector<RowKind> row_kind;
  std::vector<double> friction;  // per node, used by the tangential rows

  int rows() const { return static_cast<int>(A.rows()); }
};

namespace detail {

using Trip = Eigen::Triplet<double>;

/// PDE stencil of component c at an interior node into the triplet list.
inline void emit_pde_row(const Grid& g, const FluidParams& p, int i, int j, int c,
                         std::vector<Trip>& trips) {
  const int row = 2 * g.idx(i, j) + c;
  auto on_c = [&](PhysDeriv d, double scale) {
    fields::emit_deriv(g, i, j, d, scale,
                       [&](int k, double w) { trips.emplace_back(row, 2 * k + c, w); });
  };
  auto on_other = [&](PhysDeriv d, double scale) {
    const int oc = 1 - c;
    fields::emit_deriv(g, i, j, d, scale,
                       [&](int k, double w) { trips.emplace_back(row, 2 * k + oc, w); });
  };
  on_c(PhysDeriv::X1, 1.0);                       // d_x1 u_c
  on_c(PhysDeriv::X1X1, -p.mu);                   // -mu Lap
  on_c(PhysDeriv::X2X2, -p.mu);
  const double vm = -(p.nu + p.mu);               // -(nu+mu) grad div
  if (c == 0) {
    on_c(PhysDeriv::X1X1, vm);
    on_other(PhysDeriv::X1X2, vm);
  } else {
    on_other(PhysDeriv::X1X2, vm);
    on_c(PhysDeriv::X2X2, vm);
  }
}

/// Tangential slip row: mu [2 n1 t1 d1u1 + (n1 t2 + n2 t1)(d2u1 + d1u2)
/// + 2 n2 t2 d2u2] + f u . tau = B.
inline void emit_tangential_row(const Grid& g, const FluidParams& p, const BoundaryNode& bn,
                                double fval, std::vector<Trip>& trips) {
  const int row = 2 * bn.k + 1;
  const double n1 = bn.n.x1, n2 = bn.n.x2, t1 = bn.tau.x1, t2 = bn.tau.x2;
  const double cross = n1 * t2 + n2 * t1;
  auto emit = [&](int comp, PhysDeriv d, double scale) {
    if (scale == 0.0) return;
    fields::emit_deriv(g, bn.i, bn.j, d, scale,
                       [&](int k, double w) { trips.emplace_back(row, 2 * k + comp, w); });
  };
  emit(0, PhysDeriv::X1, 2.0 * p.mu * n1 * t1);
  emit(0, PhysDeriv::X2, p.mu * cross);
  emit(1, PhysDeriv::X1, p.mu * cross);
  emit(1, PhysDeriv::X2, 2.0 * p.mu * n2 * t2);
  trips.emplace_back(row, 2 * bn.k + 0, fval * t1);
  trips.emplace_back(row, 2 * bn.k + 1, fval * t2);
}

}  // namespace detail

/// Assembles the operator and boundary-condition rows. The right-hand side
/// is attached separately so a factorization can be reused across solves.
inline LinearSystem assemble_operator(GridPtr grid, const FluidParams& params,
                                      const std::vector<double>& friction) {
  params.validate();
  const Grid& g = *grid;
  LinearSystem sys;
  sys.grid = grid;
  sys.params = params;
  sys.friction = friction;
  const int n = g.n_nodes();
  sys.row_kind.assign(2 * n, RowKind::Pinned);

  std::vector<detail::Trip> trips;
  trips.reserve(static_cast<std::size_t>(n) * 40);

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      switch (g.kind[k]) {
        case NodeKind::Interior:
          detail::emit_pde_row(g, params, i, j, 0, trips);
          detail::emit_pde_row(g, params, i, j, 1, trips);
          sys.row_kind[2 * k] = RowKind::Interior;
          sys.row_kind[2 * k + 1] = RowKind::Interior;
          break;
        case NodeKind::Corner:
        case NodeKind::Collapsed:
          trips.emplace_back(2 * k, 2 * k, 1.0);
          trips.emplace_back(2 * k + 1, 2 * k + 1, 1.0);
          break;
        default:
          break;  // boundary rows below, per part
      }
    }

  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    trips.emplace_back(2 * bn.k, 2 * bn.k, bn.n.x1);
    trips.emplace_back(2 * bn.k, 2 * bn.k + 1, bn.n.x2);
    detail::emit_tangential_row(g, params, bn, friction[bn.k], trips);
    sys.row_kind[2 * bn.k] = RowKind::NormalBC;
    sys.row_kind[2 * bn.k + 1] = RowKind::TangentialBC;
  }

  sys.A.resize(2 * n, 2 * n);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.makeCompressed();
  sys.rhs = Eigen::VectorXd::Zero(2 * n);
  return sys;
}

/// Right-hand side for given volume data F, density iterate w (the gamma
/// grad w term moves here) and boundary data.
inline Eigen::VectorXd momentum_rhs(const LinearSystem& sys, const ScalarField& w,
                                    const VectorField& F, const MomentumBC& bc) {
  const Grid& g = *sys.grid;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sys.rows());
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (sys.row_kind[2 * k] == RowKind::Interior) {
        rhs[2 * k] = F.v1[k] - sys.params.gamma * fields::apply_deriv(g, w.v, i, j, PhysDeriv::X1);
        rhs[2 * k + 1] =
            F.v2[k] - sys.params.gamma * fields::apply_deriv(g, w.v, i, j, PhysDeriv::X2);
      } else if (sys.row_kind[2 * k] == RowKind::NormalBC) {
        rhs[2 * k] = bc.g[k];
        rhs[2 * k + 1] = bc.B[k];
      }
    }
  return rhs;
}

/// Spec-shaped convenience: operator plus right-hand side in one go.
inline LinearSystem assemble_momentum(GridPtr grid, const FluidParams& params,
                                      const ScalarField& w, const VectorField& F,
                                      const MomentumBC& bc) {
  LinearSystem sys = assemble_operator(grid, params, bc.f);
  sys.rhs = momentum_rhs(sys, w, F, bc);
  return sys;
}

// ---------------------------------------------------------------------------
// Solve
// ---------------------------------------------------------------------------

struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolveInfo {
  std::string method;
  int iterations = 0;
  double residual = 0.0;
};

class MomentumSolver {
 public:
  explicit MomentumSolver(LinearSystem sys, bool force_krylov = false)
      : sys_(std::move(sys)) {
    direct_ = !force_krylov && sys_.rows() <= 120000;
    if (direct_) {
      lu_ = std::make_unique<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
      lu_->compute(sys_.A);
      if (lu_->info() != Eigen::Success)
        throw SolveError("sparse factorization failed");
    } else {
      ilu_ = std::make_unique<
          Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>>>();
      ilu_->setTolerance(1e-13);
      ilu_->setMaxIterations(2000);
      ilu_->compute(sys_.A);
      if (ilu_->info() != Eigen::Success)
        throw SolveError("preconditioner setup failed");
    }
  }

  const LinearSystem& system() const { return sys_; }

  VectorField solve(const Eigen::VectorXd& rhs, const MomentumBC& bc,
                    SolveInfo* info = nullptr) const {
    Eigen::VectorXd x;
    SolveInfo si;
    if (direct_) {
      x = lu_->solve(rhs);
      // one step of iterative refinement: the collapsed-edge rows carry large
      // metric coefficients and amplify the factorization's backward error
      x += lu_->solve(rhs - sys_.A * x);
      si.method = "sparselu";
    } else {
      x = ilu_->solve(rhs);
      si.method = "bicgstab+ilut";
      si.iterations = static_cast<int>(ilu_->iterations());
    }
    const double rnorm = (sys_.A * x - rhs).norm();
    const double scale = std::max(1.0, rhs.norm());
    si.residual = rnorm / scale;
    if (!(si.residual <= 1e-10))
      throw SolveError("linear solve did not reach the required residual: " +
                       std::to_string(si.residual));

    const Grid& g = *sys_.grid;
    VectorField u(sys_.grid);
    for (int k = 0; k < g.n_nodes(); ++k) {
      u.v1[k] = x[2 * k];
      u.v2[k] = x[2 * k + 1];
    }
    // Enforce the normal condition exactly at boundary nodes.
    for (const auto& bn : fields::boundary_nodes(g)) {
      if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
      const double un = u.v1[bn.k] * bn.n.x1 + u.v2[bn.k] * bn.n.x2;
      const double corr = bc.g[bn.k] - un;
      u.v1[bn.k] += corr * bn.n.x1;
      u.v2[bn.k] += corr * bn.n.x2;
    }
    for (int k = 0; k < g.n_nodes(); ++k)
      if (g.kind[k] == NodeKind::Corner || g.kind[k] == NodeKind::Collapsed) {
        u.v1[k] = 0.0;
        u.v2[k] = 0.0;
      }
    if (info) *info = si;
    return u;
  }

 private:
  LinearSystem sys_;
  bool direct_ = true;
  std::unique_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
  std::unique_ptr<
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>>>
      ilu_;
};

inline VectorField solve_momentum(const LinearSystem& sys, const MomentumBC& bc,
                                  SolveInfo* info = nullptr) {
  MomentumSolver solver(sys);
  return solver.solve(sys.rhs, bc, info);
}

/// Interior application of d_x1 u - mu Lap u - (nu+mu) grad div u.
/// Boundary/pinned entries are left zero.
inline VectorField apply_momentum_operator(const Grid& g, const FluidParams& p,
                                           const VectorField& u) {
  VectorField out(u.grid);
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] != NodeKind::Interior) continue;
      const double lap1 = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1X1) +
                          fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X2X2);
      const double lap2 = fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X1X1) +
                          fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2X2);
      const double gd1 = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1X1) +
                         fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X1X2);
      const double gd2 = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1X2) +
                         fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2X2);
      out.v1[k] = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1) - p.mu * lap1 -
                  (p.nu + p.mu) * gd1;
      out.v2[k] = fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X1) - p.mu * lap2 -
                  (p.nu + p.mu) * gd2;
    }
  return out;
}

// ---------------------------------------------------------------------------
// Korn inequality report
// ---------------------------------------------------------------------------

/// Dissipation integral int 2 mu D^2(u) + nu div^2 u dx.
inline double dissipation(const VectorField& u, const FluidParams& p) {
  const Grid& g = *u.grid;
  long double acc = 0.0L;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] == NodeKind::Collapsed) continue;
      const double d11 = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1);
      const double d22 = fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
      const double d12 = 0.5 * (fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X2) +
                                fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X1));
      const double dsq = d11 * d11 + d22 * d22 + 2.0 * d12 * d12;
      const double dv = d11 + d22;
      acc += (2.0 * p.mu * dsq + p.nu * dv * dv) * g.area[k];
    }
  return static_cast<double>(acc);
}

inline EstimateReport korn_report(const VectorField& u, const FluidParams& p) {
  const double lhs = dissipation(u, p);
  const double w12 = fields::w12_norm(u);
  EstimateReport r = EstimateReport::make("korn_inequality", lhs, w12 * w12);
  r.extra["degenerate"] = (w12 > 0 && lhs <= 1e-12 * w12 * w12) ? 1.0 : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Energy identity and estimate
// ---------------------------------------------------------------------------

struct EnergyReport {
  EstimateReport estimate;        // energy_estimate: C_meas
  double dissipation_term = 0;
  double boundary_term = 0;       // int (f + n1/2) u^2 ds
  double pressure_direct = 0;     // gamma int grad w . u
  double pressure_adjoint = 0;    // -gamma int w div u
  double pressure_substituted = 0;  // via the continuity linearization
  double rhs_volume = 0;          // int F . u
  double rhs_boundary = 0;        // int B (u . tau) ds
  double identity_residual = 0;   // a-priori identity mismatch
  double f_norm_dual = 0;
  double min_boundary_form = 0;   // min (f + n1/2); nonneg makes the form positive
  bool trivial = false;
};

namespace detail {

/// Seeded family of discrete test fields with vanishing normal component;
/// used to bound ||F||_{V*} from below.
inline std::vector<VectorField> dual_test_family(GridPtr grid, int count = 64,
                                                 unsigned seed = 9242u) {
  const Grid& g = *grid;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(1, 3);
  const auto& bb = g.domain.bbox;
  const double ex = std::max(bb.x1_max - bb.x1_min, 1e-12);
  const double ey = std::max(bb.x2_max - bb.x2_min, 1e-12);
  std::vector<VectorField> family;
  family.reserve(count);
  for (int m = 0; m < count; ++m) {
    const double a1 = amp(rng), a2 = amp(rng), b1 = amp(rng), b2 = amp(rng);
    const int k1 = mode(rng), k2 = mode(rng), k3 = mode(rng), k4 = mode(rng);
    VectorField v = VectorField::sample(
        grid,
        [&](double x, double y) {
          const double sx = (x - bb.x1_min) / ex, sy = (y - bb.x2_min) / ey;
          return a1 * std::sin(M_PI * k1 * sx) * std::sin(M_PI * k2 * sy) +
                 b1 * std::cos(M_PI * k2 * sx) * std::sin(M_PI * k1 * sy);
        },
        [&](double x, double y) {
          const double sx = (x - bb.x1_min) / ex, sy = (y - bb.x2_min) / ey;
          return a2 * std::sin(M_PI * k3 * sx) * std::sin(M_PI * k4 * sy) +
                 b2 * std::cos(M_PI * k4 * sx) * std::sin(M_PI * k3 * sy);
        });
    for (const auto& bn : fields::boundary_nodes(g)) {
      const double un = v.v1[bn.k] * bn.n.x1 + v.v2[bn.k] * bn.n.x2;
      v.v1[bn.k] -= un * bn.n.x1;
      v.v2[bn.k] -= un * bn.n.x2;
    }
    for (int k = 0; k < g.n_nodes(); ++k)
      if (g.kind[k] == NodeKind::Corner || g.kind[k] == NodeKind::Collapsed) {
        v.v1[k] = 0.0;
        v.v2[k] = 0.0;
      }
    family.push_back(std::move(v));
  }
  return family;
}

}  // namespace detail

/// Measured lower bound of ||F||_{V*}: sup over a fixed seeded test family of
/// <F, v> / ||v||_{W^1_2}.
inline double dual_norm_estimate(const VectorField& F) {
  const Grid& g = *F.grid;
  double best = 0.0;
  for (const auto& v : detail::dual_test_family(F.grid)) {
    long double pair = 0.0L;
    for (int k = 0; k < g.n_nodes(); ++k)
      pair += (F.v1[k] * v.v1[k] + F.v2[k] * v.v2[k]) * g.area[k];
    const double nv = fields::w12_norm(v);
    if (nv > 0) best = std::max(best, std::abs(static_cast<double>(pair)) / nv);
  }
  return best;
}

/// Evaluates the terms of the a-priori energy identity
///   int 2 mu D^2 + nu div^2 dx + int (f + n1/2) u^2 ds + gamma int grad w . u
///     = int F . u dx + int B (u . tau) ds
/// together with both alternative routes for the pressure coupling, and the
/// measured constant of the energy estimate.
inline EnergyReport energy_report(const VectorField& u, const ScalarField& w,
                                  const VectorField& F, const ScalarField& G,
                                  const MomentumBC& bc, const VectorField& U,
                                  const fields::TraceSamples& w_in,
                                  const FluidParams& p) {
  const Grid& g = *u.grid;
  EnergyReport er;
  er.dissipation_term = dissipation(u, p);

  long double bterm = 0.0L, rhsB = 0.0L, wn1 = 0.0L;
  double min_form = std::numeric_limits<double>::max();
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    const double usq = u.v1[bn.k] * u.v1[bn.k] + u.v2[bn.k] * u.v2[bn.k];
    const double ut = u.v1[bn.k] * bn.tau.x1 + u.v2[bn.k] * bn.tau.x2;
    const double form = bc.f[bn.k] + 0.5 * bn.n.x1;
    bterm += form * usq * bn.weight;
    rhsB += bc.B[bn.k] * ut * bn.weight;
    const double wb = (bn.part.kind == geometry::PartRef::Kind::In)
                          ? w_in.interp_param(bn.param)
                          : w.v[bn.k];
    wn1 += wb * wb * bn.n.x1 * bn.weight;
    min_form = std::min(min_form, form);
  }
  er.boundary_term = static_cast<double>(bterm);
  er.rhs_boundary = static_cast<double>(rhsB);
  er.min_boundary_form = min_form;

  long double press = 0.0L, adj = 0.0L, fu = 0.0L, gw = 0.0L, wdivU = 0.0L;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      const int k = g.idx(i, j);
      if (g.kind[k] == NodeKind::Collapsed) continue;
      const double wx = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X1);
      const double wy = fields::apply_deriv(g, w.v, i, j, PhysDeriv::X2);
      const double du = fields::apply_deriv(g, u.v1, i, j, PhysDeriv::X1) +
                        fields::apply_deriv(g, u.v2, i, j, PhysDeriv::X2);
      const double dU = fields::apply_deriv(g, U.v1, i, j, PhysDeriv::X1) +
                        fields::apply_deriv(g, U.v2, i, j, PhysDeriv::X2);
      press += (wx * u.v1[k] + wy * u.v2[k]) * g.area[k];
      adj += w.v[k] * du * g.area[k];
      fu += (F.v1[k] * u.v1[k] + F.v2[k] * u.v2[k]) * g.area[k];
      gw += G.v[k] * w.v[k] * g.area[k];
      wdivU += w.v[k] * w.v[k] * dU * g.area[k];
    }
  er.pressure_direct = p.gamma * static_cast<double>(press);
  er.pressure_adjoint = -p.gamma * static_cast<double>(adj);
  er.pressure_substituted =
      p.gamma * (0.5 * static_cast<double>(wn1) - 0.5 * static_cast<double>(wdivU) -
                 static_cast<double>(gw));
  er.rhs_volume = static_cast<double>(fu);
  er.identity_residual = std::abs(er.dissipation_term + er.boundary_term +
                                  er.pressure_direct - er.rhs_volume - er.rhs_boundary);

  er.f_norm_dual = dual_norm_estimate(F);
  long double bl2 = 0.0L;
  for (const auto& bn : fields::boundary_nodes(g)) {
    if (bn.kind == NodeKind::Corner || bn.kind == NodeKind::Collapsed) continue;
    bl2 += bc.B[bn.k] * bc.B[bn.k] * bn.weight;
  }
  const double lhs = fields::w12_norm(u) + fields::lq_norm(w, 2.0);
  const double rhs =
      er.f_norm_dual + fields::lq_norm(G, 2.0) + std::sqrt(static_cast<double>(bl2));
  er.estimate = EstimateReport::make("energy_estimate", lhs, rhs);
  er.estimate.extra["identity_residual"] = er.identity_residual;
  er.estimate.extra["min_boundary_form"] = er.min_boundary_form;
  er.trivial = er.estimate.trivial;
  return er;
}

}  // namespace inflow::momentum
