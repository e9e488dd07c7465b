#pragma once

// CLI entry logic: loads a scenario, runs the requested mode and writes
// report.json, fields_*.csv and sweep tables. Exit codes: 0 success,
// 2 parse/validation error, 3 solver divergence or admission failure,
// 4 estimate admissibility failure (s >= delta; report still written).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "inflow/oracle.hpp"
#include "inflow/report.hpp"
#include "inflow/scenario.hpp"
#include "inflow/transport.hpp"

namespace inflow::harness {

enum class Mode { Solve, VerifyEstimates, NormsOnly, GeometryCheck };

inline Mode mode_from_string(const std::string& s) {
  if (s == "solve") return Mode::Solve;
  if (s == "verify-estimates") return Mode::VerifyEstimates;
  if (s == "norms-only") return Mode::NormsOnly;
  if (s == "geometry-check") return Mode::GeometryCheck;
  throw ScenarioError("unknown mode '" + s + "'");
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::VerifyEstimates: return "verify-estimates";
    case Mode::NormsOnly: return "norms-only";
    case Mode::GeometryCheck: return "geometry-check";
  }
  return "unknown";
}

struct RunConfig {
  std::string scenario_path;
  Mode mode = Mode::Solve;
  int nx = 0, ny = 0;       // > 0 overrides the scenario grid
  double tol = 0.0;         // > 0 overrides the scenario tolerance
  bool deterministic = false;
  std::string out_dir = "out";
  std::string sweep_name;   // "grid", "d0_scale" or "s"
  std::vector<double> sweep_values;
};

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitSolver = 3;
constexpr int kExitAdmissibility = 4;

namespace detail {

inline json to_json(const EstimateReport& r) {
  json j{{"name", r.name},         {"lhs", r.lhs},
         {"rhs", r.rhs},           {"constant", r.constant},
         {"trivial", r.trivial},   {"admissible", r.admissible}};
  for (const auto& [k, v] : r.extra) j["extra"][k] = v;
  return j;
}

inline json to_json(const picard::ResidualReport& r) {
  return json{{"momentum_l2", r.momentum_l2},
              {"momentum_linf", r.momentum_linf},
              {"continuity_fd_l2", r.continuity_fd_l2},
              {"continuity_fd_linf", r.continuity_fd_linf},
              {"continuity_char_l2", r.continuity_char_l2},
              {"continuity_char_linf", r.continuity_char_linf},
              {"bc_normal_linf", r.bc_normal_linf},
              {"bc_tangential_linf", r.bc_tangential_linf},
              {"inflow_trace_linf", r.inflow_trace_linf},
              {"solver_consistent_max", r.solver_consistent_max()}};
}

inline json to_json(const picard::IterationReport& rep) {
  json iters = json::array();
  for (const auto& it : rep.iterations) {
    json row{{"k", it.k},         {"step_diff", it.step_diff}, {"q", it.q},
             {"u_w12", it.u_w12}, {"w_l2", it.w_l2}};
    if (it.u_w1sp >= 0) {
      row["u_w1sp"] = it.u_w1sp;
      row["w_wsp"] = it.w_wsp;
    }
    iters.push_back(row);
  }
  return json{{"status", picard::to_string(rep.status)},
              {"d0", rep.d0},
              {"iterations", iters},
              {"est_main_lhs", rep.est_main_lhs},
              {"est_main_ratio", rep.est_main_ratio},
              {"min_density", rep.min_density},
              {"residual", to_json(rep.residual)},
              {"transport_quality",
               json{{"untraceable", rep.transport_quality.untraceable},
                    {"flagged_tangential", rep.transport_quality.flagged_tangential},
                    {"clamped", rep.transport_quality.clamped},
                    {"max_arclength", rep.transport_quality.max_arclength}}},
              {"friction",
               json{{"nonneg_on_outflow", rep.friction.nonneg_on_outflow},
                    {"sign_ok_on_inflow", rep.friction.sign_ok_on_inflow},
                    {"min_boundary_form", rep.friction.min_boundary_form}}}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

template <class Field>
void dump_to(const std::filesystem::path& dir, const std::string& name,
             const Field& f) {
  std::ofstream out(dir / ("fields_" + name + ".csv"), std::ios::binary);
  fields::dump_field(out, f, name);
}

/// Seeded slip-compatible test family shared by the Korn and energy checks.
inline std::vector<fields::VectorField> slip_family(fields::GridPtr grid, int count,
                                                    unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> a(-1.0, 1.0);
  std::uniform_int_distribution<int> mode(1, 3);
  std::vector<fields::VectorField> out;
  const auto& bb = grid->domain.bbox;
  const double ex = std::max(bb.x1_max - bb.x1_min, 1e-12);
  const double ey = std::max(bb.x2_max - bb.x2_min, 1e-12);
  for (int m = 0; m < count; ++m) {
    const double a1 = a(rng), a2 = a(rng);
    const int k1 = mode(rng), k2 = mode(rng);
    auto v = fields::VectorField::sample(
        grid,
        [&](double x, double y) {
          return a1 * std::sin(M_PI * k1 * (x - bb.x1_min) / ex) *
                 std::cos(M_PI * k2 * (y - bb.x2_min) / ey);
        },
        [&](double x, double y) {
          return a2 * std::cos(M_PI * k1 * (x - bb.x1_min) / ex) *
                 std::sin(M_PI * k2 * (y - bb.x2_min) / ey);
        });
    for (const auto& bn : fields::boundary_nodes(*grid)) {
      const double un = v.v1[bn.k] * bn.n.x1 + v.v2[bn.k] * bn.n.x2;
      v.v1[bn.k] -= un * bn.n.x1;
      v.v2[bn.k] -= un * bn.n.x2;
    }
    for (int k = 0; k < grid->n_nodes(); ++k)
      if (grid->kind[k] == fields::NodeKind::Corner ||
          grid->kind[k] == fields::NodeKind::Collapsed) {
        v.v1[k] = 0.0;
        v.v2[k] = 0.0;
      }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single run
// ---------------------------------------------------------------------------

struct RunResult {
  int exit_code = kExitOk;
  json report;
};

inline RunResult run_once(const Scenario& sc_in, const RunConfig& cfg) {
  Scenario sc = sc_in;
  if (cfg.nx > 0) sc.nx = cfg.nx;
  if (cfg.ny > 0) sc.ny = cfg.ny;
  if (cfg.tol > 0) sc.tol = cfg.tol;
  if (sc.nx < 8 || sc.ny < 8) throw ScenarioError("grid resolution must be >= 8");

  const auto t_start = std::chrono::steady_clock::now();
  RunResult res;
  json& rep = res.report;
  rep["schema"] = 1;
  rep["mode"] = to_string(cfg.mode);
  rep["scenario"] = sc.name;
  rep["grid"] = json{{"nx", sc.nx}, {"ny", sc.ny}};
  rep["params"] = json{{"mu", sc.fluid.mu},
                       {"nu", sc.fluid.nu},
                       {"kappa", sc.pressure.kappa},
                       {"s", sc.norms.s},
                       {"p", sc.norms.p},
                       {"epsilon", sc.norms.epsilon},
                       {"tol", sc.tol},
                       {"d0_max", sc.d0_max},
                       {"d0_scale", sc.d0_scale},
                       {"theta", sc.theta}};
  json estimates = json::array();

  const geometry::Domain domain = geometry::build_domain(sc.domain_spec);
  const auto grid = fields::make_grid(domain, sc.nx, sc.ny);
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);

  // Flatness certificates feed the s < delta admissibility gate everywhere.
  const auto flat = geometry::singularity_certificates(domain);
  for (std::size_t i = 0; i < flat.certificates.size(); ++i) {
    const auto& c = flat.certificates[i];
    EstimateReport er = EstimateReport::make("boundary_flatness", c.constant, 0.0);
    er.constant = c.constant;
    er.admissible = c.constant_side || c.constant > 0.0;
    er.extra["exponent"] = c.exponent;
    er.extra["delta"] = c.delta;
    er.extra["radius"] = c.radius;
    er.extra["constant_side"] = c.constant_side ? 1.0 : 0.0;
    estimates.push_back(detail::to_json(er));
  }
  rep["delta"] = std::isinf(flat.delta) ? json("inf") : json(flat.delta);

  const fields::BoundaryData data = build_boundary_data(*grid, sc);

  switch (cfg.mode) {
    case Mode::GeometryCheck: {
      json geo;
      geo["perimeter"] = geometry::perimeter(domain);
      geo["grid_area"] = grid->total_area();
      geo["singularity_points"] = domain.singularity_points.size();
      geo["corners"] = domain.corners.size();
      double n_unit = 0, n_tangent = 0;
      for (const auto& bn : fields::boundary_nodes(*grid)) {
        if (bn.kind == fields::NodeKind::Corner ||
            bn.kind == fields::NodeKind::Collapsed)
          continue;
        n_unit = std::max(n_unit, std::abs(std::hypot(bn.n.x1, bn.n.x2) - 1.0));
        n_tangent =
            std::max(n_tangent, std::abs(bn.n.x1 * bn.tau.x1 + bn.n.x2 * bn.tau.x2));
      }
      geo["normal_unit_defect"] = n_unit;
      geo["normal_tangent_defect"] = n_tangent;

      // Assumption on (d - n1) times the graph slopes near singularity points.
      std::vector<geometry::BoundarySample> samples;
      for (const auto& part : domain.parts()) {
        const auto& td = fields::find_part(data.d, part, "d");
        const auto nodes = fields::part_nodes(*grid, part);
        for (std::size_t m = 0; m < nodes.size(); ++m) {
          if (nodes[m].kind == fields::NodeKind::Corner ||
              nodes[m].kind == fields::NodeKind::Collapsed)
            continue;
          samples.push_back(
              {{grid->x1[nodes[m].k], grid->x2[nodes[m].k]},
               td.samples.value[m] - nodes[m].n.x1});
        }
      }
      const auto a1 = geometry::check_assumption1(domain, samples, 1.0);
      EstimateReport er =
          EstimateReport::make("data_slope_boundedness",
                               std::max(a1.max_inflow, a1.max_outflow), 1.0);
      er.admissible = a1.pass;
      estimates.push_back(detail::to_json(er));
      rep["geometry"] = geo;
      break;
    }

    case Mode::NormsOnly: {
      const double d0 = fields::compute_d0(data, domain, sc.norms);
      EstimateReport d0r = EstimateReport::make("data_distance_d0", d0, sc.d0_max);
      d0r.admissible = d0 <= sc.d0_max;
      estimates.push_back(detail::to_json(d0r));

      const auto ws = picard::PicardWorkspace::build(picard_config(sc, grid));
      EstimateReport ext = picard::extension_bound_report(
          ws.u0,
          [&] {
            std::vector<fields::PartTrace> ts;
            for (const auto& part : domain.parts()) {
              auto t = fields::find_part(data.d, part, "d");
              for (std::size_t m = 0; m < t.samples.size(); ++m)
                t.samples.value[m] -=
                    fields::detail::normal1_at(domain, part, t.samples.param[m]);
              ts.push_back(std::move(t));
            }
            return ts;
          }(),
          sc.norms);
      estimates.push_back(detail::to_json(ext));
      rep["w0_wsp_norm"] = fields::wsp_norm(ws.w0, sc.norms);

      // Imbedding / interpolation checkers over a seeded scalar family.
      std::mt19937 rng(515151u);
      std::uniform_real_distribution<double> a(-1.0, 1.0);
      double max_ratio = 0.0, c_delta = 0.0;
      const double q = std::numeric_limits<double>::infinity();
      const double delta = 0.05;
      for (int m = 0; m < 24; ++m) {
        const double a1 = a(rng), a2 = a(rng);
        const int k1 = 1 + m % 3, k2 = 1 + m % 2;
        const auto f = fields::ScalarField::sample(grid, [&](double x, double y) {
          return a1 * std::sin(M_PI * k1 * x) * std::cos(M_PI * k2 * y) + a2 * x;
        });
        const auto ic = fields::check_imbedding(f, sc.norms, q);
        max_ratio = std::max(max_ratio, ic.ratio);
        if (ic.lq > 0)
          c_delta = std::max(c_delta, (ic.lq - delta * ic.wsp) /
                                          std::max(fields::lq_norm(f, 2.0), 1e-300));
      }
      EstimateReport imb = EstimateReport::make("imbedding", max_ratio, 1.0);
      imb.admissible = sc.norms.imbedding_admissible();
      estimates.push_back(detail::to_json(imb));
      EstimateReport itp = EstimateReport::make("interpolation", c_delta, 1.0);
      itp.extra["delta"] = delta;
      estimates.push_back(detail::to_json(itp));

      detail::dump_to(out_dir, "u0", ws.u0);
      detail::dump_to(out_dir, "w0", ws.w0);
      break;
    }

    case Mode::VerifyEstimates: {
      if (sc.norms.s >= flat.delta) {
        EstimateReport er = EstimateReport::make("transport_admissibility", sc.norms.s,
                                                 flat.delta);
        er.admissible = false;
        estimates.push_back(detail::to_json(er));
        res.exit_code = kExitAdmissibility;
        break;
      }

      const auto ws = picard::PicardWorkspace::build(picard_config(sc, grid));

      // Korn over the seeded slip family.
      double korn_min = std::numeric_limits<double>::max();
      for (const auto& v : detail::slip_family(grid, 24, 727u)) {
        const auto kr = momentum::korn_report(v, sc.fluid);
        if (kr.rhs > 0) korn_min = std::min(korn_min, kr.constant);
      }
      EstimateReport kr = EstimateReport::make("korn_inequality", korn_min, 1.0);
      kr.constant = korn_min;
      estimates.push_back(detail::to_json(kr));

      // Energy estimate over a seeded small-data ensemble of the linearized
      // system (advecting field zero).
      std::mt19937 rng(881u);
      std::uniform_real_distribution<double> a(-0.01, 0.01);
      std::uniform_int_distribution<int> mode(1, 3);
      momentum::MomentumBC ebc(grid->n_nodes());
      std::vector<double> fric;
      picard::detail::node_array_from_traces(*grid, data.f, fric, "f");
      ebc.f = fric;
      momentum::MomentumSolver esolver(
          momentum::assemble_operator(grid, sc.fluid, ebc.f));
      double energy_cmax = 0.0, ident_max = 0.0;
      int energy_fail = 0;
      for (int m = 0; m < 8; ++m) {
        const double a1 = a(rng), a2 = a(rng), a3 = a(rng), a4 = a(rng), a5 = a(rng);
        const int k1 = mode(rng), k2 = mode(rng);
        const auto F = fields::VectorField::sample(
            grid,
            [&](double x, double y) {
              return a1 * std::sin(M_PI * k1 * x) * std::cos(M_PI * k2 * y);
            },
            [&](double x, double y) {
              return a2 * std::cos(M_PI * k1 * x) * std::sin(M_PI * k2 * y);
            });
        const auto G = fields::ScalarField::sample(grid, [&](double x, double y) {
          return a3 * std::cos(M_PI * k2 * x) * std::cos(M_PI * k1 * y);
        });
        momentum::MomentumBC bc = ebc;
        for (const auto& bn : fields::boundary_nodes(*grid)) {
          if (bn.kind == fields::NodeKind::Corner ||
              bn.kind == fields::NodeKind::Collapsed)
            continue;
          bc.B[bn.k] = a5 * std::sin(M_PI * k1 * bn.arc) * bn.tau.x1;
        }
        fields::TraceSamples win;
        for (int j = 0; j < grid->ny; ++j) {
          const double y = grid->x2[grid->idx(0, j)];
          win.param.push_back(y);
          win.arc.push_back(grid->arc_in[j]);
          // vanish near the singularity neighborhoods
          const double edge = std::min(y - domain.y0, domain.y_top() - y);
          const double taper = edge > 2.0 * grid->sing_radius ? 1.0 : 0.0;
          win.value.push_back(a4 * taper * std::sin(2 * M_PI * (y - domain.y0) /
                                                    domain.height_b));
        }
        // coupled linear solve by sub-iteration
        fields::VectorField u(grid), U0(grid);
        fields::ScalarField w(grid);
        transport::TransportProblem prob;
        prob.U = &U0;
        prob.w_in = win;
        bool ok = false;
        for (int sweep_i = 0; sweep_i < 30; ++sweep_i) {
          fields::ScalarField H = G;
          const auto divu = fields::divergence(u);
          fields::axpy(-1.0, divu, H);
          prob.H = &H;
          auto [w_new, tq] = transport::solve_transport(prob);
          const Eigen::VectorXd rhs =
              momentum::momentum_rhs(esolver.system(), w_new, F, bc);
          fields::VectorField u_new = esolver.solve(rhs, bc);
          fields::VectorField du = u_new;
          fields::axpy(-1.0, u, du);
          fields::ScalarField dw = w_new;
          fields::axpy(-1.0, w, dw);
          const double step = fields::w12_norm(du) + fields::lq_norm(dw, 2.0);
          u = std::move(u_new);
          w = std::move(w_new);
          if (step < 1e-11) {
            ok = true;
            break;
          }
        }
        if (!ok) {
          ++energy_fail;
          continue;
        }
        const auto er = momentum::energy_report(u, w, F, G, bc, U0, win, sc.fluid);
        energy_cmax = std::max(energy_cmax, er.estimate.constant);
        ident_max = std::max(ident_max, er.identity_residual);
      }
      EstimateReport en = EstimateReport::make("energy_estimate", energy_cmax, 1.0);
      en.constant = energy_cmax;
      en.extra["identity_residual_max"] = ident_max;
      en.extra["ensemble_failures"] = energy_fail;
      en.admissible = energy_fail == 0;
      estimates.push_back(detail::to_json(en));

      // Damped transport estimate with the data-induced field u0.
      const double amp = std::max(0.01, sc.d0_scale * 0.01);
      auto H = fields::ScalarField::sample(grid, [&](double x, double y) {
        return amp * std::cos(M_PI * x) *
               std::cos(M_PI * (y - domain.y0) / domain.height_b);
      });
      {
        const auto divu0 = fields::divergence(ws.u0);
        fields::axpy(-1.0, divu0, H);
      }
      transport::TransportProblem tp;
      tp.U = &ws.u0;
      tp.H = &H;
      tp.w_in = ws.w_in;
      tp.damped = true;
      const auto [wt, tq] = transport::solve_transport(tp);
      auto ter = transport::transport_estimate_report(wt, H, ws.w_in, sc.norms,
                                                      flat.delta);
      estimates.push_back(detail::to_json(ter));
      estimates.push_back(detail::to_json(transport::transport_l2_report(wt, H, ws.w_in)));
      const auto singr =
          transport::check_sing_conditions(ws.u0, ws.w_in, 1.0);
      EstimateReport se = EstimateReport::make(
          "singularity_conditions", std::max(singr.sup_in, singr.sup_out), 1.0);
      se.admissible = singr.pass;
      se.extra["as1_sup"] = singr.sup_as1;
      se.extra["w_in_max_near_sing"] = singr.w_in_max;
      estimates.push_back(detail::to_json(se));
      rep["transport_quality"] =
          json{{"untraceable", tq.untraceable},
               {"flagged_tangential", tq.flagged_tangential},
               {"clamped", tq.clamped},
               {"max_arclength", tq.max_arclength}};

      // Manufactured momentum error, for grid sweeps (square-like domains).
      const auto c = oracle::mms_case("trig1");
      bool mms_fits = true;
      for (const auto& bn : fields::boundary_nodes(*grid)) {
        const double un = c.u1.v(grid->x1[bn.k], grid->x2[bn.k]) * bn.n.x1 +
                          c.u2.v(grid->x1[bn.k], grid->x2[bn.k]) * bn.n.x2;
        if (std::abs(un) > 1e-12) {
          mms_fits = false;
          break;
        }
      }
      if (mms_fits) {
        const auto u_exact = fields::VectorField::sample(
            grid, [&](double x, double y) { return c.u1.v(x, y); },
            [&](double x, double y) { return c.u2.v(x, y); });
        const auto wf =
            fields::ScalarField::sample(grid, [&](double x, double y) { return c.w.v(x, y); });
        const auto F = fields::VectorField::sample(
            grid,
            [&](double x, double y) {
              return c.momentum_source({sc.fluid.mu, sc.fluid.nu, sc.fluid.gamma}, {x, y}).x1;
            },
            [&](double x, double y) {
              return c.momentum_source({sc.fluid.mu, sc.fluid.nu, sc.fluid.gamma}, {x, y}).x2;
            });
        momentum::MomentumBC bc(grid->n_nodes());
        bc.f = fric;
        for (const auto& bn : fields::boundary_nodes(*grid)) {
          if (bn.kind == fields::NodeKind::Corner ||
              bn.kind == fields::NodeKind::Collapsed)
            continue;
          bc.B[bn.k] = c.boundary_stress({sc.fluid.mu, sc.fluid.nu, sc.fluid.gamma},
                                         {grid->x1[bn.k], grid->x2[bn.k]}, bn.n, bn.tau,
                                         fric[bn.k]);
        }
        auto sys = momentum::assemble_momentum(grid, sc.fluid, wf, F, bc);
        const auto uh = momentum::solve_momentum(sys, bc);
        double l2 = 0;
        for (int k = 0; k < grid->n_nodes(); ++k) {
          const double e1 = uh.v1[k] - u_exact.v1[k], e2 = uh.v2[k] - u_exact.v2[k];
          l2 += (e1 * e1 + e2 * e2) * grid->area[k];
        }
        EstimateReport mm =
            EstimateReport::make("mms_momentum_l2_error", std::sqrt(l2), 1.0);
        estimates.push_back(detail::to_json(mm));
      }
      break;
    }

    case Mode::Solve: {
      if (sc.norms.s >= flat.delta) {
        EstimateReport er =
            EstimateReport::make("transport_admissibility", sc.norms.s, flat.delta);
        er.admissible = false;
        estimates.push_back(detail::to_json(er));
        res.exit_code = kExitAdmissibility;
        break;
      }
      auto cfg_p = picard_config(sc, grid);
      const auto sol = picard::picard_solve(cfg_p);
      rep["iteration"] = detail::to_json(sol.report);
      EstimateReport d0r =
          EstimateReport::make("data_distance_d0", sol.report.d0, sc.d0_max);
      d0r.admissible = sol.report.d0 <= sc.d0_max;
      estimates.push_back(detail::to_json(d0r));
      EstimateReport em = EstimateReport::make("main_estimate", sol.report.est_main_lhs,
                                               sol.report.d0);
      estimates.push_back(detail::to_json(em));

      if (sol.report.status == picard::PicardStatus::Converged) {
        // Energy report at the converged state.
        const auto ws_bc = picard::build_momentum_bc(grid, cfg_p.data, sol.u0, sc.fluid);
        const auto rhs =
            picard::compute_rhs(sol.u, sol.w, sol.u0, sol.w0, sc.fluid, sc.pressure);
        fields::VectorField U = sol.u;
        fields::axpy(1.0, sol.u0, U);
        const auto er = momentum::energy_report(sol.u, sol.w, rhs.F, rhs.G, ws_bc, U,
                                                cfg_p.data.w_in(), sc.fluid);
        estimates.push_back(detail::to_json(er.estimate));
        detail::dump_to(out_dir, "u", sol.u);
        detail::dump_to(out_dir, "w", sol.w);
        detail::dump_to(out_dir, "u0", sol.u0);
        detail::dump_to(out_dir, "w0", sol.w0);
        res.exit_code = kExitOk;
      } else {
        res.exit_code = kExitSolver;
      }
      break;
    }
  }

  rep["estimates"] = estimates;
  rep["exit"] = res.exit_code;
  if (!cfg.deterministic)
    rep["elapsed_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
  return res;
}

inline int run(const RunConfig& cfg) {
  const std::filesystem::path out_dir(cfg.out_dir);
  json report;
  int code;
  try {
    const Scenario sc = load_scenario(cfg.scenario_path);
    RunResult r = run_once(sc, cfg);
    report = std::move(r.report);
    code = r.exit_code;
  } catch (const ScenarioError& e) {
    report = json{{"schema", 1}, {"error", e.what()}, {"exit", kExitParse}};
    code = kExitParse;
  } catch (const geometry::DomainError& e) {
    report = json{{"schema", 1}, {"error", e.what()}, {"exit", kExitParse}};
    code = kExitParse;
  } catch (const std::exception& e) {
    report = json{{"schema", 1}, {"error", e.what()}, {"exit", kExitSolver}};
    code = kExitSolver;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  detail::write_text(out_dir / "report.json", report.dump(2) + "\n");
  return code;
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

inline int sweep(const RunConfig& cfg) {
  if (cfg.sweep_name != "grid" && cfg.sweep_name != "d0_scale" && cfg.sweep_name != "s")
    throw ScenarioError("sweep parameter must be grid, d0_scale or s");
  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);

  Scenario base;
  try {
    base = load_scenario(cfg.scenario_path);
  } catch (const std::exception& e) {
    detail::write_text(out_dir / "report.json",
                       json{{"schema", 1}, {"error", e.what()}, {"exit", kExitParse}}
                               .dump(2) +
                           "\n");
    return kExitParse;
  }

  struct Row {
    double value;
    int exit_code;
    double d0 = 0, est_lhs = 0, est_ratio = 0, mms_err = 0, trans_c = 0;
    bool admissible = true;
  };
  std::vector<Row> rows;
  int worst = kExitOk;
  int idx = 0;
  for (const double v : cfg.sweep_values) {
    Scenario sc = base;
    RunConfig rc = cfg;
    rc.sweep_name.clear();
    rc.out_dir = (out_dir / ("run_" + std::to_string(idx++))).string();
    if (cfg.sweep_name == "grid") {
      sc.nx = sc.ny = static_cast<int>(v);
    } else if (cfg.sweep_name == "d0_scale") {
      sc.d0_scale = base.d0_scale * v;
    } else {
      sc.norms.s = v;
    }
    Row row;
    row.value = v;
    json rep;
    try {
      RunResult r = run_once(sc, rc);
      rep = std::move(r.report);
      row.exit_code = r.exit_code;
    } catch (const std::exception& e) {
      rep = json{{"schema", 1}, {"error", e.what()}, {"exit", kExitSolver}};
      row.exit_code = kExitSolver;
    }
    std::filesystem::create_directories(rc.out_dir);
    detail::write_text(std::filesystem::path(rc.out_dir) / "report.json",
                       rep.dump(2) + "\n");
    if (rep.contains("iteration")) {
      row.d0 = rep["iteration"]["d0"].get<double>();
      row.est_lhs = rep["iteration"]["est_main_lhs"].get<double>();
      row.est_ratio = rep["iteration"]["est_main_ratio"].get<double>();
    }
    if (rep.contains("estimates"))
      for (const auto& e : rep["estimates"]) {
        if (e["name"] == "mms_momentum_l2_error") row.mms_err = e["lhs"].get<double>();
        if (e["name"] == "transport_wsp_estimate")
          row.trans_c = e["constant"].get<double>();
        if (e.contains("admissible") && !e["admissible"].get<bool>())
          row.admissible = false;
      }
    if (row.exit_code == kExitParse || row.exit_code == kExitSolver)
      worst = std::max(worst, row.exit_code);
    rows.push_back(row);
  }

  // Aggregated table with per-row provenance and observed orders.
  std::ostringstream csv;
  csv.precision(17);
  csv << "param,value,exit,admissible,d0,est_main_lhs,est_main_ratio,"
         "mms_momentum_l2_error,order,transport_constant\n";
  for (std::size_t m = 0; m < rows.size(); ++m) {
    const Row& r = rows[m];
    double order = 0.0;
    if (cfg.sweep_name == "grid" && m > 0 && rows[m - 1].mms_err > 0 && r.mms_err > 0)
      order = std::log(rows[m - 1].mms_err / r.mms_err) /
              std::log(r.value / rows[m - 1].value);
    csv << cfg.sweep_name << ',' << r.value << ',' << r.exit_code << ','
        << (r.admissible ? 1 : 0) << ',' << r.d0 << ',' << r.est_lhs << ','
        << r.est_ratio << ',' << r.mms_err << ',' << order << ',' << r.trans_c << "\n";
  }
  const char* table_name = cfg.sweep_name == "grid" ? "convergence.csv" : "sweep.csv";
  detail::write_text(out_dir / table_name, csv.str());
  return worst;
}

}  // namespace inflow::harness
