#pragma once

// Scenario and domain-spec files (JSON). The domain spec lists the boundary
// graphs piecewise; the scenario references a domain, defines the boundary
// traces as closed-form expressions over the boundary parameter, and fixes
// fluid/norm/solver parameters. Parsers reject unknown keys.

#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "inflow/boundary.hpp"
#include "inflow/expr.hpp"
#include "inflow/geometry.hpp"
#include "inflow/grid.hpp"
#include "inflow/momentum.hpp"
#include "inflow/norms.hpp"
#include "inflow/picard.hpp"

namespace inflow::harness {

using nlohmann::json;

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

inline void check_keys(const json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  if (!j.is_object()) throw ScenarioError(where + ": expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key))
      throw ScenarioError(where + ": unknown key '" + key + "'");
}

inline double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ScenarioError(where + ": expected a number");
  return j.get<double>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Domain spec files
// ---------------------------------------------------------------------------

inline geometry::PieceSpec parse_piece(const json& j, const std::string& where) {
  detail::check_keys(j, {"interval", "kind", "data"}, where);
  if (!j.contains("interval") || !j.contains("kind") || !j.contains("data"))
    throw ScenarioError(where + ": piece needs interval, kind and data");
  const auto& iv = j.at("interval");
  if (!iv.is_array() || iv.size() != 2)
    throw ScenarioError(where + ": interval must be [a, b]");
  geometry::PieceSpec p;
  p.t0 = detail::num(iv[0], where);
  p.t1 = detail::num(iv[1], where);
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "poly") {
    if (!j.at("data").is_array()) throw ScenarioError(where + ": poly data must be an array");
    std::vector<double> coeffs;
    for (const auto& c : j.at("data")) coeffs.push_back(detail::num(c, where));
    p.fn = geometry::PieceFn::poly(std::move(coeffs));
  } else if (kind == "samples") {
    const auto& d = j.at("data");
    detail::check_keys(d, {"t", "x"}, where + ".data");
    if (!d.contains("t") || !d.contains("x"))
      throw ScenarioError(where + ": samples need arrays t and x");
    std::vector<double> t, x;
    for (const auto& v : d.at("t")) t.push_back(detail::num(v, where));
    for (const auto& v : d.at("x")) x.push_back(detail::num(v, where));
    p.fn = geometry::PieceFn::samples(std::move(t), std::move(x));
  } else {
    throw ScenarioError(where + ": kind must be 'poly' or 'samples'");
  }
  return p;
}

inline geometry::DomainSpec parse_domain_spec(const json& j) {
  detail::check_keys(
      j, {"pieces_in", "pieces_out", "gamma0", "eps_corner_frac", "sing_radius_frac"},
      "domain");
  if (!j.contains("pieces_in") || !j.contains("pieces_out"))
    throw ScenarioError("domain: pieces_in and pieces_out are required");
  geometry::DomainSpec spec;
  int idx = 0;
  for (const auto& p : j.at("pieces_in"))
    spec.pieces_in.push_back(parse_piece(p, "pieces_in[" + std::to_string(idx++) + "]"));
  idx = 0;
  for (const auto& p : j.at("pieces_out"))
    spec.pieces_out.push_back(parse_piece(p, "pieces_out[" + std::to_string(idx++) + "]"));
  if (j.contains("gamma0")) {
    idx = 0;
    for (const auto& g : j.at("gamma0")) {
      const std::string where = "gamma0[" + std::to_string(idx++) + "]";
      detail::check_keys(g, {"x2", "x"}, where);
      if (!g.contains("x2") || !g.contains("x") || !g.at("x").is_array() ||
          g.at("x").size() != 2)
        throw ScenarioError(where + ": expected {x2, x: [lo, hi]}");
      spec.gamma0.push_back({detail::num(g.at("x2"), where),
                             detail::num(g.at("x")[0], where),
                             detail::num(g.at("x")[1], where)});
    }
  }
  if (j.contains("eps_corner_frac"))
    spec.eps_corner_frac = detail::num(j.at("eps_corner_frac"), "domain");
  if (j.contains("sing_radius_frac"))
    spec.sing_radius_frac = detail::num(j.at("sing_radius_frac"), "domain");
  return spec;
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

struct Scenario {
  std::string name = "unnamed";
  geometry::DomainSpec domain_spec;
  std::string domain_ref;  // file name when the domain came from a file

  // traces: perturbation expressions over the boundary parameter
  expr::Expression delta_b{"0"};
  expr::Expression delta_d{"0"};
  expr::Expression friction{"1"};
  expr::Expression rho_in{"1"};
  double d0_scale = 1.0;

  momentum::FluidParams fluid;
  picard::PressureLaw pressure;
  fields::NormParams norms{0.5, 5.0, 0.0};

  double tol = 1e-10;
  int max_iter = 20;
  double theta = 1.0;
  double d0_max = 0.05;
  int norm_every = 3;

  int nx = 65, ny = 65;
};

inline json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open file: " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ScenarioError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

inline Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  detail::check_keys(j,
                     {"name", "domain", "traces", "d0_scale", "fluid", "norms",
                      "solver", "grid"},
                     "scenario");
  Scenario sc;
  if (j.contains("name")) sc.name = j.at("name").get<std::string>();
  if (!j.contains("domain")) throw ScenarioError("scenario: domain is required");
  if (j.at("domain").is_string()) {
    sc.domain_ref = j.at("domain").get<std::string>();
    sc.domain_spec = parse_domain_spec(load_json_file(base_dir / sc.domain_ref));
  } else {
    sc.domain_spec = parse_domain_spec(j.at("domain"));
  }

  auto parse_expr = [&](const json& node, const char* what) {
    try {
      return expr::Expression(node.get<std::string>());
    } catch (const expr::ParseError& e) {
      throw ScenarioError(std::string("trace '") + what + "': " + e.what());
    }
  };
  if (j.contains("traces")) {
    const auto& t = j.at("traces");
    detail::check_keys(t, {"delta_b", "delta_d", "f", "rho_in"}, "traces");
    if (t.contains("delta_b")) sc.delta_b = parse_expr(t.at("delta_b"), "delta_b");
    if (t.contains("delta_d")) sc.delta_d = parse_expr(t.at("delta_d"), "delta_d");
    if (t.contains("f")) sc.friction = parse_expr(t.at("f"), "f");
    if (t.contains("rho_in")) sc.rho_in = parse_expr(t.at("rho_in"), "rho_in");
  }
  if (j.contains("d0_scale")) sc.d0_scale = detail::num(j.at("d0_scale"), "d0_scale");

  if (j.contains("fluid")) {
    const auto& f = j.at("fluid");
    detail::check_keys(f, {"mu", "nu", "kappa"}, "fluid");
    if (f.contains("mu")) sc.fluid.mu = detail::num(f.at("mu"), "fluid.mu");
    if (f.contains("nu")) sc.fluid.nu = detail::num(f.at("nu"), "fluid.nu");
    if (f.contains("kappa")) sc.pressure.kappa = detail::num(f.at("kappa"), "fluid.kappa");
    sc.fluid.gamma = sc.pressure.gamma();
  }
  if (j.contains("norms")) {
    const auto& n = j.at("norms");
    detail::check_keys(n, {"s", "p", "epsilon"}, "norms");
    if (n.contains("s")) sc.norms.s = detail::num(n.at("s"), "norms.s");
    if (n.contains("p")) sc.norms.p = detail::num(n.at("p"), "norms.p");
    if (n.contains("epsilon")) sc.norms.epsilon = detail::num(n.at("epsilon"), "norms.epsilon");
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    detail::check_keys(s, {"tol", "max_iter", "theta", "d0_max", "norm_every"}, "solver");
    if (s.contains("tol")) sc.tol = detail::num(s.at("tol"), "solver.tol");
    if (s.contains("max_iter")) sc.max_iter = s.at("max_iter").get<int>();
    if (s.contains("theta")) sc.theta = detail::num(s.at("theta"), "solver.theta");
    if (s.contains("d0_max")) sc.d0_max = detail::num(s.at("d0_max"), "solver.d0_max");
    if (s.contains("norm_every")) sc.norm_every = s.at("norm_every").get<int>();
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    detail::check_keys(g, {"nx", "ny"}, "grid");
    if (g.contains("nx")) sc.nx = g.at("nx").get<int>();
    if (g.contains("ny")) sc.ny = g.at("ny").get<int>();
  }
  if (sc.tol <= 0 || sc.d0_max <= 0) throw ScenarioError("solver tolerances must be positive");
  if (sc.nx < 8 || sc.ny < 8) throw ScenarioError("grid resolution must be >= 8 per direction");
  if (sc.theta <= 0 || sc.theta > 1) throw ScenarioError("theta must lie in (0, 1]");
  return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  return parse_scenario(load_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Boundary data from scenario expressions
// ---------------------------------------------------------------------------

inline fields::BoundaryData build_boundary_data(const fields::Grid& g, const Scenario& sc) {
  using fields::BoundaryNode;
  fields::BoundaryData data;
  auto vars_at = [&](const BoundaryNode& bn) {
    expr::VarMap v;
    v["x1"] = g.x1[bn.k];
    v["x2"] = g.x2[bn.k];
    v["t"] = bn.param;
    v["s"] = bn.arc;
    v["n1"] = bn.n.x1;
    v["n2"] = bn.n.x2;
    v["tau1"] = bn.tau.x1;
    v["tau2"] = bn.tau.x2;
    v["b"] = g.domain.height_b;
    return v;
  };
  for (const auto& part : g.domain.parts()) {
    data.f.push_back(fields::sample_part_trace(
        g, part, [&](const BoundaryNode& bn) { return sc.friction(vars_at(bn)); }));
    data.d.push_back(fields::sample_part_trace(g, part, [&](const BoundaryNode& bn) {
      return bn.n.x1 + sc.d0_scale * sc.delta_d(vars_at(bn));
    }));
    data.b.push_back(fields::sample_part_trace(g, part, [&](const BoundaryNode& bn) {
      return sc.friction(vars_at(bn)) * bn.tau.x1 + sc.d0_scale * sc.delta_b(vars_at(bn));
    }));
  }
  data.rho_in = fields::sample_part_trace(
      g, {geometry::PartRef::Kind::In, 0}, [&](const BoundaryNode& bn) {
        return 1.0 + sc.d0_scale * (sc.rho_in(vars_at(bn)) - 1.0);
      });
  return data;
}

inline picard::PicardConfig picard_config(const Scenario& sc, fields::GridPtr grid) {
  picard::PicardConfig cfg;
  cfg.grid = grid;
  cfg.data = build_boundary_data(*grid, sc);
  cfg.fluid = sc.fluid;
  cfg.pressure = sc.pressure;
  cfg.norms = sc.norms;
  cfg.tol = sc.tol;
  cfg.max_iter = sc.max_iter;
  cfg.theta = sc.theta;
  cfg.d0_max = sc.d0_max;
  cfg.norm_every = sc.norm_every;
  return cfg;
}

}  // namespace inflow::harness
