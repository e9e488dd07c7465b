#pragma once

// Boundary trace containers shared by the norm, transport and solver layers.
// Traces live on one boundary part each and are sampled at the grid's
// boundary nodes (param is x2 on the graphs, x1 on horizontal segments).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "inflow/geometry.hpp"

namespace inflow::fields {

struct TraceSamples {
  std::vector<double> param;  // graph parameter of each sample
  std::vector<double> arc;    // arclength along the part
  std::vector<double> value;

  std::size_t size() const { return value.size(); }

  /// Trapezoid quadrature weight of sample i.
  double weight(std::size_t i) const {
    if (arc.size() < 2) return 0.0;
    const double left = i == 0 ? 0.0 : 0.5 * (arc[i] - arc[i - 1]);
    const double right = i + 1 == arc.size() ? 0.0 : 0.5 * (arc[i + 1] - arc[i]);
    return left + right;
  }

  /// Linear interpolation in the part parameter.
  double interp_param(double t) const {
    if (value.empty()) throw std::runtime_error("empty trace");
    if (value.size() == 1) return value[0];
    const auto it = std::upper_bound(param.begin(), param.end(), t);
    std::size_t hi = std::clamp<std::size_t>(it - param.begin(), 1, param.size() - 1);
    const std::size_t lo = hi - 1;
    const double h = param[hi] - param[lo];
    if (h <= 0) return value[lo];
    const double a = std::clamp((t - param[lo]) / h, 0.0, 1.0);
    return (1 - a) * value[lo] + a * value[hi];
  }
};

struct PartTrace {
  geometry::PartRef part;
  TraceSamples samples;
};

inline const PartTrace& find_part(const std::vector<PartTrace>& traces,
                                  const geometry::PartRef& part, const char* what) {
  for (const auto& t : traces)
    if (t.part == part) return t;
  throw std::runtime_error(std::string("missing trace '") + what + "' on a boundary part");
}

/// Boundary data (b, d, f, rho_in) of a scenario, with the derived
/// perturbation traces.
struct BoundaryData {
  std::vector<PartTrace> b;  // tangential stress data on Gamma
  std::vector<PartTrace> d;  // normal velocity data on Gamma
  std::vector<PartTrace> f;  // friction trace on Gamma
  PartTrace rho_in;          // density on Gamma_in

  TraceSamples w_in() const {
    TraceSamples w = rho_in.samples;
    for (auto& v : w.value) v -= 1.0;
    return w;
  }
};

}  // namespace inflow::fields
