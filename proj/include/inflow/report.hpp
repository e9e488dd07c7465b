#pragma once

// Measured-inequality reports: both sides of an estimate, the implied
// constant, and admissibility/triviality flags. JSON serialization lives in
// the harness.

#include <map>
#include <string>

namespace inflow {

struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double constant = 0.0;  // lhs / rhs when rhs > 0
  bool trivial = false;   // both sides vanish
  bool admissible = true; // hypothesis check (e.g. s < delta)
  std::map<std::string, double> extra;

  static EstimateReport make(std::string name, double lhs, double rhs) {
    EstimateReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    if (rhs > 0.0) {
      r.constant = lhs / rhs;
    } else {
      r.trivial = (lhs == 0.0);
      r.constant = 0.0;
    }
    return r;
  }
};

}  // namespace inflow
