// Command-line front end: scenario runs, verification suites and parameter
// sweeps. See the repository README for the scenario schema.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "inflow/harness.hpp"

namespace {

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos < list.size()) {
    std::size_t next = list.find(',', pos);
    if (next == std::string::npos) next = list.size();
    out.push_back(std::stod(list.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D stationary compressible flow with inflow: solver and estimate verifier"};
  inflow::harness::RunConfig cfg;
  std::string mode = "solve";
  std::string sweep_spec;

  app.add_option("--scenario", cfg.scenario_path, "scenario file (JSON)")->required();
  app.add_option("--mode", mode,
                 "solve | verify-estimates | norms-only | geometry-check");
  app.add_option("--nx", cfg.nx, "grid override, nodes in the xi direction");
  app.add_option("--ny", cfg.ny, "grid override, nodes in the eta direction");
  app.add_option("--out", cfg.out_dir, "output directory (default: out)");
  app.add_flag("--deterministic", cfg.deterministic,
               "omit wall-clock fields; reports become byte-reproducible");
  app.add_option("--sweep", sweep_spec, "parameter sweep, e.g. grid=33,65,129");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.mode = inflow::harness::mode_from_string(mode);
    if (!sweep_spec.empty()) {
      const auto eq = sweep_spec.find('=');
      if (eq == std::string::npos)
        throw inflow::harness::ScenarioError("--sweep expects name=v1,v2,...");
      cfg.sweep_name = sweep_spec.substr(0, eq);
      cfg.sweep_values = parse_values(sweep_spec.substr(eq + 1));
      if (cfg.sweep_values.empty())
        throw inflow::harness::ScenarioError("--sweep needs at least one value");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return inflow::harness::kExitParse;
  }

  int code;
  if (!cfg.sweep_name.empty()) {
    code = inflow::harness::sweep(cfg);
    std::printf("sweep '%s' finished, table written under %s (exit %d)\n",
                cfg.sweep_name.c_str(), cfg.out_dir.c_str(), code);
    return code;
  }

  code = inflow::harness::run(cfg);
  const auto report_path = cfg.out_dir + "/report.json";
  try {
    const auto rep = inflow::harness::load_json_file(report_path);
    if (rep.contains("error")) {
      std::fprintf(stderr, "error: %s\n", rep["error"].get<std::string>().c_str());
    } else {
      if (rep.contains("iteration"))
        std::printf("picard: %s, D0 = %.6g, ||perturbation|| = %.6g\n",
                    rep["iteration"]["status"].get<std::string>().c_str(),
                    rep["iteration"]["d0"].get<double>(),
                    rep["iteration"]["est_main_lhs"].get<double>());
      if (rep.contains("estimates"))
        for (const auto& e : rep["estimates"])
          std::printf("  %-26s lhs=%-12.6g rhs=%-12.6g C=%-10.6g%s%s\n",
                      e["name"].get<std::string>().c_str(), e["lhs"].get<double>(),
                      e["rhs"].get<double>(), e["constant"].get<double>(),
                      e["trivial"].get<bool>() ? " [trivial]" : "",
                      e["admissible"].get<bool>() ? "" : " [inadmissible]");
    }
  } catch (const std::exception&) {
    // report unreadable; the exit code already says what happened
  }
  std::printf("report: %s (exit %d)\n", report_path.c_str(), code);
  return code;
}
