// Command line front end: analyze, design, simulate and verify scenarios.
//
// Exit codes: 0 success, 1 validation error, 2 numerical failure.
// Log verbosity: RIGIDMOTION_LOG_LEVEL=trace|debug|info|warn|error|off.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "rigidmotion/errors.hpp"
#include "rigidmotion/graph.hpp"
#include "rigidmotion/scenario.hpp"
#include "rigidmotion/simulation.hpp"
#include "rigidmotion/verification.hpp"

namespace rm = rigidmotion;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kNumerical = 2;

struct Overrides {
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
};

rm::Scenario load(const std::string& path, const Overrides& ov, bool require_rigid = true) {
  rm::Scenario sc = rm::load_scenario(path, {.require_rigid = require_rigid});
  if (ov.dt) sc.sim.dt = *ov.dt;
  if (ov.duration) sc.sim.duration = *ov.duration;
  if (ov.seed) {
    if (!sc.sim.perturbation) {
      spdlog::warn("--seed has no effect: scenario defines no perturbation magnitude");
      sc.sim.perturbation = rm::Perturbation{};
    }
    sc.sim.perturbation->seed = *ov.seed;
  }
  sc.sim.validate();
  sc.motion.schedule.validate(sc.sim.duration);
  spdlog::debug("loaded scenario '{}' with {} agents, {} edges, m = {}", sc.name, sc.agent_count(),
                sc.edges.size(), sc.dimension);
  return sc;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rm::SchemaError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw rm::SchemaError("cannot write " + path);
  out << text;
}

int cmd_analyze(const std::string& scenario, const std::string& output, const Overrides& ov) {
  const rm::Scenario sc = load(scenario, ov, /*require_rigid=*/false);
  const rm::Framework fw = sc.reference_framework();
  const rm::RigidityReport report = rm::rigidity_report(fw);
  const std::string text =
      rm::serialize_rigidity_report(report, fw.agent_count(), fw.edge_count(), fw.dimension());
  std::cout << text;
  if (!output.empty()) write_file(output, text);
  return kOk;
}

int cmd_design(const std::string& scenario, const std::string& output, const Overrides& ov) {
  const rm::Scenario sc = load(scenario, ov);
  const rm::ReferenceShape ref = sc.reference_shape();
  const rm::DesignResult design = rm::design_motion(ref, sc.motion);
  const std::string text = rm::serialize_design(ref, sc.motion, design);
  if (output.empty()) {
    std::cout << text;
  } else {
    write_file(output, text);
    std::cout << "dim U/W/S = " << design.spaces.translation.cols() << "/"
              << design.spaces.rotation.cols() << "/" << design.spaces.scaling.cols()
              << ", parameters written to " << output << "\n";
  }
  return kOk;
}

int cmd_simulate(const std::string& scenario, const std::string& params_path,
                 std::string prefix, const Overrides& ov) {
  const rm::Scenario sc = load(scenario, ov);
  const rm::ReferenceShape ref = sc.reference_shape();
  rm::MotionParameters params;
  if (params_path.empty()) {
    params = rm::design_motion(ref, sc.motion).params;
  } else {
    params = rm::parse_design(read_file(params_path), ref);
  }
  if (prefix.empty()) prefix = std::filesystem::path(scenario).stem().string();

  spdlog::info("integrating {} steps (dt = {}, stride = {})", sc.sim.step_count(), sc.sim.dt,
               sc.sim.record_stride);
  const rm::Trajectory traj =
      rm::integrate(sc.initial_framework(), ref, rm::controller_config(sc, params), sc.sim);
  {
    std::ofstream csv(prefix + ".csv");
    if (!csv) throw rm::SchemaError("cannot write " + prefix + ".csv");
    rm::write_trajectory_csv(csv, traj);
  }
  const double end = traj.times.back();
  rm::SteadyStateReport report;
  try {
    report = rm::steady_state_report(traj, ref, {0.5 * end, end});
  } catch (const rm::Error&) {
    std::cerr << "note: " << prefix << ".csv was written, the steady-state report was not\n";
    throw;
  }
  const std::string text = rm::serialize_steady_state(report);
  write_file(prefix + ".report.json", text);
  std::cout << text;
  spdlog::info("wrote {}.csv ({} rows) and {}.report.json", prefix, traj.size(), prefix);
  return kOk;
}

int cmd_verify(const std::string& scenario, bool basin, const Overrides& ov) {
  const rm::Scenario sc = load(scenario, ov);
  const auto checks = rm::verify_scenario(sc);
  bool all = true;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    all = all && c.passed;
  }
  if (basin) {
    const rm::BasinEstimate est = rm::estimate_basin_radius(sc);
    const double scale = sc.reference_shape().distances().minCoeff();
    if (est.failed_radius > 0.0) {
      std::cout << fmt::format("[INFO] region of attraction: converged up to radius {:.4g} "
                               "({:.3f} min d*), failed at {:.4g} ({} runs)\n",
                               est.converged_radius, est.converged_radius / scale,
                               est.failed_radius, est.runs);
    } else {
      std::cout << fmt::format("[INFO] region of attraction: converged at every tested radius "
                               "up to {:.4g} ({} runs)\n", est.converged_radius, est.runs);
    }
  }
  std::cout << (all ? "all checks passed" : "some checks failed") << "\n";
  return all ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("rigidmotion"));
  if (const char* level = std::getenv("RIGIDMOTION_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  } else {
    spdlog::set_level(spdlog::level::warn);
  }

  CLI::App app{"Design and simulate motion/scaling parameters for rigid formations"};
  app.require_subcommand(1);

  Overrides ov;
  std::optional<double> dt;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  app.add_option("--dt", dt, "Override the integration step")->check(CLI::PositiveNumber);
  app.add_option("--duration", duration, "Override the simulated horizon")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Override the perturbation seed");

  std::string scenario;
  std::string output;
  std::string params;
  std::string prefix;

  auto* analyze = app.add_subcommand("analyze", "Rigidity and bearing-rigidity report");
  analyze->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  analyze->add_option("-o,--output", output, "Also write the report here");

  auto* design = app.add_subcommand("design", "Compute motion spaces and calibrated parameters");
  design->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  design->add_option("-o,--output", output, "Parameter file (default: standard output)");

  auto* simulate = app.add_subcommand("simulate", "Integrate the formation and write CSV + report");
  simulate->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--params", params, "Parameter file from `design`")->check(CLI::ExistingFile);
  simulate->add_option("-o,--output", prefix, "Output prefix (default: scenario stem)");

  auto* verify = app.add_subcommand("verify", "Run the convergence and motion checks");
  verify->add_option("scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  bool basin = false;
  verify->add_flag("--basin", basin, "Also estimate the region of attraction by bisection");

  for (auto* sub : {analyze, design, simulate, verify}) {
    sub->add_option("--dt", dt, "Override the integration step")->check(CLI::PositiveNumber);
    sub->add_option("--duration", duration, "Override the simulated horizon")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Override the perturbation seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  ov = {dt, duration, seed};

  try {
    if (*analyze) return cmd_analyze(scenario, output, ov);
    if (*design) return cmd_design(scenario, output, ov);
    if (*simulate) return cmd_simulate(scenario, params, prefix, ov);
    if (*verify) return cmd_verify(scenario, basin, ov);
  } catch (const rm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const rm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
