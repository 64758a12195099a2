#include "rigidmotion/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "rigidmotion/errors.hpp"

namespace rigidmotion {
namespace {

using nlohmann::json;

/// Best-effort line lookup for a JSON pointer inside the raw document.
int locate_line(std::string_view text, const std::vector<std::string>& path) {
  std::size_t pos = 0;
  bool found_any = false;
  for (const std::string& segment : path) {
    const bool is_index = !segment.empty() &&
                          std::all_of(segment.begin(), segment.end(), ::isdigit);
    if (is_index) {
      // Arrays of arrays: step to the (index+1)-th nested '[' after the outer one.
      std::size_t outer = text.find('[', pos);
      if (outer == std::string_view::npos) break;
      std::size_t cursor = outer;
      const int index = std::stoi(segment);
      for (int i = 0; i <= index; ++i) {
        const std::size_t next = text.find('[', cursor + 1);
        if (next == std::string_view::npos) break;
        cursor = next;
      }
      pos = cursor;
    } else {
      const std::size_t at = text.find("\"" + segment + "\"", pos);
      if (at == std::string_view::npos) break;
      pos = at;
      found_any = true;
    }
  }
  if (!found_any) return 0;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string pointer;
    for (const auto& s : path) pointer += "/" + s;
    const int line = locate_line(text_, path);
    if (line > 0) throw SchemaError(fmt::format("line {}: {}: {}", line, pointer, msg));
    throw SchemaError(fmt::format("{}: {}", pointer.empty() ? "/" : pointer, msg));
  }

  double number(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  long integer(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long>();
  }

  Eigen::VectorXd vector(const json& j, const std::vector<std::string>& path, long size) const {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (size >= 0 && static_cast<long>(j.size()) != size) {
      fail(path, fmt::format("expected {} entries, got {}", size, j.size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto sub = path;
      sub.push_back(std::to_string(i));
      out(static_cast<Eigen::Index>(i)) = number(j[i], sub);
    }
    return out;
  }

  Eigen::VectorXd points(const json& j, const std::vector<std::string>& path, int dimension,
                         long count) const {
    if (!j.is_array()) fail(path, "expected an array of points");
    if (count >= 0 && static_cast<long>(j.size()) != count) {
      fail(path, fmt::format("expected {} points, got {}", count, j.size()));
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(j.size()) * dimension);
    for (std::size_t i = 0; i < j.size(); ++i) {
      auto sub = path;
      sub.push_back(std::to_string(i));
      out.segment(static_cast<Eigen::Index>(i) * dimension, dimension) = vector(j[i], sub, dimension);
    }
    return out;
  }

  void only_keys(const json& j, const std::vector<std::string>& path,
                 std::initializer_list<const char*> allowed) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        auto sub = path;
        sub.push_back(key);
        fail(sub, "unknown key");
      }
    }
  }

 private:
  std::string_view text_;
};

ScalingSchedule parse_schedule(const Reader& r, const json& j) {
  const std::vector<std::string> path{"motion", "schedule"};
  r.only_keys(j, path, {"kind", "rate", "h", "omega"});
  if (!j.contains("kind") || !j["kind"].is_string()) r.fail(path, "missing string 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  auto field = [&](const char* key) {
    if (!j.contains(key)) r.fail(path, fmt::format("'{}' schedule needs '{}'", kind, key));
    return r.number(j[key], {"motion", "schedule", key});
  };
  if (kind == "none") return ScalingSchedule::none();
  if (kind == "linear") return ScalingSchedule::linear(field("rate"));
  if (kind == "periodic") return ScalingSchedule::periodic(field("h"), field("omega"));
  r.fail({"motion", "schedule", "kind"}, "expected one of none, linear, periodic");
}

json schedule_json(const ScalingSchedule& s) {
  switch (s.kind()) {
    case ScalingSchedule::Kind::kNone: return {{"kind", "none"}};
    case ScalingSchedule::Kind::kLinear: return {{"kind", "linear"}, {"rate", s.rate()}};
    case ScalingSchedule::Kind::kPeriodic:
      return {{"kind", "periodic"}, {"h", s.h()}, {"omega", s.omega()}};
  }
  return {};
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

json points_json(const Eigen::VectorXd& v, int dimension) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size() / dimension; ++i) {
    out.push_back(vector_json(v.segment(i * dimension, dimension)));
  }
  return out;
}

json params_json(const ParameterVector& p) {
  return {{"mu", vector_json(p.mu)}, {"mu_tilde", vector_json(p.mu_tilde)}};
}

}  // namespace

SensingGraph Scenario::graph() const {
  return SensingGraph::from_one_based(agent_count(), edges);
}

Framework Scenario::reference_framework() const {
  return Framework(graph(), dimension, reference_positions);
}

ReferenceShape Scenario::reference_shape() const { return ReferenceShape(reference_framework()); }

Framework Scenario::initial_framework() const {
  return Framework(graph(), dimension, initial_positions.value_or(reference_positions));
}

Scenario parse_scenario(std::string_view text, ParseOptions options) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(e.what());
  }
  const Reader r(text);
  r.only_keys(root, {}, {"name", "dimension", "edges", "reference_positions",
                         "initial_positions", "gain", "motion", "simulation"});

  Scenario s;
  if (root.contains("name")) {
    if (!root["name"].is_string()) r.fail({"name"}, "expected a string");
    s.name = root["name"].get<std::string>();
  }
  if (!root.contains("dimension")) r.fail({"dimension"}, "missing");
  s.dimension = static_cast<int>(r.integer(root["dimension"], {"dimension"}));
  if (s.dimension != 2 && s.dimension != 3) r.fail({"dimension"}, "must be 2 or 3");
  const int m = s.dimension;

  if (!root.contains("reference_positions")) r.fail({"reference_positions"}, "missing");
  s.reference_positions = r.points(root["reference_positions"], {"reference_positions"}, m, -1);
  const int n = s.agent_count();
  if (n < 2) r.fail({"reference_positions"}, "need at least 2 agents");

  if (!root.contains("edges") || !root["edges"].is_array()) r.fail({"edges"}, "expected an array of [tail, head] pairs");
  for (std::size_t k = 0; k < root["edges"].size(); ++k) {
    const std::vector<std::string> path{"edges", std::to_string(k)};
    const json& e = root["edges"][k];
    if (!e.is_array() || e.size() != 2) r.fail(path, "expected [tail, head]");
    const long tail = r.integer(e[0], path);
    const long head = r.integer(e[1], path);
    if (tail < 1 || tail > n || head < 1 || head > n) {
      r.fail(path, fmt::format("vertex ids must lie in 1..{}", n));
    }
    s.edges.emplace_back(static_cast<int>(tail), static_cast<int>(head));
  }
  try {
    (void)s.graph();
  } catch (const InvalidGraph& e) {
    r.fail({"edges"}, e.what());
  }

  if (root.contains("initial_positions")) {
    s.initial_positions = r.points(root["initial_positions"], {"initial_positions"}, m, n);
  }

  if (!root.contains("gain")) r.fail({"gain"}, "missing");
  s.gain = r.number(root["gain"], {"gain"});
  if (!(s.gain > 0.0)) r.fail({"gain"}, "must be positive");

  s.motion.velocity = Eigen::VectorXd::Zero(m);
  s.motion.angular_velocity = Eigen::VectorXd::Zero(rotation_dimension(m));
  if (root.contains("motion")) {
    const json& mo = root["motion"];
    r.only_keys(mo, {"motion"}, {"velocity", "angular_velocity", "hold_angular_rate", "schedule"});
    if (mo.contains("velocity")) s.motion.velocity = r.vector(mo["velocity"], {"motion", "velocity"}, m);
    if (mo.contains("angular_velocity")) {
      const json& w = mo["angular_velocity"];
      if (m == 2 && w.is_number()) {
        s.motion.angular_velocity(0) = r.number(w, {"motion", "angular_velocity"});
      } else {
        s.motion.angular_velocity =
            r.vector(w, {"motion", "angular_velocity"}, rotation_dimension(m));
      }
    }
    if (mo.contains("hold_angular_rate")) {
      if (!mo["hold_angular_rate"].is_boolean()) r.fail({"motion", "hold_angular_rate"}, "expected a boolean");
      s.motion.hold_angular_rate = mo["hold_angular_rate"].get<bool>();
    }
    if (mo.contains("schedule")) s.motion.schedule = parse_schedule(r, mo["schedule"]);
  }

  if (root.contains("simulation")) {
    const json& sim = root["simulation"];
    const std::vector<std::string> path{"simulation"};
    r.only_keys(sim, path, {"dt", "duration", "integrator", "record_stride", "perturbation"});
    if (sim.contains("dt")) s.sim.dt = r.number(sim["dt"], {"simulation", "dt"});
    if (sim.contains("duration")) s.sim.duration = r.number(sim["duration"], {"simulation", "duration"});
    if (sim.contains("integrator")) {
      const json& integ = sim["integrator"];
      const std::string name = integ.is_string() ? integ.get<std::string>() : "";
      if (name == "rk4") {
        s.sim.integrator = Integrator::kRk4;
      } else if (name == "euler") {
        s.sim.integrator = Integrator::kEuler;
      } else {
        r.fail({"simulation", "integrator"}, "expected \"rk4\" or \"euler\"");
      }
    }
    if (sim.contains("record_stride")) {
      s.sim.record_stride = static_cast<int>(r.integer(sim["record_stride"], {"simulation", "record_stride"}));
    }
    if (sim.contains("perturbation")) {
      const json& pj = sim["perturbation"];
      const std::vector<std::string> ppath{"simulation", "perturbation"};
      r.only_keys(pj, ppath, {"seed", "magnitude"});
      Perturbation pert;
      if (pj.contains("seed")) {
        const long seed = r.integer(pj["seed"], {"simulation", "perturbation", "seed"});
        if (seed < 0) r.fail({"simulation", "perturbation", "seed"}, "must be non-negative");
        pert.seed = static_cast<std::uint64_t>(seed);
      }
      if (pj.contains("magnitude")) pert.magnitude = r.number(pj["magnitude"], {"simulation", "perturbation", "magnitude"});
      s.sim.perturbation = pert;
    }
    try {
      s.sim.validate();
    } catch (const ValidationError& e) {
      r.fail(path, e.what());
    }
  }

  if (options.require_rigid) (void)s.reference_shape();
  s.motion.schedule.validate(s.sim.duration);
  return s;
}

Scenario load_scenario(const std::string& path, ParseOptions options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str(), options);
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  if (!s.name.empty()) root["name"] = s.name;
  root["dimension"] = s.dimension;
  json edges = json::array();
  for (const auto& [t, h] : s.edges) edges.push_back({t, h});
  root["edges"] = edges;
  root["reference_positions"] = points_json(s.reference_positions, s.dimension);
  if (s.initial_positions) root["initial_positions"] = points_json(*s.initial_positions, s.dimension);
  root["gain"] = s.gain;
  json motion;
  motion["velocity"] = vector_json(s.motion.velocity);
  if (s.dimension == 2) {
    motion["angular_velocity"] = s.motion.angular_velocity(0);
  } else {
    motion["angular_velocity"] = vector_json(s.motion.angular_velocity);
  }
  motion["hold_angular_rate"] = s.motion.hold_angular_rate;
  motion["schedule"] = schedule_json(s.motion.schedule);
  root["motion"] = motion;
  json sim;
  sim["dt"] = s.sim.dt;
  sim["duration"] = s.sim.duration;
  sim["integrator"] = s.sim.integrator == Integrator::kRk4 ? "rk4" : "euler";
  sim["record_stride"] = s.sim.record_stride;
  if (s.sim.perturbation) {
    sim["perturbation"] = {{"seed", s.sim.perturbation->seed},
                           {"magnitude", s.sim.perturbation->magnitude}};
  }
  root["simulation"] = sim;
  return root.dump(2) + "\n";
}

DesignResult design_motion(const ReferenceShape& ref, const MotionTargets& targets) {
  DesignResult out;
  out.spaces = motion_spaces(ref);
  out.space_residuals = space_residuals(ref, out.spaces);
  const Calibration v = params_for_translation(ref, out.spaces, targets.velocity);
  const Calibration w = params_for_rotation(ref, out.spaces, targets.angular_velocity);
  const Calibration s = params_for_scaling(ref, out.spaces, 1.0);
  out.params = {v.params, w.params, s.params};
  out.translation_residual = v.residual;
  out.rotation_residual = w.residual;
  out.scaling_residual = s.residual;
  return out;
}

std::string serialize_design(const ReferenceShape& ref, const MotionTargets& targets,
                             const DesignResult& d) {
  const int m = ref.dimension();
  json root;
  root["dimension"] = m;
  root["edge_count"] = ref.graph().edge_count();
  root["dimensions"] = {{"kernel", d.spaces.kernel.cols()},
                        {"translation", d.spaces.translation.cols()},
                        {"rotation", d.spaces.rotation.cols()},
                        {"scaling", d.spaces.scaling.cols()}};
  root["targets"] = {{"velocity", vector_json(targets.velocity)},
                     {"angular_velocity", vector_json(targets.angular_velocity)},
                     {"scaling_rate", 1.0}};
  root["parameters"] = {{"translation", params_json(d.params.translation)},
                        {"rotation", params_json(d.params.rotation)},
                        {"scaling", params_json(d.params.scaling)}};
  root["induced_velocities"] = {
      {"translation", points_json(induced_velocities(ref, d.params.translation), m)},
      {"rotation", points_json(induced_velocities(ref, d.params.rotation), m)},
      {"scaling", points_json(induced_velocities(ref, d.params.scaling), m)}};
  root["residuals"] = {{"translation", d.translation_residual},
                       {"rotation", d.rotation_residual},
                       {"scaling", d.scaling_residual},
                       {"membership",
                        {{"translation", d.space_residuals.translation},
                         {"rotation", d.space_residuals.rotation},
                         {"scaling", d.space_residuals.scaling},
                         {"orthogonality", d.space_residuals.orthogonality}}}};
  return root.dump(2) + "\n";
}

MotionParameters parse_design(std::string_view text, const ReferenceShape& ref) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(e.what());
  }
  const Reader r(text);
  const long ne = ref.graph().edge_count();
  if (!root.contains("parameters") || !root["parameters"].is_object()) {
    r.fail({"parameters"}, "missing");
  }
  auto part = [&](const char* name) {
    const json& params = root["parameters"];
    if (!params.contains(name)) r.fail({"parameters", name}, "missing");
    const json& p = params[name];
    r.only_keys(p, {"parameters", name}, {"mu", "mu_tilde"});
    if (!p.contains("mu") || !p.contains("mu_tilde")) r.fail({"parameters", name}, "needs mu and mu_tilde");
    return ParameterVector{r.vector(p["mu"], {"parameters", name, "mu"}, ne),
                           r.vector(p["mu_tilde"], {"parameters", name, "mu_tilde"}, ne)};
  };
  return {part("translation"), part("rotation"), part("scaling")};
}

ControllerConfig controller_config(const Scenario& scenario, const MotionParameters& params) {
  ControllerConfig cfg;
  cfg.gain = scenario.gain;
  cfg.params = params;
  cfg.schedule = scenario.motion.schedule;
  cfg.hold_angular_rate = scenario.motion.hold_angular_rate;
  return cfg;
}

std::string trajectory_csv_header(const Trajectory& traj) {
  static constexpr const char* kAxes[] = {"x", "y", "z"};
  std::string header = "t";
  for (int i = 1; i <= traj.agent_count; ++i) {
    for (int d = 0; d < traj.dimension; ++d) header += fmt::format(",p_{}{}", i, kAxes[d]);
  }
  for (int k = 1; k <= traj.edge_count; ++k) header += fmt::format(",e_{}", k);
  header += ",V";
  for (int k = 1; k <= traj.edge_count; ++k) header += fmt::format(",d_{}", k);
  return header;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << trajectory_csv_header(traj) << '\n';
  fmt::memory_buffer row;
  for (std::size_t s = 0; s < traj.size(); ++s) {
    row.clear();
    fmt::format_to(std::back_inserter(row), "{}", traj.times[s]);
    for (double v : traj.positions[s]) fmt::format_to(std::back_inserter(row), ",{}", v);
    for (double v : traj.errors[s]) fmt::format_to(std::back_inserter(row), ",{}", v);
    fmt::format_to(std::back_inserter(row), ",{}", traj.potential[s]);
    for (double v : traj.distances[s]) fmt::format_to(std::back_inserter(row), ",{}", v);
    row.push_back('\n');
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

std::string serialize_rigidity_report(const RigidityReport& report, int agent_count,
                                      int edge_count, int dimension) {
  json root = {{"agents", agent_count},
               {"edges", edge_count},
               {"dimension", dimension},
               {"rigidity_rank", report.rigidity_rank},
               {"expected_rank", report.expected_rank},
               {"infinitesimally_rigid", report.is_infinitesimally_rigid},
               {"minimally_rigid", report.is_minimally_rigid},
               {"bearing_rank", report.bearing_rank},
               {"bearing_kernel_dim", report.bearing_kernel_dim},
               {"bearing_rigid", report.is_bearing_rigid},
               {"congruent_rigid", report.is_congruent_rigid},
               {"tolerance", report.tolerance}};
  return root.dump(2) + "\n";
}

std::string serialize_steady_state(const SteadyStateReport& report) {
  json root;
  root["window"] = {report.window.begin, report.window.end};
  root["centroid_velocity_body"] = vector_json(report.centroid_velocity);
  root["centroid_velocity_residual"] = report.centroid_velocity_residual;
  root["angular_velocity"] = vector_json(report.angular_velocity);
  root["angular_velocity_residual"] = report.angular_velocity_residual;
  root["scaling_rate"] = report.scaling_rate;
  root["scaling_rate_residual"] = report.scaling_rate_residual;
  if (report.decay) {
    root["decay"] = {{"rate", report.decay->rate},
                     {"r_squared", report.decay->r_squared},
                     {"decades", report.decay->decades},
                     {"t_begin", report.decay->t_begin},
                     {"t_end", report.decay->t_end},
                     {"samples", report.decay->samples}};
  } else {
    root["decay"] = nullptr;
  }
  return root.dump(2) + "\n";
}

}  // namespace rigidmotion
