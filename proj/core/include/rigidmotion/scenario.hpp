#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rigidmotion/control.hpp"
#include "rigidmotion/motion_design.hpp"
#include "rigidmotion/simulation.hpp"

namespace rigidmotion {

/// Desired steady-state motion, expressed in the body frame of the reference.
struct MotionTargets {
  Eigen::VectorXd velocity;          // size m
  Eigen::VectorXd angular_velocity;  // size 1 (2D) or 3 (3D)
  ScalingSchedule schedule;
  bool hold_angular_rate = true;
};

/// Everything one experiment needs. Edges are kept 1-based as in the file.
struct Scenario {
  std::string name;
  int dimension = 2;
  std::vector<std::pair<int, int>> edges;
  Eigen::VectorXd reference_positions;
  std::optional<Eigen::VectorXd> initial_positions;
  double gain = 1.0;
  MotionTargets motion;
  SimConfig sim;

  int agent_count() const { return static_cast<int>(reference_positions.size()) / dimension; }
  SensingGraph graph() const;
  Framework reference_framework() const;
  /// Throws RigidityError when the reference is not minimally rigid.
  ReferenceShape reference_shape() const;
  /// Initial positions before perturbation (the reference when none given).
  Framework initial_framework() const;
};

struct ParseOptions {
  /// Reject references that are not minimally rigid (RigidityError).
  bool require_rigid = true;
};

/// Parses and validates a scenario document. Throws SchemaError (with a line
/// number where one can be located), RigidityError or PositivityError.
Scenario parse_scenario(std::string_view text, ParseOptions options = {});
Scenario load_scenario(const std::string& path, ParseOptions options = {});
std::string serialize_scenario(const Scenario& scenario);

/// Output of the design stage: spaces, calibrated parameter parts and their
/// residuals.
struct DesignResult {
  MotionSpaces spaces;
  SpaceResiduals space_residuals;
  MotionParameters params;
  double translation_residual = 0.0;
  double rotation_residual = 0.0;
  double scaling_residual = 0.0;
};

/// Builds the spaces and calibrates translation and rotation for the targets
/// and the scaling part for a unit scaling rate.
DesignResult design_motion(const ReferenceShape& ref, const MotionTargets& targets);

/// Parameter file written by `design` and read back by `simulate`.
std::string serialize_design(const ReferenceShape& ref, const MotionTargets& targets,
                             const DesignResult& design);
/// Reads the calibrated parts; throws SchemaError on a size mismatch with `ref`.
MotionParameters parse_design(std::string_view text, const ReferenceShape& ref);

ControllerConfig controller_config(const Scenario& scenario, const MotionParameters& params);

/// Header: t, p_1x, p_1y[, p_1z], ..., e_1..e_|E|, V, d_1..d_|E|.
std::string trajectory_csv_header(const Trajectory& traj);
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

std::string serialize_rigidity_report(const RigidityReport& report, int agent_count,
                                      int edge_count, int dimension);
std::string serialize_steady_state(const SteadyStateReport& report);

}  // namespace rigidmotion
