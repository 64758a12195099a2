#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "rigidmotion/control.hpp"
#include "rigidmotion/graph.hpp"
#include "rigidmotion/motion_design.hpp"

namespace rigidmotion {

enum class Integrator { kRk4, kEuler };

/// Initial-condition noise: each agent is displaced uniformly inside a ball
/// of radius `magnitude`.
struct Perturbation {
  std::uint64_t seed = 0;
  double magnitude = 0.0;

  friend bool operator==(const Perturbation&, const Perturbation&) = default;
};

struct SimConfig {
  double dt = 1e-3;
  double duration = 20.0;
  Integrator integrator = Integrator::kRk4;
  int record_stride = 1;
  std::optional<Perturbation> perturbation;

  /// Number of integration steps, floor(duration / dt).
  long step_count() const;
  /// Number of recorded samples, floor(steps / stride) + 1.
  long sample_count() const;
  /// Throws ValidationError unless dt > 0, duration >= dt and stride >= 1.
  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

/// Recorded samples, uniformly spaced by dt * record_stride.
struct Trajectory {
  int dimension = 2;
  int agent_count = 0;
  int edge_count = 0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> positions;
  std::vector<Eigen::VectorXd> errors;
  std::vector<double> potential;
  std::vector<Eigen::VectorXd> distances;

  std::size_t size() const { return times.size(); }
};

/// Stacked positions displaced per `perturbation`; deterministic in the seed.
Eigen::VectorXd perturb_positions(const Eigen::VectorXd& positions, int dimension,
                                  const Perturbation& perturbation);

/// Integrates p' = u(p, t) from `initial` (after applying the configured
/// perturbation). Controller parameters are sampled at every stage time.
/// Throws EdgeCollapse if some ||z_k|| drops below 1e-9, NonPositiveDistance
/// if the schedule does, NumericalError if the state stops being finite.
Trajectory integrate(const Framework& initial, const ReferenceShape& ref,
                     const ControllerConfig& cfg, const SimConfig& sim);

Eigen::VectorXd centroid(const Eigen::VectorXd& positions, int dimension);

/// Proper rotation R minimising sum_i ||q_i - R r_i||^2 for centred point
/// sets q (current) and r (reference). Throws DegenerateAlignment when the
/// cross-covariance has rank below m - 1.
Eigen::MatrixXd procrustes_rotation(const Eigen::VectorXd& current_centered,
                                    const Eigen::VectorXd& reference_centered, int dimension);

struct BodyFrameTrajectory {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> rotations;  // body axes expressed in the global frame
  std::vector<Eigen::VectorXd> centroids;
  std::vector<Eigen::VectorXd> positions;  // R^T (p_i - p_c)
};

BodyFrameTrajectory body_frame_transform(const Trajectory& traj, const ReferenceShape& ref);

/// Central-difference agent velocities at `sample` (one-sided at the ends),
/// expressed in the body axes of that sample.
Eigen::VectorXd body_velocities(const Trajectory& traj, const BodyFrameTrajectory& body,
                                std::size_t sample);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs at least 2 points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct DecayFit {
  double rate = 0.0;  // -d/dt log||e||
  double r_squared = 0.0;
  double decades = 0.0;
  double t_begin = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
};

/// Fits log||e(t)|| on the first contiguous stretch where
/// 1e-8 <= ||e|| <= 0.5 ||e(0)||. Returns nullopt when ||e(0)|| < 1e-8 and
/// throws InsufficientDecay when no such stretch with at least 3 samples and
/// negative slope exists.
std::optional<DecayFit> fit_decay(const Trajectory& traj);

struct TimeWindow {
  double begin = 0.0;
  double end = 0.0;
};

struct SteadyStateReport {
  Eigen::VectorXd centroid_velocity;  // body frame
  double centroid_velocity_residual = 0.0;
  Eigen::VectorXd angular_velocity;   // size 1 in 2D, 3 in 3D
  double angular_velocity_residual = 0.0;
  double scaling_rate = 0.0;          // slope of mean_k ||z_k|| / d*_k
  double scaling_rate_residual = 0.0;
  std::optional<DecayFit> decay;
  TimeWindow window;
};

SteadyStateReport steady_state_report(const Trajectory& traj, const ReferenceShape& ref,
                                      TimeWindow window);

}  // namespace rigidmotion
