#pragma once

#include <Eigen/Dense>

#include "rigidmotion/graph.hpp"
#include "rigidmotion/motion_design.hpp"

namespace rigidmotion {

/// Scaling signal s(t) with d_k(t) = (1 + s(t)) d*_k and s(0) = 0.
class ScalingSchedule {
 public:
  enum class Kind { kNone, kLinear, kPeriodic };

  static ScalingSchedule none() { return {}; }
  /// s(t) = rate * t.
  static ScalingSchedule linear(double rate);
  /// s(t) = 2 h sin(omega t).
  static ScalingSchedule periodic(double h, double omega);

  Kind kind() const { return kind_; }
  double rate() const { return rate_; }
  double h() const { return h_; }
  double omega() const { return omega_; }

  double value(double t) const;
  double derivative(double t) const;

  /// Minimum of 1 + s(t) over [0, horizon].
  double min_scale(double horizon) const;

  /// Throws PositivityError if 1 + s(t) <= 0 somewhere on [0, horizon].
  void validate(double horizon) const;

  friend bool operator==(const ScalingSchedule&, const ScalingSchedule&) = default;

 private:
  Kind kind_ = Kind::kNone;
  double rate_ = 0.0;
  double h_ = 0.0;
  double omega_ = 0.0;
};

/// Calibrated parameter parts. The scaling part is calibrated for a unit
/// scaling rate and gets multiplied by ds/dt at run time.
struct MotionParameters {
  ParameterVector translation;
  ParameterVector rotation;
  ParameterVector scaling;

  static MotionParameters zero(int edge_count) {
    return {ParameterVector::zero(edge_count), ParameterVector::zero(edge_count),
            ParameterVector::zero(edge_count)};
  }
};

struct ControllerConfig {
  double gain = 1.0;
  MotionParameters params;
  ScalingSchedule schedule;
  /// Multiply the rotation part by 1 + s(t) so the angular speed stays
  /// constant while the formation grows or shrinks. With this off the
  /// induced linear speeds are constant and the angular speed is w / (1 + s).
  bool hold_angular_rate = true;

  /// Throws ValidationError for a non-positive gain.
  void validate() const;
};

struct ScheduledDistances {
  Eigen::VectorXd distances;
  Eigen::VectorXd rates;
};

/// d(t) = (1 + s(t)) d* and its time derivative. Throws NonPositiveDistance.
ScheduledDistances scheduled_distances(const ReferenceShape& ref,
                                       const ScalingSchedule& schedule, double t);

/// translation + g(t) rotation + ds/dt scaling, g = 1 + s(t) when holding the
/// angular rate and 1 otherwise.
ParameterVector time_varying_params(const ControllerConfig& cfg, double t);

/// e_k = ||z_k|| - d_k.
Eigen::VectorXd distance_errors(const Framework& fw, const Eigen::VectorXd& distances);

/// V = 1/2 sum_k (||z_k|| - d_k)^2.
double potential(const Framework& fw, const Eigen::VectorXd& distances);

/// u = -c B̄ D_ẑ e + Ā(mu, mu_tilde) ẑ, evaluated edge by edge so that each
/// agent block only reads its incident edges. Throws ZeroEdge.
Eigen::VectorXd control_law(const Framework& fw, const Eigen::VectorXd& distances,
                            const ParameterVector& pv, double gain);

/// Same law on raw stacked positions, for hot loops that do not want to
/// build a Framework per evaluation.
Eigen::VectorXd control_law(const SensingGraph& graph, int dimension,
                            const Eigen::VectorXd& positions, const Eigen::VectorXd& distances,
                            const ParameterVector& pv, double gain);

/// Q = D_ẑ^T B̄^T B̄ D_ẑ.
Eigen::MatrixXd stiffness_matrix(const Framework& fw);

/// ė = -c Q e + D_ẑ^T B̄^T Ā ẑ - ḋ, assembled from dense matrices.
Eigen::VectorXd error_dynamics_rhs(const Eigen::VectorXd& errors, const Framework& fw,
                                   const ParameterVector& pv,
                                   const Eigen::VectorXd& distance_rates, double gain);

/// Designed body-frame agent velocities at time t: T(ẑ*) times the
/// time-varying parameters.
Eigen::VectorXd designed_velocities(const ReferenceShape& ref, const ControllerConfig& cfg,
                                    double t);

}  // namespace rigidmotion
