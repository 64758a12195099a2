#include "rigidmotion/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rigidmotion/errors.hpp"

namespace rigidmotion {

ScalingSchedule ScalingSchedule::linear(double rate) {
  ScalingSchedule s;
  s.kind_ = Kind::kLinear;
  s.rate_ = rate;
  return s;
}

ScalingSchedule ScalingSchedule::periodic(double h, double omega) {
  ScalingSchedule s;
  s.kind_ = Kind::kPeriodic;
  s.h_ = h;
  s.omega_ = omega;
  return s;
}

double ScalingSchedule::value(double t) const {
  switch (kind_) {
    case Kind::kNone: return 0.0;
    case Kind::kLinear: return rate_ * t;
    case Kind::kPeriodic: return 2.0 * h_ * std::sin(omega_ * t);
  }
  return 0.0;
}

double ScalingSchedule::derivative(double t) const {
  switch (kind_) {
    case Kind::kNone: return 0.0;
    case Kind::kLinear: return rate_;
    case Kind::kPeriodic: return 2.0 * h_ * omega_ * std::cos(omega_ * t);
  }
  return 0.0;
}

double ScalingSchedule::min_scale(double horizon) const {
  double lowest = std::min(1.0 + value(0.0), 1.0 + value(horizon));
  if (kind_ == Kind::kPeriodic && omega_ != 0.0 && h_ != 0.0) {
    // Extremes of sin sit at pi/2 + j pi.
    const double phase_end = std::abs(omega_) * horizon;
    for (double phase = std::numbers::pi / 2; phase <= phase_end; phase += std::numbers::pi) {
      lowest = std::min(lowest, 1.0 + value(phase / std::abs(omega_)));
    }
  }
  return lowest;
}

void ScalingSchedule::validate(double horizon) const {
  const double lowest = min_scale(horizon);
  if (!(lowest > 0.0)) {
    throw PositivityError("scheduled distances reach " + std::to_string(lowest) +
                          " * d* within the horizon " + std::to_string(horizon) +
                          "; 1 + s(t) must stay positive");
  }
}

void ControllerConfig::validate() const {
  if (!(gain > 0.0)) throw ValidationError("gain must be positive, got " + std::to_string(gain));
}

ScheduledDistances scheduled_distances(const ReferenceShape& ref,
                                       const ScalingSchedule& schedule, double t) {
  const double scale = 1.0 + schedule.value(t);
  if (!(scale > 0.0)) {
    throw NonPositiveDistance("scheduled distances are non-positive at t = " + std::to_string(t));
  }
  return {scale * ref.distances(), schedule.derivative(t) * ref.distances()};
}

ParameterVector time_varying_params(const ControllerConfig& cfg, double t) {
  const double rotation_gain = cfg.hold_angular_rate ? 1.0 + cfg.schedule.value(t) : 1.0;
  return cfg.params.translation + rotation_gain * cfg.params.rotation +
         cfg.schedule.derivative(t) * cfg.params.scaling;
}

Eigen::VectorXd distance_errors(const Framework& fw, const Eigen::VectorXd& distances) {
  return edge_lengths(fw) - distances;
}

double potential(const Framework& fw, const Eigen::VectorXd& distances) {
  return 0.5 * distance_errors(fw, distances).squaredNorm();
}

Eigen::VectorXd control_law(const Framework& fw, const Eigen::VectorXd& distances,
                            const ParameterVector& pv, double gain) {
  return control_law(fw.graph(), fw.dimension(), fw.positions(), distances, pv, gain);
}

Eigen::VectorXd control_law(const SensingGraph& graph, int dimension,
                            const Eigen::VectorXd& p, const Eigen::VectorXd& distances,
                            const ParameterVector& pv, double gain) {
  const int m = dimension;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(p.size());
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edge(k);
    const Eigen::VectorXd z = p.segment(e.tail * m, m) - p.segment(e.head * m, m);
    const double len = z.norm();
    if (len == 0.0) throw ZeroEdge("edge " + std::to_string(k + 1) + " has zero length");
    const Eigen::VectorXd bearing = z / len;
    const double err = len - distances(k);
    u.segment(e.tail * m, m) += (pv.mu(k) - gain * err) * bearing;
    u.segment(e.head * m, m) += (pv.mu_tilde(k) + gain * err) * bearing;
  }
  return u;
}

Eigen::MatrixXd stiffness_matrix(const Framework& fw) {
  const Eigen::MatrixXd rate = distance_rate_matrix(bearing_function(fw), fw.graph(), fw.dimension());
  return rate * rate.transpose();
}

Eigen::VectorXd error_dynamics_rhs(const Eigen::VectorXd& errors, const Framework& fw,
                                   const ParameterVector& pv,
                                   const Eigen::VectorXd& distance_rates, double gain) {
  const int m = fw.dimension();
  const Eigen::VectorXd bearings = bearing_function(fw);
  const Eigen::MatrixXd rate = distance_rate_matrix(bearings, fw.graph(), m);  // D_ẑ^T B̄^T
  const Eigen::MatrixXd a_bar = kron_identity(build_A(pv, fw.graph()), m);
  return -gain * (rate * (rate.transpose() * errors)) + rate * (a_bar * bearings) - distance_rates;
}

Eigen::VectorXd designed_velocities(const ReferenceShape& ref, const ControllerConfig& cfg,
                                    double t) {
  return induced_velocities(ref, time_varying_params(cfg, t));
}

}  // namespace rigidmotion
