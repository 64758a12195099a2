#include "rigidmotion/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rigidmotion/errors.hpp"
#include "rigidmotion/linalg.hpp"

namespace rigidmotion {
namespace {

constexpr double kCollapseLength = 1e-9;
constexpr double kDecayFloor = 1e-8;

Eigen::VectorXd center(const Eigen::VectorXd& positions, int dimension) {
  const auto n = positions.size() / dimension;
  const Eigen::VectorXd c = centroid(positions, dimension);
  return (positions.reshaped(dimension, n).colwise() - c).reshaped();
}

void check_edges(const SensingGraph& graph, int m, const Eigen::VectorXd& p, double t) {
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edge(k);
    if ((p.segment(e.tail * m, m) - p.segment(e.head * m, m)).norm() < kCollapseLength) {
      throw EdgeCollapse("agents " + std::to_string(e.tail + 1) + " and " +
                         std::to_string(e.head + 1) + " collided at t = " + std::to_string(t));
    }
  }
}

}  // namespace

long SimConfig::step_count() const {
  return static_cast<long>(std::floor(duration / dt + 1e-9));
}

long SimConfig::sample_count() const { return step_count() / record_stride + 1; }

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ValidationError("dt must be positive");
  if (!(duration >= dt)) throw ValidationError("duration must be at least dt");
  if (record_stride < 1) throw ValidationError("record_stride must be >= 1");
  if (perturbation && !(perturbation->magnitude >= 0.0)) {
    throw ValidationError("perturbation magnitude must be non-negative");
  }
}

Eigen::VectorXd perturb_positions(const Eigen::VectorXd& positions, int dimension,
                                  const Perturbation& perturbation) {
  std::mt19937_64 rng(perturbation.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Eigen::VectorXd out = positions;
  const auto n = positions.size() / dimension;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd direction(dimension);
    do {
      for (int d = 0; d < dimension; ++d) direction(d) = normal(rng);
    } while (direction.norm() == 0.0);
    const double radius = perturbation.magnitude * std::pow(uniform(rng), 1.0 / dimension);
    out.segment(i * dimension, dimension) += radius * direction.normalized();
  }
  return out;
}

Trajectory integrate(const Framework& initial, const ReferenceShape& ref,
                     const ControllerConfig& cfg, const SimConfig& sim) {
  sim.validate();
  cfg.validate();
  const SensingGraph& graph = initial.graph();
  const int m = initial.dimension();
  if (graph.edges() != ref.graph().edges() || m != ref.dimension()) {
    throw ValidationError("initial framework and reference shape disagree on graph or dimension");
  }

  Eigen::VectorXd p = initial.positions();
  if (sim.perturbation) p = perturb_positions(p, m, *sim.perturbation);

  auto rhs = [&](double t, const Eigen::VectorXd& state) {
    check_edges(graph, m, state, t);
    const ScheduledDistances d = scheduled_distances(ref, cfg.schedule, t);
    return control_law(graph, m, state, d.distances, time_varying_params(cfg, t), cfg.gain);
  };

  Trajectory traj;
  traj.dimension = m;
  traj.agent_count = initial.agent_count();
  traj.edge_count = initial.edge_count();
  const long steps = sim.step_count();
  const auto samples = static_cast<std::size_t>(sim.sample_count());
  traj.times.reserve(samples);
  traj.positions.reserve(samples);
  traj.errors.reserve(samples);
  traj.potential.reserve(samples);
  traj.distances.reserve(samples);

  auto record = [&](double t) {
    const ScheduledDistances d = scheduled_distances(ref, cfg.schedule, t);
    Eigen::VectorXd e = edge_lengths(initial.with_positions(p)) - d.distances;
    traj.times.push_back(t);
    traj.positions.push_back(p);
    traj.potential.push_back(0.5 * e.squaredNorm());
    traj.errors.push_back(std::move(e));
    traj.distances.push_back(d.distances);
  };

  const double h = sim.dt;
  for (long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * h;
    if (i % sim.record_stride == 0) record(t);
    if (i == steps) break;
    if (sim.integrator == Integrator::kRk4) {
      const Eigen::VectorXd k1 = rhs(t, p);
      const Eigen::VectorXd k2 = rhs(t + 0.5 * h, p + 0.5 * h * k1);
      const Eigen::VectorXd k3 = rhs(t + 0.5 * h, p + 0.5 * h * k2);
      const Eigen::VectorXd k4 = rhs(t + h, p + h * k3);
      p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } else {
      p += h * rhs(t, p);
    }
    if (!p.allFinite()) {
      throw NumericalError("state became non-finite at t = " + std::to_string(t + h));
    }
  }
  return traj;
}

Eigen::VectorXd centroid(const Eigen::VectorXd& positions, int dimension) {
  const auto n = positions.size() / dimension;
  return positions.reshaped(dimension, n).rowwise().mean();
}

Eigen::MatrixXd procrustes_rotation(const Eigen::VectorXd& current_centered,
                                    const Eigen::VectorXd& reference_centered, int dimension) {
  const auto n = current_centered.size() / dimension;
  const Eigen::MatrixXd q = current_centered.reshaped(dimension, n);
  const Eigen::MatrixXd r = reference_centered.reshaped(dimension, n);
  const Eigen::MatrixXd cross = q * r.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (linalg::numerical_rank(cross, 1e-9) < dimension - 1) {
    throw DegenerateAlignment("cross-covariance is rank deficient");
  }
  Eigen::MatrixXd correction = Eigen::MatrixXd::Identity(dimension, dimension);
  correction(dimension - 1, dimension - 1) =
      (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  return svd.matrixU() * correction * svd.matrixV().transpose();
}

BodyFrameTrajectory body_frame_transform(const Trajectory& traj, const ReferenceShape& ref) {
  const int m = traj.dimension;
  const auto n = static_cast<Eigen::Index>(traj.agent_count);
  BodyFrameTrajectory body;
  body.times = traj.times;
  body.rotations.reserve(traj.size());
  body.centroids.reserve(traj.size());
  body.positions.reserve(traj.size());
  for (const Eigen::VectorXd& p : traj.positions) {
    const Eigen::VectorXd c = centroid(p, m);
    const Eigen::VectorXd q = center(p, m);
    Eigen::MatrixXd rot = procrustes_rotation(q, ref.centered_positions(), m);
    body.positions.push_back((rot.transpose() * q.reshaped(m, n)).reshaped());
    body.rotations.push_back(std::move(rot));
    body.centroids.push_back(c);
  }
  return body;
}

Eigen::VectorXd body_velocities(const Trajectory& traj, const BodyFrameTrajectory& body,
                                std::size_t sample) {
  if (traj.size() < 2) throw ValidationError("need at least two samples for velocities");
  const std::size_t lo = sample == 0 ? 0 : sample - 1;
  const std::size_t hi = std::min(sample + 1, traj.size() - 1);
  const Eigen::VectorXd global =
      (traj.positions[hi] - traj.positions[lo]) / (traj.times[hi] - traj.times[lo]);
  const int m = traj.dimension;
  const auto n = static_cast<Eigen::Index>(traj.agent_count);
  return (body.rotations[sample].transpose() * global.reshaped(m, n)).reshaped();
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ValidationError("fit_line needs >= 2 points");
  const auto count = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.rms_residual = std::sqrt(ss_res / count);
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

std::optional<DecayFit> fit_decay(const Trajectory& traj) {
  if (traj.size() == 0) throw InsufficientDecay("empty trajectory");
  const double e0 = traj.errors.front().norm();
  if (e0 < kDecayFloor) return std::nullopt;
  const double upper = 0.5 * e0;

  std::size_t begin = 0;
  while (begin < traj.size() && traj.errors[begin].norm() > upper) ++begin;
  std::size_t end = begin;
  while (end < traj.size()) {
    const double norm = traj.errors[end].norm();
    if (norm < kDecayFloor || norm > upper) break;
    ++end;
  }
  if (end - begin < 3) {
    throw InsufficientDecay("distance error never decays below half of its initial value");
  }
  std::vector<double> t;
  std::vector<double> log_e;
  double lo = upper;
  double hi = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    const double norm = traj.errors[i].norm();
    t.push_back(traj.times[i]);
    log_e.push_back(std::log(norm));
    lo = std::min(lo, norm);
    hi = std::max(hi, norm);
  }
  const LineFit line = fit_line(t, log_e);
  if (!(line.slope < 0.0)) throw InsufficientDecay("distance error does not decay");
  DecayFit fit;
  fit.rate = -line.slope;
  fit.r_squared = line.r_squared;
  fit.decades = std::log10(hi / lo);
  fit.t_begin = t.front();
  fit.t_end = t.back();
  fit.samples = t.size();
  return fit;
}

SteadyStateReport steady_state_report(const Trajectory& traj, const ReferenceShape& ref,
                                      TimeWindow window) {
  const int m = traj.dimension;
  const double slack = 1e-9 * std::max(1.0, std::abs(window.end));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] >= window.begin - slack && traj.times[i] <= window.end + slack) {
      idx.push_back(i);
    }
  }
  if (idx.size() < 3) throw ValidationError("steady-state window holds fewer than 3 samples");

  Trajectory sub;
  sub.dimension = m;
  sub.agent_count = traj.agent_count;
  sub.edge_count = traj.edge_count;
  for (std::size_t i : idx) {
    sub.times.push_back(traj.times[i]);
    sub.positions.push_back(traj.positions[i]);
  }
  const BodyFrameTrajectory body = body_frame_transform(sub, ref);

  SteadyStateReport report;
  report.window = window;

  // Centroid displacement accumulated in body axes.
  std::vector<std::vector<double>> displacement(static_cast<std::size_t>(m));
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
  for (std::size_t j = 0; j < sub.size(); ++j) {
    if (j > 0) {
      const Eigen::MatrixXd mean_rot_t =
          0.5 * (body.rotations[j - 1] + body.rotations[j]).transpose();
      acc += mean_rot_t * (body.centroids[j] - body.centroids[j - 1]);
    }
    for (int d = 0; d < m; ++d) displacement[static_cast<std::size_t>(d)].push_back(acc(d));
  }
  report.centroid_velocity.resize(m);
  for (int d = 0; d < m; ++d) {
    const LineFit line = fit_line(sub.times, displacement[static_cast<std::size_t>(d)]);
    report.centroid_velocity(d) = line.slope;
    report.centroid_velocity_residual = std::max(report.centroid_velocity_residual, line.rms_residual);
  }

  if (m == 2) {
    std::vector<double> angle;
    double previous = 0.0;
    for (std::size_t j = 0; j < sub.size(); ++j) {
      const Eigen::MatrixXd& r = body.rotations[j];
      double a = std::atan2(r(1, 0), r(0, 0));
      if (j > 0) {
        while (a - previous > std::numbers::pi) a -= 2.0 * std::numbers::pi;
        while (a - previous < -std::numbers::pi) a += 2.0 * std::numbers::pi;
      }
      angle.push_back(a);
      previous = a;
    }
    const LineFit line = fit_line(sub.times, angle);
    report.angular_velocity = Eigen::VectorXd::Constant(1, line.slope);
    report.angular_velocity_residual = line.rms_residual;
  } else {
    std::vector<Eigen::Vector3d> rates;
    for (std::size_t j = 1; j < sub.size(); ++j) {
      const Eigen::Matrix3d delta = body.rotations[j - 1].transpose() * body.rotations[j];
      const Eigen::AngleAxisd aa(delta);
      rates.push_back(aa.axis() * aa.angle() / (sub.times[j] - sub.times[j - 1]));
    }
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& w : rates) mean += w;
    mean /= static_cast<double>(rates.size());
    double spread = 0.0;
    for (const auto& w : rates) spread += (w - mean).squaredNorm();
    report.angular_velocity = mean;
    report.angular_velocity_residual = std::sqrt(spread / static_cast<double>(rates.size()));
  }

  std::vector<double> relative_scale;
  for (const Eigen::VectorXd& p : sub.positions) {
    const Eigen::VectorXd lengths = edge_lengths(ref.framework().with_positions(p));
    relative_scale.push_back((lengths.array() / ref.distances().array()).mean());
  }
  const LineFit scale_line = fit_line(sub.times, relative_scale);
  report.scaling_rate = scale_line.slope;
  report.scaling_rate_residual = scale_line.rms_residual;

  report.decay = fit_decay(traj);
  return report;
}

}  // namespace rigidmotion
