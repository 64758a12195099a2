#include "rigidmotion/verification.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>

#include <fmt/format.h>

#include "rigidmotion/errors.hpp"

namespace rigidmotion {
namespace {

struct Run {
  std::optional<Trajectory> traj;
  std::string error;
};

Run simulate(const Framework& initial, const ReferenceShape& ref, const ControllerConfig& cfg,
             const SimConfig& sim) {
  try {
    return {integrate(initial, ref, cfg, sim), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

CheckResult check_invariance(const Run& run, const VerifyOptions& o) {
  CheckResult c{"invariance of the desired shape", false, {}};
  if (!run.traj) {
    c.detail = "simulation failed: " + run.error;
    return c;
  }
  double worst = 0.0;
  for (const auto& e : run.traj->errors) worst = std::max(worst, e.cwiseAbs().maxCoeff());
  c.passed = worst <= o.invariance_tolerance;
  c.detail = fmt::format("max |e|_inf = {:.3e} over {:.1f} time units (limit {:.0e})", worst,
                         run.traj->times.back(), o.invariance_tolerance);
  return c;
}

CheckResult check_convergence(const Run& run, const VerifyOptions& o) {
  CheckResult c{"exponential convergence", false, {}};
  if (!run.traj) {
    c.detail = "simulation failed: " + run.error;
    return c;
  }
  try {
    const auto fit = fit_decay(*run.traj);
    if (!fit) {
      c.detail = "initial error below 1e-8, nothing to fit";
      return c;
    }
    c.passed = fit->r_squared >= o.min_r_squared && fit->decades >= o.min_decades;
    c.detail = fmt::format("rate {:.4f}, R^2 {:.5f} over {:.2f} decades (t in [{:.2f}, {:.2f}])",
                           fit->rate, fit->r_squared, fit->decades, fit->t_begin, fit->t_end);
  } catch (const InsufficientDecay& e) {
    c.detail = fmt::format("{} (|e(0)| = {:.3e}, |e(T)| = {:.3e})", e.what(),
                           run.traj->errors.front().norm(), run.traj->errors.back().norm());
  }
  return c;
}

CheckResult check_tracking(const Run& run, const ReferenceShape& ref, const VerifyOptions& o) {
  CheckResult c{"distance tracking after transient", false, {}};
  if (!run.traj) {
    c.detail = "simulation failed: " + run.error;
    return c;
  }
  double worst = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < run.traj->size(); ++i) {
    if (run.traj->times[i] < o.transient) continue;
    any = true;
    worst = std::max(worst, (run.traj->errors[i].array().abs() / ref.distances().array()).maxCoeff());
  }
  if (!any) {
    c.detail = "trajectory ends before the transient";
    return c;
  }
  c.passed = worst <= o.tracking_fraction;
  c.detail = fmt::format("max |e_k| / d*_k = {:.3e} for t >= {:.1f} (limit {:.2f})", worst,
                         o.transient, o.tracking_fraction);
  return c;
}

/// First sample after which ‖e‖ stays below `level`.
std::optional<std::size_t> settled_index(const Trajectory& traj, double level) {
  std::optional<std::size_t> first;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.errors[i].norm() < level) {
      if (!first) first = i;
    } else {
      first.reset();
    }
  }
  return first;
}

CheckResult check_velocities(const Run& run, const ReferenceShape& ref,
                             const ControllerConfig& cfg, const VerifyOptions& o) {
  CheckResult c{"steady-state agent velocities", false, {}};
  if (!run.traj) {
    c.detail = "simulation failed: " + run.error;
    return c;
  }
  const Trajectory& traj = *run.traj;
  const auto start = settled_index(traj, o.converged_error);
  if (!start || *start + 2 >= traj.size()) {
    c.detail = fmt::format("|e| never settles below {:.0e}", o.converged_error);
    return c;
  }
  const BodyFrameTrajectory body = body_frame_transform(traj, ref);
  const int m = traj.dimension;
  double worst = 0.0;
  for (std::size_t s = std::max<std::size_t>(*start, 1); s + 1 < traj.size(); ++s) {
    const Eigen::VectorXd measured = body_velocities(traj, body, s);
    const Eigen::VectorXd designed = designed_velocities(ref, cfg, traj.times[s]);
    for (int i = 0; i < traj.agent_count; ++i) {
      const double want = designed.segment(i * m, m).norm();
      const double diff = (measured - designed).segment(i * m, m).norm();
      // Agents designed to be at rest are held to an absolute 1e-6.
      worst = std::max(worst, diff / std::max(want, 1e-6 / o.velocity_tolerance));
    }
  }
  c.passed = worst <= o.velocity_tolerance;
  c.detail = fmt::format("worst relative velocity error {:.3e} for t >= {:.2f} (limit {:.2f})",
                         worst, traj.times[*start], o.velocity_tolerance);
  return c;
}

CheckResult check_motion(const Run& run, const Scenario& sc, const ReferenceShape& ref,
                         const VerifyOptions& o) {
  CheckResult c{"steady-state translation and rotation", false, {}};
  if (!run.traj) {
    c.detail = "simulation failed: " + run.error;
    return c;
  }
  const double end = run.traj->times.back();
  if (end <= o.transient) {
    c.detail = "trajectory ends before the transient";
    return c;
  }
  SteadyStateReport report;
  try {
    report = steady_state_report(*run.traj, ref, {o.transient, end});
  } catch (const Error& e) {
    c.detail = e.what();
    return c;
  }
  auto within = [&](const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
    const double scale = want.norm();
    return scale > 0.0 ? (got - want).norm() <= o.motion_tolerance * scale : got.norm() <= 1e-3;
  };
  Eigen::VectorXd expected_omega = sc.motion.angular_velocity;
  const bool rate_is_constant =
      sc.motion.hold_angular_rate || sc.motion.schedule.kind() == ScalingSchedule::Kind::kNone;
  const bool v_ok = within(report.centroid_velocity, sc.motion.velocity);
  const bool w_ok = !rate_is_constant || within(report.angular_velocity, expected_omega);
  c.passed = v_ok && w_ok;
  c.detail = fmt::format("body centroid velocity [{:.4f}] (target [{:.4f}]), angular velocity [{:.4f}] (target [{:.4f}]{})",
                         fmt::join(report.centroid_velocity.begin(), report.centroid_velocity.end(), ", "), fmt::join(sc.motion.velocity.begin(), sc.motion.velocity.end(), ", "),
                         fmt::join(report.angular_velocity.begin(), report.angular_velocity.end(), ", "), fmt::join(expected_omega.begin(), expected_omega.end(), ", "),
                         rate_is_constant ? "" : ", not checked: rate varies with scale");
  return c;
}

bool reaches_reference(const Trajectory& traj, const ReferenceShape& ref, const BasinOptions& o) {
  if (traj.errors.back().norm() >= o.converged_error) return false;
  const int m = traj.dimension;
  const Eigen::VectorXd& p = traj.positions.back();
  const Eigen::VectorXd pc = centroid(p, m);
  Eigen::VectorXd centered = p;
  for (int i = 0; i < traj.agent_count; ++i) centered.segment(i * m, m) -= pc;
  // Scheduled scaling changes the size but not the shape; compare at reference scale.
  const double scale = traj.distances.back().sum() / ref.distances().sum();
  centered /= scale;
  const Eigen::MatrixXd rot = procrustes_rotation(centered, ref.centered_positions(), m);
  double worst = 0.0;
  for (int i = 0; i < traj.agent_count; ++i) {
    const Eigen::VectorXd body = rot.transpose() * centered.segment(i * m, m);
    worst = std::max(worst, (body - ref.centered_positions().segment(i * m, m)).norm());
  }
  return worst <= o.congruence_tolerance * ref.distances().minCoeff();
}

}  // namespace

BasinEstimate estimate_basin_radius(const Scenario& sc, const BasinOptions& o) {
  if (o.seeds < 1 || o.bisection_steps < 0 || o.horizon <= 0.0 || o.max_relative_magnitude <= 0.0) {
    throw ValidationError("basin estimate needs seeds >= 1, bisection_steps >= 0 and positive bounds");
  }
  const ReferenceShape ref = sc.reference_shape();
  const ControllerConfig cfg = controller_config(sc, design_motion(ref, sc.motion).params);
  SimConfig sim = sc.sim;
  sim.duration = o.horizon;
  sim.record_stride = std::max<long>(1, sim.step_count());
  const std::uint64_t base_seed = sc.sim.perturbation ? sc.sim.perturbation->seed : 0u;

  BasinEstimate est;
  auto converges = [&](double radius) {
    std::vector<std::future<bool>> runs;
    for (int k = 0; k < o.seeds; ++k) {
      runs.push_back(std::async(std::launch::async, [&, k] {
        SimConfig local = sim;
        local.perturbation = Perturbation{base_seed + static_cast<std::uint64_t>(k), radius};
        const Run run = simulate(ref.framework(), ref, cfg, local);
        if (!run.traj) return false;
        try {
          return reaches_reference(*run.traj, ref, o);
        } catch (const NumericalError&) {
          return false;
        }
      }));
    }
    bool all = true;
    for (auto& r : runs) all = r.get() && all;
    est.runs += o.seeds;
    return all;
  };

  double lo = 0.0;
  double hi = o.max_relative_magnitude * ref.distances().minCoeff();
  if (converges(hi)) {
    est.converged_radius = hi;
    return est;
  }
  for (int step = 0; step < o.bisection_steps; ++step) {
    const double mid = 0.5 * (lo + hi);
    (converges(mid) ? lo : hi) = mid;
  }
  est.converged_radius = lo;
  est.failed_radius = hi;
  return est;
}

std::vector<CheckResult> verify_scenario(const Scenario& sc, const VerifyOptions& o) {
  std::vector<CheckResult> out;
  const ReferenceShape ref = sc.reference_shape();

  const RigidityReport rig = rigidity_report(ref.framework());
  out.push_back({"reference rigidity", rig.is_minimally_rigid && rig.is_bearing_rigid,
                 fmt::format("rank R = {} (expected {}), bearing kernel dim = {}",
                             rig.rigidity_rank, rig.expected_rank, rig.bearing_kernel_dim)});

  DesignResult design;
  try {
    design = design_motion(ref, sc.motion);
  } catch (const NumericalError& e) {
    out.push_back({"motion design", false, e.what()});
    return out;
  }
  const SpaceResiduals& sr = design.space_residuals;
  const double membership = std::max({sr.translation, sr.rotation, sr.scaling, sr.orthogonality});
  out.push_back({"motion design", membership <= 1e-10,
                 fmt::format("dim U/W/S = {}/{}/{}, membership residual {:.2e}, calibration residuals {:.1e}/{:.1e}/{:.1e}",
                             design.spaces.translation.cols(), design.spaces.rotation.cols(),
                             design.spaces.scaling.cols(), membership, design.translation_residual,
                             design.rotation_residual, design.scaling_residual)});

  const ControllerConfig cfg = controller_config(sc, design.params);

  SimConfig exact = sc.sim;
  exact.perturbation.reset();
  exact.duration = std::min(sc.sim.duration, o.invariance_horizon);

  SimConfig perturbed = sc.sim;
  const Framework initial = sc.initial_framework();
  const bool starts_at_rest =
      !sc.initial_positions && (!sc.sim.perturbation || sc.sim.perturbation->magnitude == 0.0);
  if (starts_at_rest) {
    perturbed.perturbation = Perturbation{
        sc.sim.perturbation ? sc.sim.perturbation->seed : 0u,
        o.default_perturbation * ref.distances().minCoeff()};
  }

  auto invariance_run = std::async(std::launch::async, [&] {
    return simulate(ref.framework(), ref, cfg, exact);
  });
  auto perturbed_run = std::async(std::launch::async, [&] {
    return simulate(initial, ref, cfg, perturbed);
  });
  const Run inv = invariance_run.get();
  const Run pert = perturbed_run.get();

  out.push_back(check_invariance(inv, o));
  out.push_back(check_convergence(pert, o));
  out.push_back(check_tracking(pert, ref, o));
  out.push_back(check_velocities(pert, ref, cfg, o));
  out.push_back(check_motion(pert, sc, ref, o));
  return out;
}

}  // namespace rigidmotion
