#pragma once

#include <string>
#include <vector>

#include "rigidmotion/scenario.hpp"

namespace rigidmotion {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  double transient = 3.0;              // time before tracking is checked
  double tracking_fraction = 0.01;     // |‖z_k‖ - d_k| <= fraction * d*_k
  double invariance_tolerance = 1e-6;  // max_t ‖e(t)‖_inf from e(0) = 0
  double invariance_horizon = 20.0;
  double min_r_squared = 0.99;
  double min_decades = 1.0;
  double converged_error = 1e-6;       // ‖e‖ below which velocities are compared
  double velocity_tolerance = 0.01;    // relative, per agent
  double motion_tolerance = 0.02;      // relative, centroid velocity and angular speed
  /// Perturbation radius used when the scenario starts at e = 0, as a
  /// fraction of min d*.
  double default_perturbation = 0.1;
};

/// Runs the design and the simulation-based checks for one scenario. The two
/// simulations run concurrently. Failures are reported, never thrown, except
/// for invalid scenarios.
std::vector<CheckResult> verify_scenario(const Scenario& scenario, const VerifyOptions& options = {});

struct BasinOptions {
  int seeds = 16;
  int bisection_steps = 8;
  double horizon = 10.0;
  double max_relative_magnitude = 2.0;  // upper bracket, in units of min d*
  double converged_error = 1e-6;
  double congruence_tolerance = 1e-3;   // body-frame shape error relative to min d*
};

/// Empirical size of the region of attraction: the largest perturbation radius
/// (applied per agent around the reference) from which every sampled start still
/// reaches a shape congruent to the reference. Bisection assumes the outcome is
/// monotone in the radius, which is not guaranteed, so this is an estimate only.
struct BasinEstimate {
  double converged_radius = 0.0;  // largest radius that converged
  double failed_radius = 0.0;     // smallest radius seen to fail; 0 if none failed
  int runs = 0;
};

BasinEstimate estimate_basin_radius(const Scenario& scenario, const BasinOptions& options = {});

}  // namespace rigidmotion
