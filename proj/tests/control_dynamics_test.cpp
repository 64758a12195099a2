#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rigidmotion/control.hpp"
#include "rigidmotion/errors.hpp"
#include "rigidmotion/simulation.hpp"
#include "support/oracles.hpp"

namespace rm = rigidmotion;

namespace {

/// Triangulated strip of n agents; agent 0 and agent n-1 share no neighbours for n >= 5.
rm::Framework strip(int n) {
  std::vector<rm::Edge> edges{{0, 1}};
  for (int i = 2; i < n; ++i) {
    edges.push_back({i, i - 1});
    edges.push_back({i, i - 2});
  }
  Eigen::VectorXd p(2 * n);
  for (int i = 0; i < n; ++i) {
    p(2 * i) = 10.0 * (i / 2) + 5.0 * (i % 2);
    p(2 * i + 1) = 8.0 * (i % 2);
  }
  return rm::Framework(rm::SensingGraph(n, std::move(edges)), 2, p);
}

rm::ControllerConfig full_config(const rm::ReferenceShape& ref, rm::ScalingSchedule schedule,
                                 bool hold) {
  const rm::MotionDesigner d{ref};
  const int m = ref.dimension();
  rm::ControllerConfig cfg;
  cfg.gain = 5.0;
  cfg.params.translation = d.translation(Eigen::VectorXd::LinSpaced(m, 0.4, -0.3)).params;
  cfg.params.rotation = d.rotation(Eigen::VectorXd::Constant(m == 2 ? 1 : 3, 0.7)).params;
  cfg.params.scaling = d.scaling(1.0).params;
  cfg.schedule = schedule;
  cfg.hold_angular_rate = hold;
  return cfg;
}

}  // namespace

TEST(ScalingSchedule, StartsAtZeroForEveryKind) {
  for (const auto& s : {rm::ScalingSchedule::none(), rm::ScalingSchedule::linear(0.3),
                        rm::ScalingSchedule::periodic(0.2, 1.5)}) {
    EXPECT_EQ(s.value(0.0), 0.0);
  }
}

TEST(ScheduledDistances, NoneIsConstant) {
  const rm::ReferenceShape ref(oracle::square());
  for (double t : {0.0, 1.3, 17.0}) {
    const rm::ScheduledDistances d = rm::scheduled_distances(ref, rm::ScalingSchedule::none(), t);
    EXPECT_EQ(d.distances, ref.distances());
    EXPECT_TRUE(d.rates.isZero());
  }
}

TEST(ScheduledDistances, PeriodicUsesTwiceTheAmplitude) {
  const rm::ReferenceShape ref(oracle::square());
  const double h = 0.25;
  const double w = 1.5;
  const auto sched = rm::ScalingSchedule::periodic(h, w);
  for (double t : {0.0, 0.4, 1.0, 3.3}) {
    const rm::ScheduledDistances d = rm::scheduled_distances(ref, sched, t);
    EXPECT_NEAR(d.distances(0), 15.0 + 2 * h * 15.0 * std::sin(w * t), 1e-12);
    EXPECT_NEAR(d.rates(0), 2 * h * w * std::cos(w * t) * 15.0, 1e-12);
    EXPECT_NEAR(d.distances(2) / d.distances(0), std::sqrt(2.0), 1e-12);
  }
  // Central difference of d(t) agrees with the reported rate.
  const double t = 0.9;
  const double step = 1e-5;
  const Eigen::VectorXd fd = (rm::scheduled_distances(ref, sched, t + step).distances -
                              rm::scheduled_distances(ref, sched, t - step).distances) /
                             (2 * step);
  EXPECT_LT((fd - rm::scheduled_distances(ref, sched, t).rates).norm(), 1e-7);
}

TEST(ScheduledDistances, LinearGrowth) {
  const rm::ReferenceShape ref(oracle::square());
  const auto sched = rm::ScalingSchedule::linear(0.02);
  const rm::ScheduledDistances d = rm::scheduled_distances(ref, sched, 10.0);
  EXPECT_LT((d.distances - 1.2 * ref.distances()).norm(), 1e-12);
  EXPECT_LT((d.rates - 0.02 * ref.distances()).norm(), 1e-15);
}

TEST(ScheduledDistances, NonPositiveDistanceThrows) {
  const rm::ReferenceShape ref(oracle::square());
  EXPECT_THROW(rm::scheduled_distances(ref, rm::ScalingSchedule::linear(-0.5), 2.0),
               rm::NonPositiveDistance);
  EXPECT_THROW(rm::scheduled_distances(ref, rm::ScalingSchedule::periodic(0.6, 1.0),
                                       -std::numbers::pi / 2),
               rm::NonPositiveDistance);
}

TEST(ScalingSchedule, PositivityOverHorizon) {
  EXPECT_NO_THROW(rm::ScalingSchedule::periodic(0.25, 1.5).validate(20.0));
  EXPECT_THROW(rm::ScalingSchedule::periodic(0.5, 1.5).validate(20.0), rm::PositivityError);
  EXPECT_THROW(rm::ScalingSchedule::periodic(2.0, 1.5).validate(20.0), rm::PositivityError);
  // The trough of sin is reached only after 3π/(2ω).
  EXPECT_NO_THROW(rm::ScalingSchedule::periodic(0.6, 1.0).validate(3.0));
  EXPECT_THROW(rm::ScalingSchedule::periodic(0.6, 1.0).validate(5.0), rm::PositivityError);
  EXPECT_NO_THROW(rm::ScalingSchedule::linear(-0.04).validate(20.0));
  EXPECT_THROW(rm::ScalingSchedule::linear(-0.05).validate(20.0), rm::PositivityError);
  EXPECT_NEAR(rm::ScalingSchedule::periodic(0.3, 2.0).min_scale(10.0), 0.4, 1e-12);
}

TEST(ControllerConfig, GainMustBePositive) {
  rm::ControllerConfig cfg;
  cfg.gain = 0.0;
  EXPECT_THROW(cfg.validate(), rm::ValidationError);
  cfg.gain = 1e-3;
  EXPECT_NO_THROW(cfg.validate());
}

TEST(TimeVaryingParams, NoScheduleIsConstant) {
  const rm::ReferenceShape ref(oracle::square());
  const rm::ControllerConfig cfg = full_config(ref, rm::ScalingSchedule::none(), true);
  const Eigen::VectorXd at0 = rm::time_varying_params(cfg, 0.0).stacked();
  for (double t : {0.5, 4.0, 19.0}) {
    EXPECT_EQ(rm::time_varying_params(cfg, t).stacked(), at0);
  }
  EXPECT_LT((at0 - (cfg.params.translation + cfg.params.rotation).stacked()).norm(), 1e-15);
}

TEST(TimeVaryingParams, PeriodicScalingPartFollowsRateOfSchedule) {
  const rm::ReferenceShape ref(oracle::square());
  const auto sched = rm::ScalingSchedule::periodic(0.25, 1.5);
  const rm::ControllerConfig literal = full_config(ref, sched, false);
  const rm::ControllerConfig held = full_config(ref, sched, true);
  for (double t : {0.0, 0.7, 2.9}) {
    const double sdot = 2 * 0.25 * 1.5 * std::cos(1.5 * t);
    const double s = 2 * 0.25 * std::sin(1.5 * t);
    const Eigen::VectorXd want_literal =
        (literal.params.translation + literal.params.rotation + sdot * literal.params.scaling).stacked();
    EXPECT_LT((rm::time_varying_params(literal, t).stacked() - want_literal).norm(), 1e-12);
    const Eigen::VectorXd want_held =
        (held.params.translation + (1 + s) * held.params.rotation + sdot * held.params.scaling).stacked();
    EXPECT_LT((rm::time_varying_params(held, t).stacked() - want_held).norm(), 1e-12);
  }
}

TEST(TimeVaryingParams, ZeroRateLeavesOnlyMotionParts) {
  const rm::ReferenceShape ref(oracle::square());
  const rm::ControllerConfig cfg = full_config(ref, rm::ScalingSchedule::periodic(0.25, 1.5), false);
  const double t = std::numbers::pi / 2 / 1.5;  // cos(ω t) = 0
  EXPECT_LT((rm::time_varying_params(cfg, t).stacked() -
             (cfg.params.translation + cfg.params.rotation).stacked()).norm(), 1e-12);
}

TEST(TimeVaryingParams, ReproducesKnownScalingSignalOnUnitSquare) {
  // On the unit square the known breathing pattern, multiplied by h ω cos(ω t), produces the
  // same velocity field as the calibrated unit-rate scaling vector times ds/dt.
  const rm::ReferenceShape ref(oracle::square(1.0));
  rm::ControllerConfig cfg;
  cfg.params = rm::MotionParameters::zero(5);
  cfg.params.scaling = rm::MotionDesigner{ref}.scaling(1.0).params;
  const double h = 0.25;
  const double w = 1.5;
  cfg.schedule = rm::ScalingSchedule::periodic(h, w);
  Eigen::VectorXd pattern(10);
  pattern << 1, 1, 0, 1, 1, -1, -1, 0, -1, -1;
  for (double t : {0.0, 0.3, 1.1, 2.0}) {
    const Eigen::VectorXd known = rm::induced_velocities(
        ref, rm::ParameterVector::from_stacked(h * w * std::cos(w * t) * pattern));
    const Eigen::VectorXd ours = rm::induced_velocities(ref, rm::time_varying_params(cfg, t));
    EXPECT_LT((known - ours).norm(), 1e-12);
  }
}

TEST(DistanceErrors, ZeroOnReferenceAndOnScaledCopies) {
  const rm::ReferenceShape ref(oracle::square());
  EXPECT_TRUE(rm::distance_errors(ref.framework(), ref.distances()).isZero());
  const auto sched = rm::ScalingSchedule::periodic(0.25, 1.5);
  const double t = 0.8;
  const double scale = 1.0 + sched.value(t);
  const rm::Framework scaled = ref.framework().with_positions(scale * ref.framework().positions());
  EXPECT_LT(rm::distance_errors(scaled, rm::scheduled_distances(ref, sched, t).distances).norm(),
            1e-12);
  EXPECT_EQ(rm::potential(ref.framework(), ref.distances()), 0.0);
}

TEST(ControlLaw, EquilibriumWithoutParametersIsAtRest) {
  const rm::ReferenceShape ref(oracle::square());
  EXPECT_TRUE(rm::control_law(ref.framework(), ref.distances(), rm::ParameterVector::zero(5), 5.0)
                  .isZero());
}

TEST(ControlLaw, TranslationParametersMoveEveryAgentEqually) {
  const rm::ReferenceShape ref(oracle::square());
  const Eigen::Vector2d v(1.0, -0.5);
  const rm::ParameterVector pv = rm::MotionDesigner{ref}.translation(v).params;
  const Eigen::VectorXd u = rm::control_law(ref.framework(), ref.distances(), pv, 5.0);
  EXPECT_LT((u - oracle::tile(v, 4)).norm(), 1e-9);
}

TEST(ControlLaw, GradientTermIsMinusGainTimesPotentialGradient) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = trial % 2 == 0 ? 2 : 3;
    const rm::SensingGraph g = m == 2 ? oracle::square_graph() : oracle::tetrahedron().graph();
    const rm::Framework fw = oracle::random_framework(rng, g, m, 20.0, 2.0);
    const Eigen::VectorXd d = oracle::uniform_vector(rng, g.edge_count(), 5.0, 25.0);
    const double c = 3.0;
    const Eigen::VectorXd u = rm::control_law(fw, d, rm::ParameterVector::zero(g.edge_count()), c);
    const Eigen::VectorXd grad = oracle::fd_gradient(
        [&](const Eigen::VectorXd& p) { return oracle::elastic_potential(g, m, p, d); },
        fw.positions());
    EXPECT_LE((u + c * grad).norm(), 1e-6 * (c * grad).norm()) << "trial " << trial;
  }
}

TEST(ControlLaw, MotionTermMatchesExplicitKroneckerProduct) {
  std::mt19937_64 rng(100);
  const rm::SensingGraph g = oracle::square_graph();
  for (int trial = 0; trial < 20; ++trial) {
    const rm::Framework fw = oracle::random_framework(rng, g, 2);
    const Eigen::VectorXd d = rm::edge_lengths(fw);  // e = 0, isolates the motion term
    const rm::ParameterVector pv{oracle::uniform_vector(rng, 5, -2, 2),
                                 oracle::uniform_vector(rng, 5, -2, 2)};
    const Eigen::VectorXd want =
        oracle::motion_term(g, 2, pv.mu, pv.mu_tilde, oracle::stacked_bearings(g, 2, fw.positions()));
    EXPECT_LT((rm::control_law(fw, d, pv, 4.0) - want).norm(), 1e-12 * want.norm());
  }
}

TEST(ControlLaw, AgentBlockDependsOnlyOnNeighbours) {
  std::mt19937_64 rng(5);
  const rm::Framework fw = strip(7);
  const int m = 2;
  const Eigen::VectorXd d = rm::edge_lengths(fw) * 1.1;
  const rm::ParameterVector pv{oracle::uniform_vector(rng, fw.edge_count(), -1, 1),
                               oracle::uniform_vector(rng, fw.edge_count(), -1, 1)};
  for (int agent = 0; agent < fw.agent_count(); ++agent) {
    const std::vector<int> nb = fw.graph().neighbors(agent);
    Eigen::VectorXd masked = fw.positions();
    for (int j = 0; j < fw.agent_count(); ++j) {
      if (j == agent || std::find(nb.begin(), nb.end(), j) != nb.end()) continue;
      masked.segment(j * m, m) = oracle::uniform_vector(rng, m, 100, 200);
    }
    const Eigen::VectorXd before = rm::control_law(fw, d, pv, 2.0);
    const Eigen::VectorXd after = rm::control_law(fw.with_positions(masked), d, pv, 2.0);
    EXPECT_EQ(before.segment(agent * m, m), after.segment(agent * m, m)) << "agent " << agent;
  }
}

TEST(ControlLaw, CoincidentNeighboursThrow) {
  Eigen::VectorXd p(8);
  p << 0, 0, 0, 0, 1, 1, 0, 1;
  const rm::Framework fw(oracle::square_graph(), 2, p);
  EXPECT_THROW(rm::control_law(fw, Eigen::VectorXd::Ones(5), rm::ParameterVector::zero(5), 1.0),
               rm::ZeroEdge);
}

TEST(StiffnessMatrix, PositiveDefiniteAtMinimallyRigidShapes) {
  for (const rm::Framework& fw : {oracle::square(), oracle::tetrahedron()}) {
    const int m = fw.dimension();
    const Eigen::MatrixXd q = rm::stiffness_matrix(fw);
    // Oracle: D_ẑᵀ B̄ᵀ B̄ D_ẑ assembled from explicit Kronecker products.
    const Eigen::MatrixXd bbar = oracle::kron_with_identity(oracle::incidence(fw.graph()), m);
    const Eigen::VectorXd zhat = oracle::stacked_bearings(fw.graph(), m, fw.positions());
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(fw.edge_count() * m, fw.edge_count());
    for (int k = 0; k < fw.edge_count(); ++k) dz.block(k * m, k, m, 1) = zhat.segment(k * m, m);
    const Eigen::MatrixXd want = dz.transpose() * bbar.transpose() * bbar * dz;
    EXPECT_LT((q - want).norm(), 1e-12);
    EXPECT_LT((q - q.transpose()).norm(), 1e-14);
    EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().minCoeff(), 1e-3);
  }
}

TEST(ErrorDynamics, DesignedParametersKeepErrorsAtZero) {
  for (const rm::Framework& fw : {oracle::square(), oracle::tetrahedron()}) {
    const rm::ReferenceShape ref(fw);
    for (const auto& sched : {rm::ScalingSchedule::none(), rm::ScalingSchedule::linear(0.05),
                              rm::ScalingSchedule::periodic(0.25, 1.5)}) {
      const rm::ControllerConfig cfg = full_config(ref, sched, true);
      for (double t : {0.0, 0.6, 2.5}) {
        const rm::ScheduledDistances d = rm::scheduled_distances(ref, sched, t);
        // The formation at time t is a scaled copy; errors are zero there.
        const rm::Framework at_t = fw.with_positions((1 + sched.value(t)) * fw.positions());
        const Eigen::VectorXd edot = rm::error_dynamics_rhs(
            Eigen::VectorXd::Zero(fw.edge_count()), at_t, rm::time_varying_params(cfg, t), d.rates,
            cfg.gain);
        EXPECT_LT(edot.cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
}

TEST(ErrorDynamics, WithoutParametersReducesToStiffnessFlow) {
  std::mt19937_64 rng(6);
  const rm::ReferenceShape ref(oracle::square());
  const rm::Framework fw = ref.framework().with_positions(
      ref.framework().positions() + oracle::uniform_vector(rng, 8, -0.5, 0.5));
  const Eigen::VectorXd e = rm::distance_errors(fw, ref.distances());
  const Eigen::VectorXd edot = rm::error_dynamics_rhs(e, fw, rm::ParameterVector::zero(5),
                                                      Eigen::VectorXd::Zero(5), 2.0);
  EXPECT_LT((edot + 2.0 * rm::stiffness_matrix(fw) * e).norm(), 1e-12);
}

TEST(ErrorDynamics, AgreesWithDifferentiatedSimulation) {
  const rm::ReferenceShape ref(oracle::square());
  const rm::ControllerConfig cfg = full_config(ref, rm::ScalingSchedule::periodic(0.25, 1.5), true);
  rm::SimConfig sim;
  sim.dt = 1e-4;
  sim.duration = 0.5;
  sim.perturbation = rm::Perturbation{4, 1.0};
  const rm::Trajectory traj = rm::integrate(ref.framework(), ref, cfg, sim);
  for (std::size_t i : {std::size_t{500}, std::size_t{2500}, std::size_t{4500}}) {
    // Five-point central difference of the recorded errors.
    const Eigen::VectorXd fd = (traj.errors[i - 2] - 8 * traj.errors[i - 1] +
                                8 * traj.errors[i + 1] - traj.errors[i + 2]) /
                               (12 * sim.dt);
    const double t = traj.times[i];
    const rm::Framework fw(ref.graph(), 2, traj.positions[i]);
    const Eigen::VectorXd rhs =
        rm::error_dynamics_rhs(traj.errors[i], fw, rm::time_varying_params(cfg, t),
                               rm::scheduled_distances(ref, cfg.schedule, t).rates, cfg.gain);
    EXPECT_LT((fd - rhs).norm(), 1e-5 * std::max(1.0, rhs.norm())) << "t = " << t;
  }
}
