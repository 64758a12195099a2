#include "rigidmotion/motion_design.hpp"

#include <algorithm>
#include <string>

#include "rigidmotion/errors.hpp"
#include "rigidmotion/linalg.hpp"

namespace rigidmotion {
namespace {

constexpr double kCalibrationTolerance = 1e-9;

Eigen::MatrixXd incidence_transpose_bar(const SensingGraph& graph, int dimension) {
  return kron_identity(incidence_matrix(graph).transpose(), dimension);
}

void require_dimension(const Eigen::MatrixXd& basis, int expected, const char* name) {
  if (basis.cols() != expected) {
    throw DegenerateShape(std::string(name) + " space has dimension " +
                          std::to_string(basis.cols()) + ", expected " +
                          std::to_string(expected));
  }
}

Calibration solve_in_span(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& map,
                          const Eigen::VectorXd& target, const char* what) {
  const Eigen::MatrixXd reduced = map * basis;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.cols());
  if (target.squaredNorm() > 0.0) {
    coeffs = reduced.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(target);
  }
  Calibration out;
  out.residual = (reduced * coeffs - target).norm();
  if (out.residual > kCalibrationTolerance * std::max(1.0, target.norm())) {
    throw Unreachable(std::string(what) + " target not reachable, residual " +
                      std::to_string(out.residual));
  }
  out.params = ParameterVector::from_stacked(basis * coeffs);
  return out;
}

}  // namespace

ParameterVector ParameterVector::from_stacked(const Eigen::VectorXd& stacked) {
  const Eigen::Index half = stacked.size() / 2;
  return {stacked.head(half), stacked.tail(half)};
}

Eigen::VectorXd ParameterVector::stacked() const {
  Eigen::VectorXd out(mu.size() + mu_tilde.size());
  out << mu, mu_tilde;
  return out;
}

ParameterVector& ParameterVector::operator+=(const ParameterVector& other) {
  mu += other.mu;
  mu_tilde += other.mu_tilde;
  return *this;
}

ReferenceShape::ReferenceShape(Framework framework) : framework_(std::move(framework)) {
  const RigidityReport report = rigidity_report(framework_);
  if (!report.is_minimally_rigid) {
    throw RigidityError("reference shape is not minimally rigid (rank " +
                        std::to_string(report.rigidity_rank) + ", expected " +
                        std::to_string(report.expected_rank) + " with " +
                        std::to_string(framework_.edge_count()) + " edges)");
  }
  distances_ = edge_lengths(framework_);
  bearings_ = bearing_function(framework_);
  const int m = framework_.dimension();
  const int n = framework_.agent_count();
  centroid_ = framework_.positions().reshaped(m, n).rowwise().mean();
  centered_ = (framework_.positions().reshaped(m, n).colwise() - centroid_).reshaped();
}

Eigen::MatrixXd build_A(const ParameterVector& pv, const SensingGraph& graph) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(graph.vertex_count(), graph.edge_count());
  for (int k = 0; k < graph.edge_count(); ++k) {
    a(graph.edge(k).tail, k) = pv.mu(k);
    a(graph.edge(k).head, k) = pv.mu_tilde(k);
  }
  return a;
}

Eigen::VectorXd apply_motion_term(const ParameterVector& pv, const SensingGraph& graph,
                                  const Eigen::VectorXd& bearings, int dimension) {
  const int m = dimension;
  Eigen::VectorXd u = Eigen::VectorXd::Zero(graph.vertex_count() * m);
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edge(k);
    u.segment(e.tail * m, m) += pv.mu(k) * bearings.segment(k * m, m);
    u.segment(e.head * m, m) += pv.mu_tilde(k) * bearings.segment(k * m, m);
  }
  return u;
}

Eigen::MatrixXd build_T(const Eigen::VectorXd& bearings, const SensingGraph& graph,
                        int dimension) {
  const int ne = graph.edge_count();
  Eigen::MatrixXd t(graph.vertex_count() * dimension, 2 * ne);
  Eigen::VectorXd probe = Eigen::VectorXd::Zero(2 * ne);
  for (int j = 0; j < 2 * ne; ++j) {
    probe(j) = 1.0;
    t.col(j) = apply_motion_term(ParameterVector::from_stacked(probe), graph, bearings, dimension);
    probe(j) = 0.0;
  }
  return t;
}

Eigen::MatrixXd distance_rate_matrix(const Eigen::VectorXd& bearings,
                                     const SensingGraph& graph, int dimension) {
  const int m = dimension;
  const int ne = graph.edge_count();
  Eigen::MatrixXd dz_t = Eigen::MatrixXd::Zero(ne, ne * m);
  for (int k = 0; k < ne; ++k) dz_t.block(k, k * m, 1, m) = bearings.segment(k * m, m).transpose();
  return dz_t * incidence_transpose_bar(graph, m);
}

Eigen::MatrixXd bearing_rate_matrix(const Eigen::VectorXd& bearings,
                                    const SensingGraph& graph, int dimension) {
  const int m = dimension;
  const int ne = graph.edge_count();
  Eigen::MatrixXd dp_t = Eigen::MatrixXd::Zero(ne * m, ne * m);
  for (int k = 0; k < ne; ++k) {
    // Projectors are symmetric, so the transposed block is the projector itself.
    dp_t.block(k * m, k * m, m, m) = orthogonal_projector(bearings.segment(k * m, m));
  }
  return dp_t * incidence_transpose_bar(graph, m);
}

Eigen::MatrixXd translation_space(const ReferenceShape& ref) {
  const int m = ref.dimension();
  const Eigen::MatrixXd t = build_T(ref.bearings(), ref.graph(), m);
  const Eigen::MatrixXd kernel = linalg::null_space(t);
  const Eigen::MatrixXd moving = linalg::null_space(incidence_transpose_bar(ref.graph(), m) * t);
  Eigen::MatrixXd u = linalg::project_out(kernel, moving);
  require_dimension(u, m, "translation");
  return u;
}

namespace {

Eigen::MatrixXd restricted_space(const ReferenceShape& ref, const Eigen::MatrixXd& translation,
                                 const Eigen::MatrixXd& constraint) {
  const int m = ref.dimension();
  const Eigen::MatrixXd t = build_T(ref.bearings(), ref.graph(), m);
  const Eigen::MatrixXd away =
      linalg::orthonormalize(linalg::hstack(linalg::null_space(t), translation));
  return linalg::project_out(away, linalg::null_space(constraint * t));
}

}  // namespace

Eigen::MatrixXd rotation_space(const ReferenceShape& ref, const Eigen::MatrixXd& translation) {
  const int m = ref.dimension();
  Eigen::MatrixXd w = restricted_space(ref, translation,
                                       distance_rate_matrix(ref.bearings(), ref.graph(), m));
  require_dimension(w, rotation_dimension(m), "rotation");
  return w;
}

Eigen::MatrixXd scaling_space(const ReferenceShape& ref, const Eigen::MatrixXd& translation) {
  const int m = ref.dimension();
  Eigen::MatrixXd s = restricted_space(ref, translation,
                                       bearing_rate_matrix(ref.bearings(), ref.graph(), m));
  require_dimension(s, 1, "scaling");
  return s;
}

MotionSpaces motion_spaces(const ReferenceShape& ref) {
  MotionSpaces spaces;
  spaces.kernel = linalg::null_space(build_T(ref.bearings(), ref.graph(), ref.dimension()));
  spaces.translation = translation_space(ref);
  spaces.rotation = rotation_space(ref, spaces.translation);
  spaces.scaling = scaling_space(ref, spaces.translation);
  return spaces;
}

Eigen::VectorXd rotation_field(const ReferenceShape& ref, const Eigen::VectorXd& omega) {
  const int m = ref.dimension();
  const int n = ref.framework().agent_count();
  if (omega.size() != rotation_dimension(m)) {
    throw Unreachable("angular velocity must have " + std::to_string(rotation_dimension(m)) +
                      " component(s) in dimension " + std::to_string(m));
  }
  Eigen::VectorXd field(n * m);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd r = ref.centered_positions().segment(i * m, m);
    if (m == 2) {
      field.segment(i * m, m) << -omega(0) * r(1), omega(0) * r(0);
    } else {
      field.segment(i * m, m) = Eigen::Vector3d(omega).cross(Eigen::Vector3d(r));
    }
  }
  return field;
}

Eigen::VectorXd induced_velocities(const ReferenceShape& ref, const ParameterVector& pv) {
  return apply_motion_term(pv, ref.graph(), ref.bearings(), ref.dimension());
}

Calibration params_for_translation(const ReferenceShape& ref, const MotionSpaces& spaces,
                                   const Eigen::VectorXd& velocity) {
  const int m = ref.dimension();
  if (velocity.size() != m) throw Unreachable("velocity has the wrong dimension");
  const int n = ref.framework().agent_count();
  const Eigen::VectorXd target = velocity.replicate(n, 1);
  const Eigen::MatrixXd t = build_T(ref.bearings(), ref.graph(), m);
  return solve_in_span(spaces.translation, t, target, "translation");
}

Calibration params_for_rotation(const ReferenceShape& ref, const MotionSpaces& spaces,
                                const Eigen::VectorXd& omega) {
  const Eigen::VectorXd target = rotation_field(ref, omega);
  const Eigen::MatrixXd t = build_T(ref.bearings(), ref.graph(), ref.dimension());
  return solve_in_span(spaces.rotation, t, target, "rotation");
}

Calibration params_for_scaling(const ReferenceShape& ref, const MotionSpaces& spaces,
                               double scaling_rate) {
  const int m = ref.dimension();
  const Eigen::MatrixXd rate_map =
      distance_rate_matrix(ref.bearings(), ref.graph(), m) * build_T(ref.bearings(), ref.graph(), m);
  const Eigen::VectorXd target = scaling_rate * ref.distances();
  return solve_in_span(spaces.scaling, rate_map, target, "scaling");
}

SpaceResiduals space_residuals(const ReferenceShape& ref, const MotionSpaces& spaces) {
  const int m = ref.dimension();
  const Eigen::MatrixXd t = build_T(ref.bearings(), ref.graph(), m);
  auto max_abs = [](const Eigen::MatrixXd& x) { return x.size() ? x.cwiseAbs().maxCoeff() : 0.0; };
  SpaceResiduals r;
  r.translation = max_abs(incidence_transpose_bar(ref.graph(), m) * t * spaces.translation);
  r.rotation = max_abs(distance_rate_matrix(ref.bearings(), ref.graph(), m) * t * spaces.rotation);
  r.scaling = max_abs(bearing_rate_matrix(ref.bearings(), ref.graph(), m) * t * spaces.scaling);
  const Eigen::MatrixXd k = spaces.kernel;
  r.orthogonality = std::max({
      max_abs(k.transpose() * spaces.translation),
      max_abs(k.transpose() * spaces.rotation),
      max_abs(k.transpose() * spaces.scaling),
      max_abs(spaces.translation.transpose() * spaces.rotation),
      max_abs(spaces.translation.transpose() * spaces.scaling),
  });
  return r;
}

MotionDesigner::MotionDesigner(ReferenceShape ref)
    : ref_(std::move(ref)),
      spaces_(motion_spaces(ref_)),
      transfer_(build_T(ref_.bearings(), ref_.graph(), ref_.dimension())) {}

}  // namespace rigidmotion
