#pragma once

#include <Eigen/Dense>

#include "rigidmotion/graph.hpp"

namespace rigidmotion {

/// Per-edge motion parameters: `mu` acts on the tail agent, `mu_tilde` on the
/// head agent. Both have one entry per edge.
struct ParameterVector {
  Eigen::VectorXd mu;
  Eigen::VectorXd mu_tilde;

  static ParameterVector zero(int edge_count) {
    return {Eigen::VectorXd::Zero(edge_count), Eigen::VectorXd::Zero(edge_count)};
  }
  /// Splits a stacked [mu; mu_tilde] vector of length 2|E|.
  static ParameterVector from_stacked(const Eigen::VectorXd& stacked);

  int edge_count() const { return static_cast<int>(mu.size()); }
  Eigen::VectorXd stacked() const;

  ParameterVector& operator+=(const ParameterVector& other);
  friend ParameterVector operator+(ParameterVector a, const ParameterVector& b) { return a += b; }
  friend ParameterVector operator*(double s, const ParameterVector& p) {
    return {s * p.mu, s * p.mu_tilde};
  }
};

/// Desired shape: a minimally rigid framework together with its edge lengths.
/// Its positions also fix the body frame used for the design (origin at the
/// centroid, axes aligned with the global axes at design time).
class ReferenceShape {
 public:
  /// Throws RigidityError unless the framework is minimally rigid.
  explicit ReferenceShape(Framework framework);

  const Framework& framework() const { return framework_; }
  const SensingGraph& graph() const { return framework_.graph(); }
  int dimension() const { return framework_.dimension(); }
  const Eigen::VectorXd& distances() const { return distances_; }
  const Eigen::VectorXd& bearings() const { return bearings_; }
  const Eigen::VectorXd& centroid() const { return centroid_; }
  /// Stacked p*_i - p_c.
  const Eigen::VectorXd& centered_positions() const { return centered_; }

 private:
  Framework framework_;
  Eigen::VectorXd distances_;
  Eigen::VectorXd bearings_;
  Eigen::VectorXd centroid_;
  Eigen::VectorXd centered_;
};

/// Orthonormal bases (columns, each in R^{2|E|}) of the parameter subspaces.
struct MotionSpaces {
  Eigen::MatrixXd kernel;       // Ker T(z*)
  Eigen::MatrixXd translation;  // U
  Eigen::MatrixXd rotation;     // W
  Eigen::MatrixXd scaling;      // S
};

struct Calibration {
  ParameterVector params;
  /// Least-squares residual of the calibration target.
  double residual = 0.0;
};

/// n x |E| matrix with mu_k at the tail row and mu_tilde_k at the head row.
Eigen::MatrixXd build_A(const ParameterVector& pv, const SensingGraph& graph);

/// Per-agent motion term: agent i receives sum_k a_ik ẑ_k.
Eigen::VectorXd apply_motion_term(const ParameterVector& pv, const SensingGraph& graph,
                                  const Eigen::VectorXd& bearings, int dimension);

/// nm x 2|E| matrix T(ẑ) with Ā(mu, mu_tilde) ẑ = T(ẑ) [mu; mu_tilde].
/// Built column by column from unit parameter probes of the motion term.
Eigen::MatrixXd build_T(const Eigen::VectorXd& bearings, const SensingGraph& graph,
                        int dimension);

/// D_ẑ^T B̄^T: stacked velocities -> edge-length rates.
Eigen::MatrixXd distance_rate_matrix(const Eigen::VectorXd& bearings,
                                     const SensingGraph& graph, int dimension);

/// D_{P⊥ẑ}^T B̄^T: stacked velocities -> bearing-orthogonal relative velocities.
Eigen::MatrixXd bearing_rate_matrix(const Eigen::VectorXd& bearings,
                                    const SensingGraph& graph, int dimension);

Eigen::MatrixXd translation_space(const ReferenceShape& ref);
Eigen::MatrixXd rotation_space(const ReferenceShape& ref, const Eigen::MatrixXd& translation);
Eigen::MatrixXd scaling_space(const ReferenceShape& ref, const Eigen::MatrixXd& translation);

/// All four bases. Throws DegenerateShape if a dimension differs from
/// m (U), 1 or 3 (W), 1 (S).
MotionSpaces motion_spaces(const ReferenceShape& ref);

/// Expected dimension of the rotation space: 1 in the plane, 3 in space.
inline int rotation_dimension(int dimension) { return dimension == 2 ? 1 : 3; }

/// Agent velocities of a rigid rotation about the centroid: omega J r_i in 2D
/// (omega of size 1), omega x r_i in 3D (omega of size 3).
Eigen::VectorXd rotation_field(const ReferenceShape& ref, const Eigen::VectorXd& omega);

/// T(ẑ*) pv: stacked agent velocities induced at the reference shape.
Eigen::VectorXd induced_velocities(const ReferenceShape& ref, const ParameterVector& pv);

Calibration params_for_translation(const ReferenceShape& ref, const MotionSpaces& spaces,
                                   const Eigen::VectorXd& velocity);
Calibration params_for_rotation(const ReferenceShape& ref, const MotionSpaces& spaces,
                                const Eigen::VectorXd& omega);
Calibration params_for_scaling(const ReferenceShape& ref, const MotionSpaces& spaces,
                               double scaling_rate);

/// Largest absolute entries of the defining constraints applied to each basis
/// and of the cross inner products between the bases.
struct SpaceResiduals {
  double translation = 0.0;  // B̄^T T U
  double rotation = 0.0;     // D_ẑ^T B̄^T T W
  double scaling = 0.0;      // D_{P⊥ẑ}^T B̄^T T S
  double orthogonality = 0.0;
};

SpaceResiduals space_residuals(const ReferenceShape& ref, const MotionSpaces& spaces);

/// Computes the spaces of a reference shape once and calibrates against them.
class MotionDesigner {
 public:
  explicit MotionDesigner(ReferenceShape ref);

  const ReferenceShape& reference() const { return ref_; }
  const MotionSpaces& spaces() const { return spaces_; }
  const Eigen::MatrixXd& transfer() const { return transfer_; }

  Calibration translation(const Eigen::VectorXd& velocity) const {
    return params_for_translation(ref_, spaces_, velocity);
  }
  Calibration rotation(const Eigen::VectorXd& omega) const {
    return params_for_rotation(ref_, spaces_, omega);
  }
  Calibration scaling(double scaling_rate) const {
    return params_for_scaling(ref_, spaces_, scaling_rate);
  }

 private:
  ReferenceShape ref_;
  MotionSpaces spaces_;
  Eigen::MatrixXd transfer_;
};

}  // namespace rigidmotion
