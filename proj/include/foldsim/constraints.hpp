#pragma once

#include <Eigen/Dense>

#include <memory>
#include <utility>

#include "foldsim/kinematics.hpp"

namespace foldsim {

/// Gains of the Baumgarte error feedback. Disabled keeps pure
/// acceleration-level enforcement (the alpha/beta terms are dropped).
struct BaumgarteParams {
    double alpha = 10.0; // 1/s
    double beta = 10.0;  // 1/s
    bool enabled = true;
};

/// Componentwise coincidence constraints gluing the original and dummy copy
/// of the split body: C_p(q) = world(original, p) - world(dummy, p) for each
/// of the three constraint points, stacked into 9 scalar equations.
class ConstraintSystem {
public:
    ConstraintSystem(const MechanismSpec& mech, const KinematicTree& tree);
    ConstraintSystem(const MechanismSpec& mech, const KinematicTree& tree,
                     const LoopConstraintPoints& points);
    ConstraintSystem(std::shared_ptr<const ArticulatedModel> model,
                     const LoopConstraintPoints& points);

    int rows() const { return 9; }
    Eigen::VectorXd residual(const Eigen::VectorXd& q) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& q) const;

    /// Largest per-point gap between the two copies, in meters.
    double max_point_error(const Eigen::VectorXd& q) const;

    // Evaluations on an existing sweep, used by the dynamics assembler.
    Eigen::VectorXd residual_from(const ArticulatedModel& model,
                                  const ArticulatedModel::BodyStates& states) const;
    Eigen::MatrixXd jacobian_from(const ArticulatedModel& model,
                                  const ArticulatedModel::BodyStates& states) const;
    Eigen::VectorXd cdot_from(const ArticulatedModel& model,
                              const ArticulatedModel::BodyStates& states) const;
    /// The Jdot*qdot term: relative bias acceleration of the point pairs.
    Eigen::VectorXd velocity_product_from(const ArticulatedModel& model,
                                          const ArticulatedModel::BodyStates& states) const;

    const LoopConstraintPoints& points() const { return points_; }
    const ArticulatedModel& model() const { return *model_; }

private:
    std::shared_ptr<const ArticulatedModel> model_;
    LoopConstraintPoints points_;
    int original_node_ = -1;
    int dummy_node_ = -1;
};

/// Acceleration-level form A(q) * qddot = b(q, qdot) of the loop constraints.
/// A is the constraint Jacobian; b = -Jdot*qdot - 2*alpha*Cdot - beta^2*C
/// when stabilization is enabled, and -Jdot*qdot otherwise.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> stabilized_acceleration_rhs(
    const ConstraintSystem& cs, const BaumgarteParams& params, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot);

} // namespace foldsim
