#include "foldsim/constraints.hpp"

namespace foldsim {

namespace {

const LoopConstraintPoints& require_loop_points(const KinematicTree& tree) {
    if (!tree.cut_edge || !tree.loop_points) {
        throw TopologyError("mechanism has no closed loop, nothing to constrain");
    }
    return *tree.loop_points;
}

} // namespace

ConstraintSystem::ConstraintSystem(const MechanismSpec& mech, const KinematicTree& tree)
    : ConstraintSystem(mech, tree, require_loop_points(tree)) {}

ConstraintSystem::ConstraintSystem(const MechanismSpec& mech, const KinematicTree& tree,
                                   const LoopConstraintPoints& points)
    : ConstraintSystem(std::make_shared<ArticulatedModel>(mech, tree), points) {}

ConstraintSystem::ConstraintSystem(std::shared_ptr<const ArticulatedModel> model,
                                   const LoopConstraintPoints& points)
    : model_(std::move(model)), points_(points) {
    const KinematicTree& tree = model_->tree();
    if (!tree.cut_edge) {
        throw TopologyError("mechanism has no closed loop, nothing to constrain");
    }
    original_node_ = model_->node_index(tree.cut_edge->original_body);
    dummy_node_ = model_->node_index(tree.cut_edge->dummy_body);
    if (original_node_ < 0 || dummy_node_ < 0) {
        throw TopologyError("split body or its dummy copy missing from the tree");
    }
}

Eigen::VectorXd ConstraintSystem::residual_from(const ArticulatedModel&,
                                                const ArticulatedModel::BodyStates& s) const {
    Eigen::VectorXd c(9);
    for (int p = 0; p < 3; ++p) {
        c.segment<3>(3 * p) =
            s.point_world(original_node_, points_.points[p]) -
            s.point_world(dummy_node_, points_.points[p]);
    }
    return c;
}

Eigen::MatrixXd ConstraintSystem::jacobian_from(const ArticulatedModel& model,
                                                const ArticulatedModel::BodyStates& s) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(9, model.coord_count());
    for (int p = 0; p < 3; ++p) {
        const Eigen::Vector3d x_orig = s.point_world(original_node_, points_.points[p]);
        for (int node : model.coordinate_path(original_node_)) {
            jac.block<3, 1>(3 * p, model.nodes()[node].coord) +=
                ArticulatedModel::partial_velocity(s, node, x_orig);
        }
        const Eigen::Vector3d x_dummy = s.point_world(dummy_node_, points_.points[p]);
        for (int node : model.coordinate_path(dummy_node_)) {
            jac.block<3, 1>(3 * p, model.nodes()[node].coord) -=
                ArticulatedModel::partial_velocity(s, node, x_dummy);
        }
    }
    return jac;
}

Eigen::VectorXd ConstraintSystem::cdot_from(const ArticulatedModel&,
                                            const ArticulatedModel::BodyStates& s) const {
    Eigen::VectorXd cdot(9);
    for (int p = 0; p < 3; ++p) {
        cdot.segment<3>(3 * p) = s.point_velocity(original_node_, points_.points[p]) -
                                 s.point_velocity(dummy_node_, points_.points[p]);
    }
    return cdot;
}

Eigen::VectorXd ConstraintSystem::velocity_product_from(
    const ArticulatedModel&, const ArticulatedModel::BodyStates& s) const {
    Eigen::VectorXd jdot_qdot(9);
    for (int p = 0; p < 3; ++p) {
        jdot_qdot.segment<3>(3 * p) = s.point_accel_bias(original_node_, points_.points[p]) -
                                      s.point_accel_bias(dummy_node_, points_.points[p]);
    }
    return jdot_qdot;
}

Eigen::VectorXd ConstraintSystem::residual(const Eigen::VectorXd& q) const {
    return residual_from(*model_, model_->sweep(q));
}

Eigen::MatrixXd ConstraintSystem::jacobian(const Eigen::VectorXd& q) const {
    return jacobian_from(*model_, model_->sweep(q));
}

double ConstraintSystem::max_point_error(const Eigen::VectorXd& q) const {
    const Eigen::VectorXd c = residual(q);
    double worst = 0.0;
    for (int p = 0; p < 3; ++p) {
        worst = std::max(worst, c.segment<3>(3 * p).norm());
    }
    return worst;
}

std::pair<Eigen::MatrixXd, Eigen::VectorXd> stabilized_acceleration_rhs(
    const ConstraintSystem& cs, const BaumgarteParams& params, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot) {
    if (!(params.alpha >= 0.0) || !(params.beta >= 0.0)) {
        throw ValueError("baumgarte gains must be >= 0");
    }
    const ArticulatedModel& model = cs.model();
    const auto states = model.sweep(q, qdot);
    const Eigen::MatrixXd a = cs.jacobian_from(model, states);
    Eigen::VectorXd b = -cs.velocity_product_from(model, states);
    if (params.enabled) {
        b -= 2.0 * params.alpha * cs.cdot_from(model, states);
        b -= params.beta * params.beta * cs.residual_from(model, states);
    }
    return {a, b};
}

} // namespace foldsim
