#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "foldsim/mechanism.hpp"

namespace foldsim {

/// Rigid placement of a body: world = rotation * flat + origin.
/// Body-local coordinates are flat-state coordinates, so at q = 0 every
/// placement is the identity.
struct FramePlacement {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d origin{0.0, 0.0, 0.0};

    Eigen::Vector3d apply(const Eigen::Vector3d& flat_point) const {
        return rotation * flat_point + origin;
    }
};

struct TreeEdge {
    std::string parent;
    std::string child;
    std::string joint;
};

struct CutEdge {
    std::string joint;
    std::string original_body;
    std::string dummy_body;
};

/// Three non-collinear flat-state points on the split body; the loop closure
/// forces them to coincide on the original and the dummy copy.
struct LoopConstraintPoints {
    std::array<Eigen::Vector3d, 3> points;
};

/// Spanning tree of the body graph rooted at the newtonian body. For a
/// single-loop mechanism one joint is cut: its declared child body is
/// duplicated into a dummy body attached through the cut joint, and both
/// copies carry half the original mass and inertia.
struct KinematicTree {
    std::string root;
    std::vector<TreeEdge> edges; // breadth-first order, includes the dummy edge
    std::optional<CutEdge> cut_edge;
    std::optional<LoopConstraintPoints> loop_points;
    std::map<std::string, int> coordinate_index; // joint id -> index into q

    int coordinate_count() const { return static_cast<int>(coordinate_index.size()); }
};

KinematicTree build_tree(const MechanismSpec& mech);

std::map<std::string, FramePlacement> forward_kinematics(const KinematicTree& tree,
                                                         const MechanismSpec& mech,
                                                         const Eigen::VectorXd& q);

/// Exact world velocity of a flat-state point fixed on a body.
Eigen::Vector3d point_velocity(const KinematicTree& tree, const MechanismSpec& mech,
                               const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                               const std::string& body_id, const Eigen::Vector3d& flat_point);

/// Index-based articulation data shared by the constraint and dynamics
/// evaluators. Built once per (mechanism, tree) pair; immutable afterwards.
class ArticulatedModel {
public:
    struct Node {
        std::string id;
        int parent = -1; // node index, -1 for the root
        int coord = -1;  // q index, -1 for the root
        Eigen::Vector3d axis_point{0.0, 0.0, 0.0}; // flat state, on the hinge line
        Eigen::Vector3d axis_dir{0.0, 0.0, 1.0};   // unit; sign matches the coordinate
        const JointSpec* joint = nullptr;
        MassProperties props; // halved for split bodies
        const BodySpec* geometry = nullptr;
        bool is_dummy = false;
    };

    /// Kinematic sweep through the tree. Biases are the accelerations that
    /// remain when qddot = 0 (the velocity-product terms).
    struct BodyStates {
        std::vector<Eigen::Matrix3d> rotation;
        std::vector<Eigen::Vector3d> origin;
        std::vector<Eigen::Vector3d> joint_point_world; // on the hinge line
        std::vector<Eigen::Vector3d> joint_axis_world;
        std::vector<Eigen::Vector3d> omega;
        std::vector<Eigen::Vector3d> v_origin;
        std::vector<Eigen::Vector3d> omega_dot_bias;
        std::vector<Eigen::Vector3d> a_origin_bias;

        Eigen::Vector3d point_world(int node, const Eigen::Vector3d& flat) const;
        Eigen::Vector3d point_velocity(int node, const Eigen::Vector3d& flat) const;
        Eigen::Vector3d point_accel_bias(int node, const Eigen::Vector3d& flat) const;
    };

    ArticulatedModel(const MechanismSpec& mech, const KinematicTree& tree);

    int coord_count() const { return coord_count_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    int node_index(const std::string& body_id) const;
    /// Ancestor nodes holding a coordinate, root side first, self included.
    const std::vector<int>& coordinate_path(int node) const { return paths_[node]; }
    const MechanismSpec& mechanism() const { return *mech_; }
    const KinematicTree& tree() const { return *tree_; }

    BodyStates sweep(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot) const;
    BodyStates sweep(const Eigen::VectorXd& q) const;

    /// d(world position of a flat point on `node`)/d(qdot of `path_node`'s
    /// coordinate), i.e. the partial velocity used by Kane's method.
    static Eigen::Vector3d partial_velocity(const BodyStates& states, int path_node,
                                            const Eigen::Vector3d& point_world);

private:
    const MechanismSpec* mech_;
    const KinematicTree* tree_;
    std::vector<Node> nodes_;           // topological (BFS) order
    std::vector<std::vector<int>> paths_;
    std::map<std::string, int> index_;
    int coord_count_ = 0;
};

} // namespace foldsim
