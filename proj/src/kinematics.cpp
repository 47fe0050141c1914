#include "foldsim/kinematics.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace foldsim {

namespace {

/// Largest-area vertex triple of the polygon, used as loop constraint points.
LoopConstraintPoints pick_constraint_points(const BodySpec& body) {
    const auto& poly = body.polygon;
    const std::size_t n = poly.size();
    double best_area = -1.0;
    std::array<std::size_t, 3> best{0, 1, 2};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                const Eigen::Vector2d ab = poly[j] - poly[i];
                const Eigen::Vector2d ac = poly[k] - poly[i];
                const double area = 0.5 * std::abs(ab.x() * ac.y() - ab.y() * ac.x());
                if (area > best_area) {
                    best_area = area;
                    best = {i, j, k};
                }
            }
        }
    }
    if (best_area <= 1e-12) {
        throw ValueError("body '" + body.id +
                         "': no non-collinear vertex triple for loop constraints");
    }
    LoopConstraintPoints points;
    for (int m = 0; m < 3; ++m) {
        points.points[m] = {poly[best[m]].x(), poly[best[m]].y(), 0.0};
    }
    return points;
}

} // namespace

KinematicTree build_tree(const MechanismSpec& mech) {
    const int newtonian = mech.newtonian_index();
    if (newtonian < 0) {
        throw SchemaError("mechanism has no newtonian body");
    }

    KinematicTree tree;
    tree.root = mech.bodies[newtonian].id;

    // Joints incident to each body, in declaration order.
    std::map<std::string, std::vector<const JointSpec*>> incident;
    for (const JointSpec& j : mech.joints) {
        incident[j.parent].push_back(&j);
        incident[j.child].push_back(&j);
    }

    std::set<std::string> visited{tree.root};
    std::set<std::string> used_joints;
    std::vector<const JointSpec*> leftover;
    std::queue<std::string> queue;
    queue.push(tree.root);
    while (!queue.empty()) {
        const std::string u = queue.front();
        queue.pop();
        for (const JointSpec* j : incident[u]) {
            if (used_joints.count(j->id)) continue;
            const std::string& other = (j->parent == u) ? j->child : j->parent;
            used_joints.insert(j->id);
            if (visited.insert(other).second) {
                tree.edges.push_back({u, other, j->id});
                queue.push(other);
            } else {
                leftover.push_back(j);
            }
        }
    }
    if (visited.size() != mech.bodies.size()) {
        throw TopologyError("body/joint graph is disconnected");
    }
    if (leftover.size() > 1) {
        throw TopologyError("mechanism has more than one independent loop");
    }

    if (leftover.size() == 1) {
        const JointSpec* cut = leftover.front();
        const BodySpec* split = mech.find_body(cut->child);
        std::string dummy_id = split->id + "__dummy";
        while (mech.find_body(dummy_id) != nullptr) dummy_id += "_";
        tree.cut_edge = CutEdge{cut->id, split->id, dummy_id};
        tree.loop_points = pick_constraint_points(*split);
        tree.edges.push_back({cut->parent, dummy_id, cut->id});
    }

    // One coordinate per joint, in declaration order.
    int index = 0;
    for (const JointSpec& j : mech.joints) {
        tree.coordinate_index[j.id] = index++;
    }
    return tree;
}

ArticulatedModel::ArticulatedModel(const MechanismSpec& mech, const KinematicTree& tree)
    : mech_(&mech), tree_(&tree) {
    coord_count_ = tree.coordinate_count();

    Node root;
    root.id = tree.root;
    root.geometry = mech.find_body(tree.root);
    if (root.geometry == nullptr) {
        throw ReferenceError("tree root '" + tree.root + "' not found in mechanism");
    }
    root.props = compute_mass_properties(*root.geometry, mech.materials);
    nodes_.push_back(root);
    index_[root.id] = 0;

    const bool split = tree.cut_edge.has_value();
    for (const TreeEdge& edge : tree.edges) {
        const auto parent_it = index_.find(edge.parent);
        if (parent_it == index_.end()) {
            throw TopologyError("tree edge parent '" + edge.parent + "' seen before definition");
        }
        const JointSpec* joint = mech.find_joint(edge.joint);
        if (joint == nullptr) {
            throw ReferenceError("tree joint '" + edge.joint + "' not found in mechanism");
        }
        Node node;
        node.id = edge.child;
        node.parent = parent_it->second;
        node.coord = tree.coordinate_index.at(edge.joint);
        node.joint = joint;
        node.is_dummy = split && edge.child == tree.cut_edge->dummy_body;
        const std::string geometry_id = node.is_dummy ? tree.cut_edge->original_body : edge.child;
        node.geometry = mech.find_body(geometry_id);
        if (node.geometry == nullptr) {
            throw ReferenceError("tree body '" + geometry_id + "' not found in mechanism");
        }
        node.props = compute_mass_properties(*node.geometry, mech.materials);

        node.axis_point = joint->axis_p1;
        const Eigen::Vector3d axis = joint->axis_p2 - joint->axis_p1;
        // The coordinate always measures the declared child relative to the
        // declared parent; a tree edge traversed against the declaration
        // flips the effective axis.
        const double sign = (edge.parent == joint->parent) ? 1.0 : -1.0;
        node.axis_dir = sign * axis.normalized();

        nodes_.push_back(node);
        index_[node.id] = static_cast<int>(nodes_.size()) - 1;
    }

    if (split) {
        for (Node& node : nodes_) {
            if (node.id == tree.cut_edge->original_body || node.is_dummy) {
                node.props.mass *= 0.5;
                node.props.inertia *= 0.5;
            }
        }
    }

    paths_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        std::vector<int> path;
        for (int n = static_cast<int>(i); n >= 0 && nodes_[n].coord >= 0; n = nodes_[n].parent) {
            path.push_back(n);
        }
        std::reverse(path.begin(), path.end());
        paths_[i] = std::move(path);
    }
}

int ArticulatedModel::node_index(const std::string& body_id) const {
    const auto it = index_.find(body_id);
    return it == index_.end() ? -1 : it->second;
}

ArticulatedModel::BodyStates ArticulatedModel::sweep(const Eigen::VectorXd& q) const {
    return sweep(q, Eigen::VectorXd::Zero(coord_count_));
}

ArticulatedModel::BodyStates ArticulatedModel::sweep(const Eigen::VectorXd& q,
                                                     const Eigen::VectorXd& qdot) const {
    if (q.size() != coord_count_ || qdot.size() != coord_count_) {
        throw ValueError("coordinate vector length " + std::to_string(q.size()) +
                         " does not match joint count " + std::to_string(coord_count_));
    }
    const std::size_t n = nodes_.size();
    BodyStates s;
    s.rotation.assign(n, Eigen::Matrix3d::Identity());
    s.origin.assign(n, Eigen::Vector3d::Zero());
    s.joint_point_world.assign(n, Eigen::Vector3d::Zero());
    s.joint_axis_world.assign(n, Eigen::Vector3d::Zero());
    s.omega.assign(n, Eigen::Vector3d::Zero());
    s.v_origin.assign(n, Eigen::Vector3d::Zero());
    s.omega_dot_bias.assign(n, Eigen::Vector3d::Zero());
    s.a_origin_bias.assign(n, Eigen::Vector3d::Zero());

    for (std::size_t i = 1; i < n; ++i) {
        const Node& node = nodes_[i];
        const int p = node.parent;
        const double angle = q[node.coord];
        const double rate = qdot[node.coord];

        const Eigen::Matrix3d axis_rot =
            Eigen::AngleAxisd(angle, node.axis_dir).toRotationMatrix();
        const Eigen::Matrix3d& rp = s.rotation[p];
        s.rotation[i] = rp * axis_rot;
        s.origin[i] = s.origin[p] + rp * (node.axis_point - axis_rot * node.axis_point);

        const Eigen::Vector3d cw = rp * node.axis_point + s.origin[p];
        const Eigen::Vector3d aw = rp * node.axis_dir;
        s.joint_point_world[i] = cw;
        s.joint_axis_world[i] = aw;

        s.omega[i] = s.omega[p] + rate * aw;
        // The hinge-line point is a material point of the parent.
        const Eigen::Vector3d v_c = s.v_origin[p] + s.omega[p].cross(cw - s.origin[p]);
        s.v_origin[i] = v_c + s.omega[i].cross(s.origin[i] - cw);

        s.omega_dot_bias[i] = s.omega_dot_bias[p] + rate * s.omega[p].cross(aw);
        const Eigen::Vector3d r_c = cw - s.origin[p];
        const Eigen::Vector3d a_c = s.a_origin_bias[p] + s.omega_dot_bias[p].cross(r_c) +
                                    s.omega[p].cross(s.omega[p].cross(r_c));
        const Eigen::Vector3d r_o = s.origin[i] - cw;
        s.a_origin_bias[i] =
            a_c + s.omega_dot_bias[i].cross(r_o) + s.omega[i].cross(s.omega[i].cross(r_o));
    }
    return s;
}

Eigen::Vector3d ArticulatedModel::BodyStates::point_world(int node,
                                                          const Eigen::Vector3d& flat) const {
    return rotation[node] * flat + origin[node];
}

Eigen::Vector3d ArticulatedModel::BodyStates::point_velocity(int node,
                                                             const Eigen::Vector3d& flat) const {
    const Eigen::Vector3d pw = point_world(node, flat);
    return v_origin[node] + omega[node].cross(pw - origin[node]);
}

Eigen::Vector3d ArticulatedModel::BodyStates::point_accel_bias(int node,
                                                               const Eigen::Vector3d& flat) const {
    const Eigen::Vector3d r = point_world(node, flat) - origin[node];
    return a_origin_bias[node] + omega_dot_bias[node].cross(r) +
           omega[node].cross(omega[node].cross(r));
}

Eigen::Vector3d ArticulatedModel::partial_velocity(const BodyStates& states, int path_node,
                                                   const Eigen::Vector3d& point_world) {
    return states.joint_axis_world[path_node].cross(point_world -
                                                    states.joint_point_world[path_node]);
}

std::map<std::string, FramePlacement> forward_kinematics(const KinematicTree& tree,
                                                         const MechanismSpec& mech,
                                                         const Eigen::VectorXd& q) {
    const ArticulatedModel model(mech, tree);
    const auto states = model.sweep(q);
    std::map<std::string, FramePlacement> placements;
    for (std::size_t i = 0; i < model.nodes().size(); ++i) {
        placements[model.nodes()[i].id] = {states.rotation[i], states.origin[i]};
    }
    return placements;
}

Eigen::Vector3d point_velocity(const KinematicTree& tree, const MechanismSpec& mech,
                               const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                               const std::string& body_id, const Eigen::Vector3d& flat_point) {
    const ArticulatedModel model(mech, tree);
    const int node = model.node_index(body_id);
    if (node < 0) {
        throw ReferenceError("body '" + body_id + "' not in the kinematic tree");
    }
    return model.sweep(q, qdot).point_velocity(node, flat_point);
}

} // namespace foldsim
