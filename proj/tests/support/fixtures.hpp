#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "foldsim/mechanism.hpp"

namespace foldsim::testing {

inline MaterialSpec sheet_material() {
    MaterialSpec m;
    m.name = "sheet";
    m.density = 1250.0;
    m.thickness = 0.004;
    m.youngs_modulus = 4.38327e9;
    m.yield_stress = 4.284e7;
    return m;
}

/// Axis-aligned rectangle strip of given half-width around the segment a->b.
inline std::vector<Eigen::Vector2d> strip_polygon(const Eigen::Vector2d& a,
                                                  const Eigen::Vector2d& b, double half_width) {
    const Eigen::Vector2d dir = (b - a).normalized();
    const Eigen::Vector2d perp{-dir.y(), dir.x()};
    return {a + half_width * perp, b + half_width * perp, b - half_width * perp,
            a - half_width * perp};
}

struct ChainParams {
    int links = 1;
    double link_length = 0.08;
    double link_width = 0.02;
    double stiffness = 0.05;
    double damping = 2e-5;
    double rest_angle = 0.0;
    double gravity = 9.81;
};

/// Open chain of identical links hanging along -y, every hinge about +z
/// through the chain line, swinging in the x-y plane.
inline MechanismSpec chain_pendulum(const ChainParams& params) {
    MechanismSpec mech;
    mech.gravity = {0.0, -params.gravity, 0.0};
    mech.materials.push_back(sheet_material());

    BodySpec base;
    base.id = "base";
    base.newtonian = true;
    base.polygon = {{-0.02, 0.005}, {0.02, 0.005}, {0.02, 0.03}, {-0.02, 0.03}};
    base.layers.push_back({"sheet", std::nullopt});
    mech.bodies.push_back(base);

    const double half_w = params.link_width / 2.0;
    for (int i = 0; i < params.links; ++i) {
        const double top = -params.link_length * i;
        const double bottom = top - params.link_length;
        BodySpec link;
        link.id = "link" + std::to_string(i + 1);
        link.polygon = {{-half_w, bottom}, {half_w, bottom}, {half_w, top}, {-half_w, top}};
        link.layers.push_back({"sheet", std::nullopt});
        mech.bodies.push_back(link);

        JointSpec joint;
        joint.id = "j" + std::to_string(i + 1);
        joint.parent = i == 0 ? "base" : "link" + std::to_string(i);
        joint.child = link.id;
        joint.axis_p1 = {0.0, top, 0.0};
        joint.axis_p2 = {0.0, top, 1.0};
        joint.stiffness = params.stiffness;
        joint.damping = params.damping;
        joint.rest_angle = params.rest_angle;
        mech.joints.push_back(joint);
    }
    return mech;
}

/// Planar single-loop linkage: moving strip links between consecutive pivot
/// points, the base strip closing the chain, every hinge about +z. The flat
/// drawing already satisfies the loop, so C(0) = 0.
inline MechanismSpec planar_linkage(const std::vector<Eigen::Vector2d>& pivots,
                                    double stiffness = 0.02, double damping = 1e-4) {
    const int n = static_cast<int>(pivots.size());
    MechanismSpec mech;
    mech.gravity = {0.0, -9.81, 0.0};
    mech.materials.push_back(sheet_material());

    BodySpec base;
    base.id = "base";
    base.newtonian = true;
    base.polygon = strip_polygon(pivots.front(), pivots.back(), 0.004);
    base.layers.push_back({"sheet", std::nullopt});
    mech.bodies.push_back(base);

    for (int i = 1; i < n; ++i) {
        BodySpec link;
        link.id = "link" + std::to_string(i);
        link.polygon = strip_polygon(pivots[i - 1], pivots[i], 0.004);
        link.layers.push_back({"sheet", std::nullopt});
        mech.bodies.push_back(link);
    }

    const auto axis_at = [](const Eigen::Vector2d& p) {
        return std::pair<Eigen::Vector3d, Eigen::Vector3d>{{p.x(), p.y(), 0.0},
                                                           {p.x(), p.y(), 1.0}};
    };
    for (int i = 0; i < n; ++i) {
        JointSpec joint;
        joint.id = "j" + std::to_string(i + 1);
        if (i == 0) {
            joint.parent = "base";
            joint.child = "link1";
        } else if (i == n - 1) {
            // Closing joint; the declared child is the link that gets split.
            joint.parent = "base";
            joint.child = "link" + std::to_string(n - 1);
        } else {
            joint.parent = "link" + std::to_string(i);
            joint.child = "link" + std::to_string(i + 1);
        }
        const auto [p1, p2] = axis_at(pivots[i]);
        joint.axis_p1 = p1;
        joint.axis_p2 = p2;
        joint.stiffness = stiffness;
        joint.damping = damping;
        mech.joints.push_back(joint);
    }
    return mech;
}

inline MechanismSpec four_bar(double stiffness = 0.02, double damping = 1e-4) {
    return planar_linkage({{0.0, 0.0}, {0.0, 0.05}, {0.12, 0.07}, {0.12, 0.0}}, stiffness,
                          damping);
}

inline MechanismSpec five_bar(double stiffness = 0.02, double damping = 1e-4) {
    return planar_linkage(
        {{0.0, 0.0}, {0.0, 0.04}, {0.05, 0.07}, {0.1, 0.04}, {0.1, 0.0}}, stiffness, damping);
}

/// Spherical six-bar: six plate sectors around the origin, radial fold lines,
/// fabricated flat (the singular configuration). Gravity is normal to the
/// fabrication plane.
inline MechanismSpec spherical_six_bar(double stiffness = 0.02, double damping = 2e-4,
                                       double guess = 0.4) {
    MechanismSpec mech;
    mech.gravity = {0.0, 0.0, -9.81};
    mech.materials.push_back(sheet_material());

    const double radius = 0.06;
    const double degrees[7] = {0.0, 70.0, 120.0, 180.0, 235.0, 295.0, 360.0};
    const auto rim = [&](double deg) {
        const double rad = deg * std::numbers::pi / 180.0;
        return Eigen::Vector2d{radius * std::cos(rad), radius * std::sin(rad)};
    };

    for (int i = 0; i < 6; ++i) {
        BodySpec sector;
        sector.id = "b" + std::to_string(i + 1);
        sector.newtonian = i == 0;
        const Eigen::Vector2d lo = rim(degrees[i]);
        const Eigen::Vector2d hi = rim(degrees[i + 1]);
        const Eigen::Vector2d mid = rim(0.5 * (degrees[i] + degrees[i + 1]));
        sector.polygon = {{0.0, 0.0}, lo, mid, hi};
        sector.layers.push_back({"sheet", std::nullopt});
        mech.bodies.push_back(sector);
    }

    const auto fold_joint = [&](const std::string& id, const std::string& parent,
                                const std::string& child, double deg) {
        JointSpec joint;
        joint.id = id;
        joint.parent = parent;
        joint.child = child;
        const Eigen::Vector2d r = rim(deg);
        joint.axis_p1 = {0.0, 0.0, 0.0};
        joint.axis_p2 = {r.x(), r.y(), 0.0};
        joint.stiffness = stiffness;
        joint.damping = damping;
        return joint;
    };
    mech.joints.push_back(fold_joint("j1", "b1", "b2", 70.0));
    mech.joints.push_back(fold_joint("j2", "b2", "b3", 120.0));
    mech.joints.push_back(fold_joint("j3", "b3", "b4", 180.0));
    mech.joints.push_back(fold_joint("j4", "b4", "b5", 235.0));
    mech.joints.push_back(fold_joint("j5", "b5", "b6", 295.0));
    mech.joints.push_back(fold_joint("j6", "b1", "b6", 360.0));
    mech.joints.front().initial_angle_guess = guess;
    return mech;
}

} // namespace foldsim::testing
