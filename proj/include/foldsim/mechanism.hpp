#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "foldsim/errors.hpp"

namespace foldsim {

/// One laminate sheet material. Thickness here is the as-manufactured sheet
/// thickness and acts as the default for layers that do not override it.
struct MaterialSpec {
    std::string name;
    double density = 0.0;        // kg/m^3
    double thickness = 0.0;      // m
    double youngs_modulus = 0.0; // Pa
    double yield_stress = 0.0;   // Pa
};

struct LayerSpec {
    std::string material;              // MaterialSpec::name
    std::optional<double> thickness;   // m; defaults to the material thickness
};

/// Lumped mass fixed to a body (tracking markers, fasteners, ...).
struct PointMass {
    Eigen::Vector2d position{0.0, 0.0}; // m, layup plane
    double mass = 0.0;                  // kg
};

/// A rigid laminate body: a simple polygon in the layup (flat-state) plane,
/// extruded by its layer stack.
struct BodySpec {
    std::string id;
    std::vector<Eigen::Vector2d> polygon; // m, layup plane, >= 3 vertices
    std::vector<LayerSpec> layers;
    std::vector<PointMass> point_masses;
    bool newtonian = false;
};

/// Breakpoint of a piecewise-constant torque schedule. The schedule value at
/// time t is the torque of the latest breakpoint with breakpoint time <= t,
/// and 0 before the first breakpoint.
struct TorqueStep {
    double t = 0.0;      // s
    double torque = 0.0; // N*m
};

/// Revolute flexure hinge between two bodies. The hinge line is given by two
/// distinct points in the flat-state frame and is carried by the parent body.
struct JointSpec {
    std::string id;
    std::string parent;
    std::string child;
    Eigen::Vector3d axis_p1{0.0, 0.0, 0.0}; // m, flat-state frame
    Eigen::Vector3d axis_p2{0.0, 0.0, 0.0};
    double stiffness = 0.0;  // N*m/rad
    double damping = 0.0;    // N*m*s/rad
    double rest_angle = 0.0; // rad
    std::vector<TorqueStep> external_torque; // sorted by t, strictly increasing
    std::optional<double> initial_angle_guess; // rad

    /// Schedule value at time t.
    double torque_at(double t) const;
    /// Schedule value just below t = 0 (the value held through burn-in).
    double torque_before_zero() const;
};

struct MechanismSpec {
    std::vector<MaterialSpec> materials;
    std::vector<BodySpec> bodies;
    std::vector<JointSpec> joints;
    Eigen::Vector3d gravity{0.0, 0.0, 0.0}; // m/s^2

    const MaterialSpec* find_material(const std::string& name) const;
    const BodySpec* find_body(const std::string& id) const;
    const JointSpec* find_joint(const std::string& id) const;
    /// Index of the unique newtonian body; -1 if absent.
    int newtonian_index() const;
};

/// Mass, center of mass and inertia tensor of one body in flat-state
/// coordinates. Inertia is taken about the center of mass.
struct MassProperties {
    double mass = 0.0;
    Eigen::Vector3d com{0.0, 0.0, 0.0};
    Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
};

/// Parse and fully validate a mechanism document.
/// Throws SchemaError, ReferenceError, TopologyError or ValueError.
MechanismSpec parse_mechanism(const std::string& source);

/// Convenience wrapper reading the document from a file.
MechanismSpec parse_mechanism_file(const std::string& path);

/// Emit the canonical YAML form. parse(serialize(m)) reproduces m exactly;
/// doubles are written with 17 significant digits.
std::string serialize_mechanism(const MechanismSpec& mech);

/// Validation used by parse_mechanism, callable on programmatically built
/// specs as well.
void validate(const MechanismSpec& mech);

/// Thin-plate mass properties: each layer contributes density * thickness *
/// polygon area as a uniform lamina in the layup plane; point masses are
/// added through the parallel-axis theorem.
MassProperties compute_mass_properties(const BodySpec& body,
                                       const std::vector<MaterialSpec>& materials);

// Layup-plane polygon helpers.
double polygon_signed_area(const std::vector<Eigen::Vector2d>& polygon);
Eigen::Vector2d polygon_centroid(const std::vector<Eigen::Vector2d>& polygon);
bool polygon_is_simple(const std::vector<Eigen::Vector2d>& polygon);

} // namespace foldsim
