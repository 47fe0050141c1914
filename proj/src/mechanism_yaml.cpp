#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "foldsim/mechanism.hpp"

namespace foldsim {

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw SchemaError(path + ": " + message);
}

void require_keys(const YAML::Node& node, const std::string& path,
                  const std::set<std::string>& allowed) {
    if (!node.IsMap()) fail(path, "expected a mapping");
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (allowed.find(key) == allowed.end()) {
            fail(path, "unknown key '" + key + "'");
        }
    }
}

YAML::Node require(const YAML::Node& node, const std::string& path, const std::string& key) {
    const YAML::Node child = node[key];
    if (!child) fail(path, "missing required key '" + key + "'");
    return child;
}

double as_double(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) fail(path, "expected a number");
    try {
        const double value = node.as<double>();
        if (!std::isfinite(value)) fail(path, "expected a finite number");
        return value;
    } catch (const YAML::Exception&) {
        fail(path, "expected a number");
    }
}

std::string as_string(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) fail(path, "expected a string");
    return node.as<std::string>();
}

bool as_bool(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) fail(path, "expected a boolean");
    try {
        return node.as<bool>();
    } catch (const YAML::Exception&) {
        fail(path, "expected a boolean");
    }
}

Eigen::Vector2d as_vec2(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 2) fail(path, "expected [x, y]");
    return {as_double(node[0], path + "[0]"), as_double(node[1], path + "[1]")};
}

Eigen::Vector3d as_vec3(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence() || node.size() != 3) fail(path, "expected [x, y, z]");
    return {as_double(node[0], path + "[0]"), as_double(node[1], path + "[1]"),
            as_double(node[2], path + "[2]")};
}

MaterialSpec parse_material(const YAML::Node& node, const std::string& path) {
    require_keys(node, path, {"name", "density", "thickness", "youngs_modulus", "yield_stress"});
    MaterialSpec m;
    m.name = as_string(require(node, path, "name"), path + ".name");
    m.density = as_double(require(node, path, "density"), path + ".density");
    m.thickness = as_double(require(node, path, "thickness"), path + ".thickness");
    m.youngs_modulus = as_double(require(node, path, "youngs_modulus"), path + ".youngs_modulus");
    m.yield_stress = as_double(require(node, path, "yield_stress"), path + ".yield_stress");
    return m;
}

BodySpec parse_body(const YAML::Node& node, const std::string& path) {
    require_keys(node, path, {"id", "polygon", "layers", "point_masses", "newtonian"});
    BodySpec b;
    b.id = as_string(require(node, path, "id"), path + ".id");
    const YAML::Node poly = require(node, path, "polygon");
    if (!poly.IsSequence()) fail(path + ".polygon", "expected a list of [x, y] vertices");
    for (std::size_t i = 0; i < poly.size(); ++i) {
        b.polygon.push_back(as_vec2(poly[i], path + ".polygon[" + std::to_string(i) + "]"));
    }
    if (const YAML::Node layers = node["layers"]) {
        if (!layers.IsSequence()) fail(path + ".layers", "expected a list");
        for (std::size_t i = 0; i < layers.size(); ++i) {
            const std::string lpath = path + ".layers[" + std::to_string(i) + "]";
            require_keys(layers[i], lpath, {"material", "thickness"});
            LayerSpec layer;
            layer.material = as_string(require(layers[i], lpath, "material"), lpath + ".material");
            if (const YAML::Node t = layers[i]["thickness"]) {
                layer.thickness = as_double(t, lpath + ".thickness");
            }
            b.layers.push_back(layer);
        }
    }
    if (const YAML::Node pms = node["point_masses"]) {
        if (!pms.IsSequence()) fail(path + ".point_masses", "expected a list");
        for (std::size_t i = 0; i < pms.size(); ++i) {
            const std::string ppath = path + ".point_masses[" + std::to_string(i) + "]";
            require_keys(pms[i], ppath, {"position", "mass"});
            PointMass pm;
            pm.position = as_vec2(require(pms[i], ppath, "position"), ppath + ".position");
            pm.mass = as_double(require(pms[i], ppath, "mass"), ppath + ".mass");
            b.point_masses.push_back(pm);
        }
    }
    if (const YAML::Node newt = node["newtonian"]) {
        b.newtonian = as_bool(newt, path + ".newtonian");
    }
    return b;
}

JointSpec parse_joint(const YAML::Node& node, const std::string& path) {
    require_keys(node, path,
                 {"id", "parent", "child", "axis", "stiffness", "damping", "rest_angle",
                  "external_torque", "initial_angle_guess"});
    JointSpec j;
    j.id = as_string(require(node, path, "id"), path + ".id");
    j.parent = as_string(require(node, path, "parent"), path + ".parent");
    j.child = as_string(require(node, path, "child"), path + ".child");
    const YAML::Node axis = require(node, path, "axis");
    if (!axis.IsSequence() || axis.size() != 2) {
        fail(path + ".axis", "expected two [x, y, z] points");
    }
    j.axis_p1 = as_vec3(axis[0], path + ".axis[0]");
    j.axis_p2 = as_vec3(axis[1], path + ".axis[1]");
    if (const YAML::Node n = node["stiffness"]) j.stiffness = as_double(n, path + ".stiffness");
    if (const YAML::Node n = node["damping"]) j.damping = as_double(n, path + ".damping");
    if (const YAML::Node n = node["rest_angle"]) j.rest_angle = as_double(n, path + ".rest_angle");
    if (const YAML::Node n = node["initial_angle_guess"]) {
        j.initial_angle_guess = as_double(n, path + ".initial_angle_guess");
    }
    if (const YAML::Node sched = node["external_torque"]) {
        if (!sched.IsSequence()) fail(path + ".external_torque", "expected a list");
        for (std::size_t i = 0; i < sched.size(); ++i) {
            const std::string spath = path + ".external_torque[" + std::to_string(i) + "]";
            require_keys(sched[i], spath, {"t", "torque"});
            TorqueStep step;
            step.t = as_double(require(sched[i], spath, "t"), spath + ".t");
            step.torque = as_double(require(sched[i], spath, "torque"), spath + ".torque");
            j.external_torque.push_back(step);
        }
    }
    return j;
}

} // namespace

MechanismSpec parse_mechanism(const std::string& source) {
    YAML::Node root;
    try {
        root = YAML::Load(source);
    } catch (const YAML::Exception& e) {
        throw SchemaError(std::string("not valid YAML: ") + e.what());
    }
    require_keys(root, "document", {"schema", "gravity", "materials", "bodies", "joints"});
    const YAML::Node schema = require(root, "document", "schema");
    if (static_cast<int>(as_double(schema, "schema")) != kSchemaVersion) {
        throw SchemaError("unsupported schema version '" + schema.as<std::string>() +
                          "', expected " + std::to_string(kSchemaVersion));
    }

    MechanismSpec mech;
    mech.gravity = as_vec3(require(root, "document", "gravity"), "gravity");

    const YAML::Node materials = require(root, "document", "materials");
    if (!materials.IsSequence() && !materials.IsNull()) {
        fail("materials", "expected a list");
    }
    for (std::size_t i = 0; i < materials.size(); ++i) {
        mech.materials.push_back(
            parse_material(materials[i], "materials[" + std::to_string(i) + "]"));
    }

    const YAML::Node bodies = require(root, "document", "bodies");
    if (!bodies.IsSequence()) fail("bodies", "expected a list");
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        mech.bodies.push_back(parse_body(bodies[i], "bodies[" + std::to_string(i) + "]"));
    }

    const YAML::Node joints = require(root, "document", "joints");
    if (!joints.IsSequence() && !joints.IsNull()) fail("joints", "expected a list");
    for (std::size_t i = 0; i < joints.size(); ++i) {
        mech.joints.push_back(parse_joint(joints[i], "joints[" + std::to_string(i) + "]"));
    }

    validate(mech);
    return mech;
}

MechanismSpec parse_mechanism_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SchemaError("cannot open mechanism file '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_mechanism(buffer.str());
}

namespace {

std::string fmt(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

} // namespace

std::string serialize_mechanism(const MechanismSpec& mech) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "schema" << YAML::Value << kSchemaVersion;
    out << YAML::Key << "gravity" << YAML::Value << YAML::Flow << YAML::BeginSeq
        << fmt(mech.gravity.x()) << fmt(mech.gravity.y()) << fmt(mech.gravity.z()) << YAML::EndSeq;

    out << YAML::Key << "materials" << YAML::Value << YAML::BeginSeq;
    for (const MaterialSpec& m : mech.materials) {
        out << YAML::BeginMap;
        out << YAML::Key << "name" << YAML::Value << m.name;
        out << YAML::Key << "density" << YAML::Value << fmt(m.density);
        out << YAML::Key << "thickness" << YAML::Value << fmt(m.thickness);
        out << YAML::Key << "youngs_modulus" << YAML::Value << fmt(m.youngs_modulus);
        out << YAML::Key << "yield_stress" << YAML::Value << fmt(m.yield_stress);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "bodies" << YAML::Value << YAML::BeginSeq;
    for (const BodySpec& b : mech.bodies) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << b.id;
        if (b.newtonian) out << YAML::Key << "newtonian" << YAML::Value << true;
        out << YAML::Key << "polygon" << YAML::Value << YAML::BeginSeq;
        for (const Eigen::Vector2d& v : b.polygon) {
            out << YAML::Flow << YAML::BeginSeq << fmt(v.x()) << fmt(v.y()) << YAML::EndSeq;
        }
        out << YAML::EndSeq;
        if (!b.layers.empty()) {
            out << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
            for (const LayerSpec& layer : b.layers) {
                out << YAML::BeginMap;
                out << YAML::Key << "material" << YAML::Value << layer.material;
                if (layer.thickness) {
                    out << YAML::Key << "thickness" << YAML::Value << fmt(*layer.thickness);
                }
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
        }
        if (!b.point_masses.empty()) {
            out << YAML::Key << "point_masses" << YAML::Value << YAML::BeginSeq;
            for (const PointMass& pm : b.point_masses) {
                out << YAML::BeginMap;
                out << YAML::Key << "position" << YAML::Value << YAML::Flow << YAML::BeginSeq
                    << fmt(pm.position.x()) << fmt(pm.position.y()) << YAML::EndSeq;
                out << YAML::Key << "mass" << YAML::Value << fmt(pm.mass);
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "joints" << YAML::Value << YAML::BeginSeq;
    for (const JointSpec& j : mech.joints) {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << j.id;
        out << YAML::Key << "parent" << YAML::Value << j.parent;
        out << YAML::Key << "child" << YAML::Value << j.child;
        out << YAML::Key << "axis" << YAML::Value << YAML::BeginSeq;
        out << YAML::Flow << YAML::BeginSeq << fmt(j.axis_p1.x()) << fmt(j.axis_p1.y())
            << fmt(j.axis_p1.z()) << YAML::EndSeq;
        out << YAML::Flow << YAML::BeginSeq << fmt(j.axis_p2.x()) << fmt(j.axis_p2.y())
            << fmt(j.axis_p2.z()) << YAML::EndSeq;
        out << YAML::EndSeq;
        out << YAML::Key << "stiffness" << YAML::Value << fmt(j.stiffness);
        out << YAML::Key << "damping" << YAML::Value << fmt(j.damping);
        out << YAML::Key << "rest_angle" << YAML::Value << fmt(j.rest_angle);
        if (j.initial_angle_guess) {
            out << YAML::Key << "initial_angle_guess" << YAML::Value << fmt(*j.initial_angle_guess);
        }
        if (!j.external_torque.empty()) {
            out << YAML::Key << "external_torque" << YAML::Value << YAML::BeginSeq;
            for (const TorqueStep& step : j.external_torque) {
                out << YAML::BeginMap;
                out << YAML::Key << "t" << YAML::Value << fmt(step.t);
                out << YAML::Key << "torque" << YAML::Value << fmt(step.torque);
                out << YAML::EndMap;
            }
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;

    return std::string(out.c_str()) + "\n";
}

} // namespace foldsim
