#include "foldsim/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <sstream>

namespace foldsim {

double JointSpec::torque_at(double t) const {
    double value = 0.0;
    for (const TorqueStep& step : external_torque) {
        if (step.t <= t) {
            value = step.torque;
        } else {
            break;
        }
    }
    return value;
}

double JointSpec::torque_before_zero() const {
    double value = 0.0;
    for (const TorqueStep& step : external_torque) {
        if (step.t < 0.0) {
            value = step.torque;
        } else {
            break;
        }
    }
    return value;
}

const MaterialSpec* MechanismSpec::find_material(const std::string& name) const {
    for (const MaterialSpec& m : materials) {
        if (m.name == name) return &m;
    }
    return nullptr;
}

const BodySpec* MechanismSpec::find_body(const std::string& id) const {
    for (const BodySpec& b : bodies) {
        if (b.id == id) return &b;
    }
    return nullptr;
}

const JointSpec* MechanismSpec::find_joint(const std::string& id) const {
    for (const JointSpec& j : joints) {
        if (j.id == id) return &j;
    }
    return nullptr;
}

int MechanismSpec::newtonian_index() const {
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        if (bodies[i].newtonian) return static_cast<int>(i);
    }
    return -1;
}

double polygon_signed_area(const std::vector<Eigen::Vector2d>& polygon) {
    double twice_area = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = polygon[i];
        const Eigen::Vector2d& b = polygon[(i + 1) % n];
        twice_area += a.x() * b.y() - b.x() * a.y();
    }
    return 0.5 * twice_area;
}

Eigen::Vector2d polygon_centroid(const std::vector<Eigen::Vector2d>& polygon) {
    const double area = polygon_signed_area(polygon);
    if (std::abs(area) < 1e-300) {
        throw ValueError("polygon has zero area, centroid undefined");
    }
    Eigen::Vector2d c{0.0, 0.0};
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = polygon[i];
        const Eigen::Vector2d& b = polygon[(i + 1) % n];
        const double cross = a.x() * b.y() - b.x() * a.y();
        c += (a + b) * cross;
    }
    return c / (6.0 * area);
}

namespace {

// Proper segment intersection test, end points excluded for adjacent edges.
double orient(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
    return std::min(a.x(), b.x()) - 1e-15 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-15 &&
           std::min(a.y(), b.y()) - 1e-15 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-15;
}

bool segments_intersect(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                        const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
    const double o1 = orient(p1, p2, q1);
    const double o2 = orient(p1, p2, q2);
    const double o3 = orient(q1, q2, p1);
    const double o4 = orient(q1, q2, p2);
    if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) &&
        o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0) {
        return true;
    }
    if (o1 == 0 && on_segment(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment(q1, q2, p2)) return true;
    return false;
}

} // namespace

bool polygon_is_simple(const std::vector<Eigen::Vector2d>& polygon) {
    const std::size_t n = polygon.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a1 = polygon[i];
        const Eigen::Vector2d& a2 = polygon[(i + 1) % n];
        if ((a2 - a1).norm() < 1e-15) return false; // repeated vertex
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
            if (adjacent) continue;
            const Eigen::Vector2d& b1 = polygon[j];
            const Eigen::Vector2d& b2 = polygon[(j + 1) % n];
            if (segments_intersect(a1, a2, b1, b2)) return false;
        }
    }
    return true;
}

MassProperties compute_mass_properties(const BodySpec& body,
                                       const std::vector<MaterialSpec>& materials) {
    const std::vector<Eigen::Vector2d>& poly = body.polygon;
    const double signed_area = polygon_signed_area(poly);
    const double area = std::abs(signed_area);
    if (area < 1e-15) {
        throw ValueError("body '" + body.id + "': polygon has zero area");
    }
    const double sign = signed_area >= 0.0 ? 1.0 : -1.0;
    const Eigen::Vector2d centroid = polygon_centroid(poly);

    // Unit-density second moments about the origin (Green's theorem).
    double ixx = 0.0, iyy = 0.0, ixy = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d& a = poly[i];
        const Eigen::Vector2d& b = poly[(i + 1) % n];
        const double cross = a.x() * b.y() - b.x() * a.y();
        iyy += (a.x() * a.x() + a.x() * b.x() + b.x() * b.x()) * cross;
        ixx += (a.y() * a.y() + a.y() * b.y() + b.y() * b.y()) * cross;
        ixy += (a.x() * b.y() + 2.0 * a.x() * a.y() + 2.0 * b.x() * b.y() + b.x() * a.y()) * cross;
    }
    ixx = sign * ixx / 12.0;
    iyy = sign * iyy / 12.0;
    ixy = sign * ixy / 24.0;
    // Shift to the polygon centroid.
    ixx -= area * centroid.y() * centroid.y();
    iyy -= area * centroid.x() * centroid.x();
    ixy -= area * centroid.x() * centroid.y();

    // Surface density of the layer stack.
    double surface_density = 0.0; // kg/m^2
    for (const LayerSpec& layer : body.layers) {
        const MaterialSpec* mat = nullptr;
        for (const MaterialSpec& m : materials) {
            if (m.name == layer.material) {
                mat = &m;
                break;
            }
        }
        if (mat == nullptr) {
            throw ReferenceError("body '" + body.id + "': unknown material '" + layer.material + "'");
        }
        surface_density += mat->density * layer.thickness.value_or(mat->thickness);
    }

    struct Component {
        double mass;
        Eigen::Vector3d com;
        Eigen::Matrix3d inertia; // about own com
    };
    std::vector<Component> parts;
    if (surface_density > 0.0) {
        Eigen::Matrix3d inertia = Eigen::Matrix3d::Zero();
        inertia(0, 0) = surface_density * ixx;
        inertia(1, 1) = surface_density * iyy;
        inertia(0, 1) = inertia(1, 0) = -surface_density * ixy;
        inertia(2, 2) = surface_density * (ixx + iyy);
        parts.push_back({surface_density * area,
                         Eigen::Vector3d{centroid.x(), centroid.y(), 0.0}, inertia});
    }
    for (const PointMass& pm : body.point_masses) {
        parts.push_back({pm.mass, Eigen::Vector3d{pm.position.x(), pm.position.y(), 0.0},
                         Eigen::Matrix3d::Zero()});
    }

    MassProperties props;
    for (const Component& part : parts) {
        props.mass += part.mass;
        props.com += part.mass * part.com;
    }
    if (props.mass <= 0.0) {
        throw ValueError("body '" + body.id + "': total mass is not positive");
    }
    props.com /= props.mass;
    for (const Component& part : parts) {
        const Eigen::Vector3d d = part.com - props.com;
        props.inertia += part.inertia +
                         part.mass * (d.squaredNorm() * Eigen::Matrix3d::Identity() - d * d.transpose());
    }
    return props;
}

void validate(const MechanismSpec& mech) {
    // Materials.
    {
        std::set<std::string> names;
        for (const MaterialSpec& m : mech.materials) {
            if (m.name.empty()) throw SchemaError("material with empty name");
            if (!names.insert(m.name).second) {
                throw SchemaError("duplicate material name '" + m.name + "'");
            }
            if (!(m.density > 0.0)) throw ValueError("material '" + m.name + "': density must be > 0");
            if (!(m.thickness > 0.0)) throw ValueError("material '" + m.name + "': thickness must be > 0");
            if (!(m.youngs_modulus > 0.0)) {
                throw ValueError("material '" + m.name + "': youngs_modulus must be > 0");
            }
            if (!(m.yield_stress > 0.0)) {
                throw ValueError("material '" + m.name + "': yield_stress must be > 0");
            }
        }
    }

    // Bodies.
    if (mech.bodies.empty()) throw SchemaError("mechanism has no bodies");
    int newtonian_count = 0;
    {
        std::set<std::string> ids;
        for (const BodySpec& b : mech.bodies) {
            if (b.id.empty()) throw SchemaError("body with empty id");
            if (!ids.insert(b.id).second) throw SchemaError("duplicate body id '" + b.id + "'");
            if (b.polygon.size() < 3) {
                throw ValueError("body '" + b.id + "': polygon needs at least 3 vertices");
            }
            if (!polygon_is_simple(b.polygon)) {
                throw ValueError("body '" + b.id + "': polygon is self-intersecting or degenerate");
            }
            for (const LayerSpec& layer : b.layers) {
                if (mech.find_material(layer.material) == nullptr) {
                    throw ReferenceError("body '" + b.id + "': unknown material '" + layer.material + "'");
                }
                if (layer.thickness && !(*layer.thickness > 0.0)) {
                    throw ValueError("body '" + b.id + "': layer thickness must be > 0");
                }
            }
            for (const PointMass& pm : b.point_masses) {
                if (!(pm.mass >= 0.0)) {
                    throw ValueError("body '" + b.id + "': point mass must be >= 0");
                }
            }
            if (b.newtonian) ++newtonian_count;
            compute_mass_properties(b, mech.materials); // throws on zero area / zero mass
        }
    }
    if (newtonian_count != 1) {
        throw SchemaError("exactly one body must be newtonian, found " +
                          std::to_string(newtonian_count));
    }

    // Joints.
    {
        std::set<std::string> ids;
        for (const JointSpec& j : mech.joints) {
            if (j.id.empty()) throw SchemaError("joint with empty id");
            if (!ids.insert(j.id).second) throw SchemaError("duplicate joint id '" + j.id + "'");
            if (mech.find_body(j.parent) == nullptr) {
                throw ReferenceError("joint '" + j.id + "': unknown parent body '" + j.parent + "'");
            }
            if (mech.find_body(j.child) == nullptr) {
                throw ReferenceError("joint '" + j.id + "': unknown child body '" + j.child + "'");
            }
            if (j.parent == j.child) {
                throw TopologyError("joint '" + j.id + "' connects body '" + j.parent + "' to itself");
            }
            if ((j.axis_p2 - j.axis_p1).norm() < 1e-12) {
                throw ValueError("joint '" + j.id + "': axis points coincide");
            }
            if (!(j.stiffness >= 0.0)) throw ValueError("joint '" + j.id + "': stiffness must be >= 0");
            if (!(j.damping >= 0.0)) throw ValueError("joint '" + j.id + "': damping must be >= 0");
            for (std::size_t i = 1; i < j.external_torque.size(); ++i) {
                if (!(j.external_torque[i].t > j.external_torque[i - 1].t)) {
                    throw SchemaError("joint '" + j.id +
                                      "': external_torque times must be strictly increasing");
                }
            }
        }
    }

    // Graph shape: connected, at most one independent cycle.
    {
        std::map<std::string, std::vector<std::string>> adjacency;
        for (const BodySpec& b : mech.bodies) adjacency[b.id];
        for (const JointSpec& j : mech.joints) {
            adjacency[j.parent].push_back(j.child);
            adjacency[j.child].push_back(j.parent);
        }
        std::set<std::string> seen;
        std::queue<std::string> queue;
        queue.push(mech.bodies.front().id);
        seen.insert(mech.bodies.front().id);
        while (!queue.empty()) {
            const std::string u = queue.front();
            queue.pop();
            for (const std::string& v : adjacency[u]) {
                if (seen.insert(v).second) queue.push(v);
            }
        }
        if (seen.size() != mech.bodies.size()) {
            throw TopologyError("body/joint graph is disconnected");
        }
        const int cycles = static_cast<int>(mech.joints.size()) -
                           static_cast<int>(mech.bodies.size()) + 1;
        if (cycles > 1) {
            throw TopologyError("mechanism has " + std::to_string(cycles) +
                                " independent loops, at most one is supported");
        }
    }
}

} // namespace foldsim
