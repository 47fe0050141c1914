#pragma once

#include <Eigen/Dense>

#include <cmath>

namespace foldsim {

/// Unit quaternion w + x*i + y*j + z*k, Hamilton convention.
struct Quaternion {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    Quaternion normalized() const {
        const double n = norm();
        return {w / n, x / n, y / n, z / n};
    }

    Quaternion conjugate() const { return {w, -x, -y, -z}; }

    Quaternion operator*(const Quaternion& o) const {
        return {w * o.w - x * o.x - y * o.y - z * o.z,
                w * o.x + x * o.w + y * o.z - z * o.y,
                w * o.y - x * o.z + y * o.w + z * o.x,
                w * o.z + x * o.y - y * o.x + z * o.w};
    }

    Eigen::Vector3d vec() const { return {x, y, z}; }

    double dot(const Quaternion& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

    Eigen::Matrix3d rotation_matrix() const {
        Eigen::Matrix3d m;
        m << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
            2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
        return m;
    }

    static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle) {
        const Eigen::Vector3d u = axis.normalized();
        const double half = 0.5 * angle;
        const double s = std::sin(half);
        return {std::cos(half), s * u.x(), s * u.y(), s * u.z()};
    }
};

/// Rotation of the second frame relative to the first: q2 * q1^-1,
/// normalized. For unit quaternions the inverse is the conjugate.
inline Quaternion relative_quaternion(const Quaternion& q1, const Quaternion& q2) {
    return (q2 * q1.conjugate()).normalized();
}

} // namespace foldsim
