#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foldsim/errors.hpp"
#include "foldsim/hinge_models.hpp"
#include "foldsim/quaternion.hpp"

namespace foldsim {

/// Per-body unit-quaternion motion capture record on a uniform time grid.
/// Dropped samples are absent optionals.
struct MocapRecording {
    double rate = 0.0; // Hz
    std::vector<std::string> bodies;
    std::vector<double> t;
    std::vector<std::vector<std::optional<Quaternion>>> samples; // [time][body]

    int body_index(const std::string& id) const;
};

/// CSV with header `t,<body>_qw,<body>_qx,<body>_qy,<body>_qz,...`; a sample
/// is missing when all four of its cells are blank.
MocapRecording parse_mocap_csv(const std::string& text);
MocapRecording parse_mocap_csv_file(const std::string& path);

/// Continuous signed joint angle extracted from relative quaternions.
struct AngleSeries {
    std::vector<double> t;
    std::vector<double> theta;
    Eigen::Vector3d axis{0.0, 0.0, 1.0}; // reference axis of the sign convention
    std::vector<int> interpolated;       // indices reconstructed across dropouts
    bool truncated = false;              // a dropout longer than 5 samples cut the series
};

/// Axis-angle extraction with sign continuity: the raw angle is always
/// positive, so whenever the extracted axis flips against the reference axis
/// (first sample with angle > 1e-3 rad) the angle is negated; the result is
/// then unwrapped. Dropouts up to 5 samples are linearly interpolated in
/// quaternion components and renormalized; a longer dropout keeps only the
/// longest contiguous stretch.
AngleSeries signed_angle_series(const MocapRecording& rec, const std::string& parent,
                                const std::string& child);

struct FourierFit {
    double fundamental = 0.0; // Hz, of the fitted basis
    double dominant_hz = 0.0; // Hz, spectrum peak of the input
    double a0 = 0.0;
    std::vector<double> cos_coeffs; // rad
    std::vector<double> sin_coeffs; // rad
    double residual_rms = 0.0;      // rad

    int order() const { return static_cast<int>(cos_coeffs.size()); }
    double evaluate(double t) const;
};

/// Trigonometric least squares on {1, cos(2 pi k f t), sin(2 pi k f t)}.
/// The basis fundamental starts from the dominant spectrum peak (3-point
/// parabolic refinement); because a decaying oscillation is not representable
/// on harmonics of its own peak, subharmonics of the peak are also tried and
/// the fundamental is refined by residual minimization. For a periodic input
/// the peak itself wins and fundamental == dominant_hz.
FourierFit fourier_fit(const AngleSeries& series, int order);

struct FsDerivatives {
    Eigen::VectorXd theta;
    Eigen::VectorXd thetadot;
    Eigen::VectorXd thetaddot;
};

/// Exact term-by-term derivatives of the fitted series.
FsDerivatives fs_derivatives(const FourierFit& fit, std::span<const double> t);

struct PendulumGeometry {
    double inertia_com = 0.0;  // I_G about the COM, kg*m^2
    double mass = 0.0;         // kg
    double com_distance = 0.0; // r, hinge line to COM, m
    double gravity = 9.80665;  // m/s^2
};

struct IdentifiedKb {
    double stiffness = 0.0;
    double damping = 0.0;
    double residual_rms = 0.0;
};

/// Least squares in (k, b) for (I_G + m r^2) tdd = -k t - b td - m g r sin t.
/// Throws RankError when theta and thetadot are collinear or constant.
IdentifiedKb identify_kb(std::span<const double> theta, std::span<const double> thetadot,
                         std::span<const double> thetaddot, const PendulumGeometry& geometry);

struct AreaDampingSample {
    double area = 0.0;    // m^2
    double damping = 0.0; // N*m*s/rad, total measured
};

struct AirDampingSplit {
    SurfaceFit total;     // quadratic fit of total damping vs area
    QuadraticSurface air; // total with the material damping removed from the constant
};

/// Fits the damping-vs-area quadratic and separates the constant material
/// contribution from the area-dependent air contribution.
AirDampingSplit split_air_damping(const std::vector<AreaDampingSample>& samples,
                                  double material_damping = 0.0);

} // namespace foldsim
