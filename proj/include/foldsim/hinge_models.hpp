#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "foldsim/errors.hpp"

namespace foldsim {

/// Where a (stiffness, damping) pair came from.
enum class HingeSource {
    air_model,
    width_model,
    length_model,
    comprehensive_model,
    identified,
    user,
};

std::string to_string(HingeSource source);

/// One hinge design point: flexure gap length, total flexure width and the
/// cross-sectional area of the moving body. SI units throughout.
struct HingeDesign {
    double length = 0.0;    // m
    double width = 0.0;     // m
    double body_area = 0.0; // m^2
};

/// Evaluated hinge properties. Negative surface evaluations are clamped to
/// zero and the clamp recorded; evaluations outside the recorded validity
/// range produce a warning, not an error.
struct HingeProperties {
    double stiffness = 0.0; // N*m/rad
    double damping = 0.0;   // N*m*s/rad
    HingeSource source = HingeSource::user;
    bool stiffness_clamped = false;
    bool damping_clamped = false;
    std::vector<std::string> warnings;
};

/// Cantilever flexure limits before plastic deformation.
struct BeamLimits {
    double f_max = 0.0;     // N
    double delta_max = 0.0; // m
    double phi_max = 0.0;   // rad
};

/// f_max = sigma_max * width * thickness^e / (6 * span) with e =
/// thickness_exponent, delta_max = f_max * lever_x^2 * flex_length / (2 E I),
/// phi_max = f_max * lever_x * flex_length / (E I), I = width * thickness^3 / 12.
/// The default exponent 3 mirrors the published formula; exponent 2 is the
/// textbook bending-stress form.
BeamLimits beam_limits(double width, double thickness, double span, double lever_x,
                       double flex_length, double sigma_max, double youngs_modulus,
                       int thickness_exponent = 3);

/// Quadratic surface without cross terms: value = constant +
/// sum_i (linear[i] * x_i + quadratic[i] * x_i^2).
struct QuadraticSurface {
    std::vector<std::string> variables;
    double constant = 0.0;
    std::vector<double> linear;
    std::vector<double> quadratic;

    double evaluate(std::span<const double> point) const;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return lo <= v && v <= hi; }
};

// The published property surfaces. Inputs in meters / square meters.
const QuadraticSurface& air_damping_model();           // b(a)
const QuadraticSurface& width_damping_model();         // b(w)
const QuadraticSurface& width_stiffness_model();       // k(w)
const QuadraticSurface& length_damping_model();        // b(l)
const QuadraticSurface& length_stiffness_model();      // k(l)
const QuadraticSurface& comprehensive_damping_model(); // b(l, w, a)
const QuadraticSurface& comprehensive_stiffness_model(); // k(l, w), no a terms

// Validity ranges of the fitted surfaces. The source specimen dimensions are
// not available, so these are estimates chosen to keep every surface
// positive inside its range.
const Interval& air_model_range();                       // a
const Interval& width_model_range();                     // w
const Interval& length_model_range();                    // l
const std::array<Interval, 3>& comprehensive_model_box(); // l, w, a

struct EvaluatedDamping {
    double value = 0.0;
    bool clamped = false;
    std::vector<std::string> warnings;
};

EvaluatedDamping damping_from_area(double area);
HingeProperties properties_from_width(double width);
HingeProperties properties_from_length(double length);
HingeProperties properties_comprehensive(const HingeDesign& design);

struct SurfaceSample {
    std::vector<double> point;
    double value = 0.0;
};

struct SurfaceFit {
    QuadraticSurface surface;
    double mae = 0.0;         // mean |predicted - measured|
    double mae_percent = 0.0; // MAE as % of the mean measured value
};

/// Ordinary least squares on the basis {1, x_i, x_i^2}. Throws RankError when
/// the design matrix is rank deficient (including too few samples).
SurfaceFit fit_quadratic_surface(const std::vector<SurfaceSample>& samples,
                                 const std::vector<std::string>& variables);

} // namespace foldsim
