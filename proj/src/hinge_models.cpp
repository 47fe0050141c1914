#include "foldsim/hinge_models.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace foldsim {

std::string to_string(HingeSource source) {
    switch (source) {
        case HingeSource::air_model: return "air_model";
        case HingeSource::width_model: return "width_model";
        case HingeSource::length_model: return "length_model";
        case HingeSource::comprehensive_model: return "comprehensive_model";
        case HingeSource::identified: return "identified";
        case HingeSource::user: return "user";
    }
    return "unknown";
}

BeamLimits beam_limits(double width, double thickness, double span, double lever_x,
                       double flex_length, double sigma_max, double youngs_modulus,
                       int thickness_exponent) {
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0)) {
            throw ValueError(std::string("beam_limits: ") + name + " must be > 0");
        }
    };
    positive(width, "width");
    positive(thickness, "thickness");
    positive(span, "span");
    positive(lever_x, "lever_x");
    positive(flex_length, "flex_length");
    positive(sigma_max, "sigma_max");
    positive(youngs_modulus, "youngs_modulus");
    if (thickness_exponent != 2 && thickness_exponent != 3) {
        throw ValueError("beam_limits: thickness_exponent must be 2 or 3");
    }

    BeamLimits limits;
    limits.f_max = sigma_max * width * std::pow(thickness, thickness_exponent) / (6.0 * span);
    const double bending_stiffness = youngs_modulus * width * thickness * thickness * thickness / 12.0;
    limits.delta_max = limits.f_max * lever_x * lever_x * flex_length / (2.0 * bending_stiffness);
    limits.phi_max = limits.f_max * lever_x * flex_length / bending_stiffness;
    return limits;
}

double QuadraticSurface::evaluate(std::span<const double> point) const {
    if (point.size() != variables.size()) {
        throw ValueError("surface expects " + std::to_string(variables.size()) +
                         " inputs, got " + std::to_string(point.size()));
    }
    double value = constant;
    for (std::size_t i = 0; i < point.size(); ++i) {
        value += point[i] * (linear[i] + point[i] * quadratic[i]);
    }
    return value;
}

const QuadraticSurface& air_damping_model() {
    static const QuadraticSurface model{{"a"}, 1.8e-5, {-0.0042}, {2.34}};
    return model;
}

const QuadraticSurface& width_damping_model() {
    static const QuadraticSurface model{{"w"}, 1.9812e-5, {-3.3197e-4}, {0.0166}};
    return model;
}

const QuadraticSurface& width_stiffness_model() {
    static const QuadraticSurface model{{"w"}, 0.0003, {-0.1361}, {3.0857}};
    return model;
}

const QuadraticSurface& length_damping_model() {
    static const QuadraticSurface model{{"l"}, 8.3506e-5, {-0.0297}, {3.6381}};
    return model;
}

const QuadraticSurface& length_stiffness_model() {
    static const QuadraticSurface model{{"l"}, 0.251, {-7.4590}, {746.6667}};
    return model;
}

const QuadraticSurface& comprehensive_damping_model() {
    static const QuadraticSurface model{
        {"l", "w", "a"}, 5.0855e-5, {-0.227, -0.0023, 0.0129}, {2.0822, 0.0408, -0.8565}};
    return model;
}

const QuadraticSurface& comprehensive_stiffness_model() {
    static const QuadraticSurface model{
        {"l", "w", "a"}, 0.0073, {-7.5305, 0.4298, 0.0}, {762.5397, -1.4444, 0.0}};
    return model;
}

const Interval& air_model_range() {
    static const Interval range{1e-4, 2e-3};
    return range;
}

const Interval& width_model_range() {
    static const Interval range{5e-4, 2e-3};
    return range;
}

const Interval& length_model_range() {
    static const Interval range{1e-3, 9e-3};
    return range;
}

const std::array<Interval, 3>& comprehensive_model_box() {
    static const std::array<Interval, 3> box{Interval{5e-5, 2e-4}, Interval{5e-4, 2e-3},
                                             Interval{1e-4, 1e-3}};
    return box;
}

namespace {

std::string range_warning(const char* name, double value, const Interval& range) {
    std::ostringstream msg;
    msg << name << " = " << value << " is outside the fitted range [" << range.lo << ", "
        << range.hi << "]; extrapolating";
    return msg.str();
}

double clamp_nonnegative(double value, bool& clamped) {
    if (value < 0.0) {
        clamped = true;
        return 0.0;
    }
    return value;
}

} // namespace

EvaluatedDamping damping_from_area(double area) {
    EvaluatedDamping result;
    if (!air_model_range().contains(area)) {
        result.warnings.push_back(range_warning("area", area, air_model_range()));
    }
    const double point[1] = {area};
    result.value = clamp_nonnegative(air_damping_model().evaluate(point), result.clamped);
    return result;
}

HingeProperties properties_from_width(double width) {
    HingeProperties props;
    props.source = HingeSource::width_model;
    if (!width_model_range().contains(width)) {
        props.warnings.push_back(range_warning("width", width, width_model_range()));
    }
    const double point[1] = {width};
    props.stiffness =
        clamp_nonnegative(width_stiffness_model().evaluate(point), props.stiffness_clamped);
    props.damping =
        clamp_nonnegative(width_damping_model().evaluate(point), props.damping_clamped);
    return props;
}

HingeProperties properties_from_length(double length) {
    HingeProperties props;
    props.source = HingeSource::length_model;
    if (!length_model_range().contains(length)) {
        props.warnings.push_back(range_warning("length", length, length_model_range()));
    }
    const double point[1] = {length};
    props.stiffness =
        clamp_nonnegative(length_stiffness_model().evaluate(point), props.stiffness_clamped);
    props.damping =
        clamp_nonnegative(length_damping_model().evaluate(point), props.damping_clamped);
    return props;
}

HingeProperties properties_comprehensive(const HingeDesign& design) {
    HingeProperties props;
    props.source = HingeSource::comprehensive_model;
    const auto& box = comprehensive_model_box();
    if (!box[0].contains(design.length)) {
        props.warnings.push_back(range_warning("length", design.length, box[0]));
    }
    if (!box[1].contains(design.width)) {
        props.warnings.push_back(range_warning("width", design.width, box[1]));
    }
    if (!box[2].contains(design.body_area)) {
        props.warnings.push_back(range_warning("area", design.body_area, box[2]));
    }
    const double point[3] = {design.length, design.width, design.body_area};
    props.stiffness = clamp_nonnegative(comprehensive_stiffness_model().evaluate(point),
                                        props.stiffness_clamped);
    props.damping = clamp_nonnegative(comprehensive_damping_model().evaluate(point),
                                      props.damping_clamped);
    return props;
}

SurfaceFit fit_quadratic_surface(const std::vector<SurfaceSample>& samples,
                                 const std::vector<std::string>& variables) {
    const int d = static_cast<int>(variables.size());
    const int n_coeffs = 1 + 2 * d;
    const int n = static_cast<int>(samples.size());
    if (n < n_coeffs) {
        throw RankError("need at least " + std::to_string(n_coeffs) + " samples for " +
                        std::to_string(d) + " variables, got " + std::to_string(n));
    }

    Eigen::MatrixXd design(n, n_coeffs);
    Eigen::VectorXd measured(n);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(samples[i].point.size()) != d) {
            throw ValueError("sample " + std::to_string(i) + " has wrong dimension");
        }
        design(i, 0) = 1.0;
        for (int j = 0; j < d; ++j) {
            design(i, 1 + 2 * j) = samples[i].point[j];
            design(i, 2 + 2 * j) = samples[i].point[j] * samples[i].point[j];
        }
        measured[i] = samples[i].value;
    }

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < n_coeffs) {
        throw RankError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) +
                        " of " + std::to_string(n_coeffs) + ")");
    }
    const Eigen::VectorXd coeffs = qr.solve(measured);

    SurfaceFit fit;
    fit.surface.variables = variables;
    fit.surface.constant = coeffs[0];
    fit.surface.linear.resize(d);
    fit.surface.quadratic.resize(d);
    for (int j = 0; j < d; ++j) {
        fit.surface.linear[j] = coeffs[1 + 2 * j];
        fit.surface.quadratic[j] = coeffs[2 + 2 * j];
    }
    const Eigen::VectorXd predicted = design * coeffs;
    fit.mae = (predicted - measured).cwiseAbs().mean();
    const double mean_measured = measured.mean();
    fit.mae_percent = mean_measured != 0.0 ? 100.0 * fit.mae / std::abs(mean_measured) : 0.0;
    return fit;
}

} // namespace foldsim
