#include "foldsim/identification.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace foldsim {

namespace {

constexpr double kAxisAngleThreshold = 1e-3; // rad
constexpr int kMaxInterpolatedGap = 5;
constexpr int kSpectrumMaxSamples = 2048;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        const auto begin = cell.find_first_not_of(" \t\r");
        const auto end = cell.find_last_not_of(" \t\r");
        cells.push_back(begin == std::string::npos ? "" : cell.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

} // namespace

int MocapRecording::body_index(const std::string& id) const {
    for (std::size_t i = 0; i < bodies.size(); ++i) {
        if (bodies[i] == id) return static_cast<int>(i);
    }
    return -1;
}

MocapRecording parse_mocap_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("mocap csv is empty");

    const std::vector<std::string> header = split_csv_line(line);
    if (header.empty() || header[0] != "t") {
        throw SchemaError("mocap csv must start with a 't' column");
    }
    if ((header.size() - 1) % 4 != 0 || header.size() == 1) {
        throw SchemaError("mocap csv needs four quaternion columns per body");
    }

    MocapRecording rec;
    const char* suffixes[4] = {"_qw", "_qx", "_qy", "_qz"};
    for (std::size_t c = 1; c < header.size(); c += 4) {
        std::string body;
        for (int s = 0; s < 4; ++s) {
            const std::string& name = header[c + s];
            const std::string suffix = suffixes[s];
            if (name.size() <= suffix.size() ||
                name.substr(name.size() - suffix.size()) != suffix) {
                throw SchemaError("mocap column '" + name + "' does not end in '" + suffix + "'");
            }
            const std::string prefix = name.substr(0, name.size() - suffix.size());
            if (s == 0) {
                body = prefix;
            } else if (prefix != body) {
                throw SchemaError("mocap columns for body '" + body + "' are not contiguous");
            }
        }
        rec.bodies.push_back(body);
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw SchemaError("mocap csv line " + std::to_string(line_no) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(header.size()));
        }
        try {
            rec.t.push_back(std::stod(cells[0]));
        } catch (...) {
            throw SchemaError("mocap csv line " + std::to_string(line_no) + ": bad time value");
        }
        std::vector<std::optional<Quaternion>> row;
        for (std::size_t c = 1; c < cells.size(); c += 4) {
            int blanks = 0;
            for (int s = 0; s < 4; ++s) blanks += cells[c + s].empty() ? 1 : 0;
            if (blanks == 4) {
                row.push_back(std::nullopt);
                continue;
            }
            if (blanks != 0) {
                throw SchemaError("mocap csv line " + std::to_string(line_no) +
                                  ": partially blank quaternion");
            }
            Quaternion q;
            try {
                q.w = std::stod(cells[c]);
                q.x = std::stod(cells[c + 1]);
                q.y = std::stod(cells[c + 2]);
                q.z = std::stod(cells[c + 3]);
            } catch (...) {
                throw SchemaError("mocap csv line " + std::to_string(line_no) +
                                  ": bad quaternion value");
            }
            if (q.norm() < 1e-6) {
                throw ValueError("mocap csv line " + std::to_string(line_no) +
                                 ": quaternion norm too small to normalize");
            }
            row.push_back(q.normalized());
        }
        rec.samples.push_back(std::move(row));
    }
    if (rec.t.size() < 2) throw SchemaError("mocap csv needs at least two samples");

    const double duration = rec.t.back() - rec.t.front();
    if (!(duration > 0.0)) throw ValueError("mocap timestamps must increase");
    rec.rate = (static_cast<double>(rec.t.size()) - 1.0) / duration;
    const double nominal_dt = 1.0 / rec.rate;
    for (std::size_t i = 1; i < rec.t.size(); ++i) {
        const double dt = rec.t[i] - rec.t[i - 1];
        if (std::abs(dt - nominal_dt) > 0.01 * nominal_dt) {
            throw ValueError("mocap timestamps deviate more than 1% from the uniform rate at row " +
                             std::to_string(i + 1));
        }
    }
    return rec;
}

MocapRecording parse_mocap_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open mocap file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_mocap_csv(buffer.str());
}

AngleSeries signed_angle_series(const MocapRecording& rec, const std::string& parent,
                                const std::string& child) {
    const int pi = rec.body_index(parent);
    const int ci = rec.body_index(child);
    if (pi < 0) throw ReferenceError("body '" + parent + "' not in the recording");
    if (ci < 0) throw ReferenceError("body '" + child + "' not in the recording");

    const int n = static_cast<int>(rec.samples.size());
    std::vector<std::optional<Quaternion>> rel(n);
    for (int i = 0; i < n; ++i) {
        const auto& p = rec.samples[i][pi];
        const auto& c = rec.samples[i][ci];
        if (p && c) rel[i] = relative_quaternion(*p, *c);
    }

    // Bridge short dropouts by component interpolation between the bounding
    // samples (the later endpoint sign-aligned first).
    std::vector<int> interpolated;
    for (int i = 0; i < n;) {
        if (rel[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && !rel[j]) ++j;
        const int gap = j - i;
        if (i > 0 && j < n && gap <= kMaxInterpolatedGap) {
            Quaternion a = *rel[i - 1];
            Quaternion b = *rel[j];
            if (a.dot(b) < 0.0) b = {-b.w, -b.x, -b.y, -b.z};
            for (int m = i; m < j; ++m) {
                const double s = static_cast<double>(m - i + 1) / (gap + 1);
                const Quaternion mix{a.w + s * (b.w - a.w), a.x + s * (b.x - a.x),
                                     a.y + s * (b.y - a.y), a.z + s * (b.z - a.z)};
                rel[m] = mix.normalized();
                interpolated.push_back(m);
            }
        }
        i = j;
    }

    // Longest contiguous run of samples.
    int best_begin = 0, best_len = 0;
    for (int i = 0; i < n;) {
        if (!rel[i]) {
            ++i;
            continue;
        }
        int j = i;
        while (j < n && rel[j]) ++j;
        if (j - i > best_len) {
            best_begin = i;
            best_len = j - i;
        }
        i = j;
    }
    if (best_len < 2) throw ValueError("recording has no usable contiguous samples");

    AngleSeries series;
    series.truncated = best_len != n;
    for (int idx : interpolated) {
        if (idx >= best_begin && idx < best_begin + best_len) {
            series.interpolated.push_back(idx - best_begin);
        }
    }

    std::vector<double> angles(best_len);
    std::vector<Eigen::Vector3d> axes(best_len, Eigen::Vector3d::Zero());
    for (int i = 0; i < best_len; ++i) {
        Quaternion q = *rel[best_begin + i];
        if (q.w < 0.0) q = {-q.w, -q.x, -q.y, -q.z};
        const double vnorm = q.vec().norm();
        angles[i] = 2.0 * std::atan2(vnorm, q.w); // always >= 0
        if (vnorm > 0.0) axes[i] = q.vec() / vnorm;
        series.t.push_back(rec.t[best_begin + i]);
    }

    int ref = -1;
    for (int i = 0; i < best_len; ++i) {
        if (angles[i] > kAxisAngleThreshold) {
            ref = i;
            break;
        }
    }
    if (ref < 0) {
        throw DegenerateAxisError(
            "rotation stays below 1e-3 rad for the whole recording, axis undefined");
    }
    series.axis = axes[ref];

    series.theta.resize(best_len);
    for (int i = 0; i < best_len; ++i) {
        double theta = angles[i];
        if (angles[i] > kAxisAngleThreshold && axes[i].dot(series.axis) < 0.0) {
            theta = -theta;
        }
        series.theta[i] = theta;
    }
    // Unwrap 2*pi discontinuities.
    for (int i = 1; i < best_len; ++i) {
        double delta = series.theta[i] - series.theta[i - 1];
        while (delta > std::numbers::pi) {
            series.theta[i] -= 2.0 * std::numbers::pi;
            delta = series.theta[i] - series.theta[i - 1];
        }
        while (delta < -std::numbers::pi) {
            series.theta[i] += 2.0 * std::numbers::pi;
            delta = series.theta[i] - series.theta[i - 1];
        }
    }
    return series;
}

namespace {

struct TrigFit {
    Eigen::VectorXd coeffs; // [a0, a1, b1, a2, b2, ...]
    double rms = 0.0;
};

TrigFit trig_least_squares(std::span<const double> t, std::span<const double> x, double f0,
                           int order) {
    const int n = static_cast<int>(t.size());
    Eigen::MatrixXd design(n, 2 * order + 1);
    for (int i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        for (int k = 1; k <= order; ++k) {
            const double phase = 2.0 * std::numbers::pi * k * f0 * t[i];
            design(i, 2 * k - 1) = std::cos(phase);
            design(i, 2 * k) = std::sin(phase);
        }
    }
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), n);
    TrigFit fit;
    fit.coeffs = design.colPivHouseholderQr().solve(xv);
    fit.rms = std::sqrt((design * fit.coeffs - xv).squaredNorm() / n);
    return fit;
}

} // namespace

double FourierFit::evaluate(double t) const {
    double value = a0;
    for (int k = 1; k <= order(); ++k) {
        const double phase = 2.0 * std::numbers::pi * k * fundamental * t;
        value += cos_coeffs[k - 1] * std::cos(phase) + sin_coeffs[k - 1] * std::sin(phase);
    }
    return value;
}

FourierFit fourier_fit(const AngleSeries& series, int order) {
    const int n = static_cast<int>(series.t.size());
    if (order < 1) throw ValueError("fourier order must be >= 1");
    if (n < 2 * order + 2) {
        throw ValueError("need at least " + std::to_string(2 * order + 2) + " samples for order " +
                         std::to_string(order) + ", got " + std::to_string(n));
    }

    // Dominant frequency from the discrete spectrum of the detrended series,
    // decimated for the peak search when long.
    const int stride = std::max(1, (n + kSpectrumMaxSamples - 1) / kSpectrumMaxSamples);
    std::vector<double> dec;
    for (int i = 0; i < n; i += stride) dec.push_back(series.theta[i]);
    const int m = static_cast<int>(dec.size());
    const double mean = std::accumulate(dec.begin(), dec.end(), 0.0) / m;
    for (double& v : dec) v -= mean;
    const double duration = series.t.back() - series.t.front();
    const double dec_rate = (m - 1) / duration;

    const int half = m / 2;
    if (half < 2) throw SpectrumError("series too short for a spectrum estimate");
    std::vector<double> magnitude(half, 0.0);
    for (int k = 1; k < half; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (int i = 0; i < m; ++i) {
            const double phase = -2.0 * std::numbers::pi * k * i / m;
            acc += dec[i] * std::complex<double>{std::cos(phase), std::sin(phase)};
        }
        magnitude[k] = std::abs(acc);
    }
    std::vector<double> sorted(magnitude.begin() + 1, magnitude.end());
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    int peak = 1;
    for (int k = 2; k < half; ++k) {
        if (magnitude[k] > magnitude[peak]) peak = k;
    }
    if (!(magnitude[peak] > 3.0 * median)) {
        throw SpectrumError("no spectral peak above 3x the median magnitude; "
                            "signal has no usable oscillation");
    }
    double delta = 0.0;
    if (peak + 1 < half) {
        const double lo = magnitude[peak - 1];
        const double mid = magnitude[peak];
        const double hi = magnitude[peak + 1];
        const double denom = lo - 2.0 * mid + hi;
        if (denom != 0.0) delta = std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
    }
    const double dominant = (peak + delta) * dec_rate / m;
    if (duration * dominant < 2.0) {
        throw SpectrumError("series covers fewer than two periods of the dominant oscillation");
    }

    // A decaying oscillation cannot be represented on harmonics of its own
    // peak, so subharmonics of the peak compete on fit residual.
    double best_f = dominant;
    TrigFit best = trig_least_squares(series.t, series.theta, dominant, order);
    for (int div = 2; div <= order; ++div) {
        const double f = dominant / div;
        if (duration * f < 1.0) break;
        const TrigFit fit = trig_least_squares(series.t, series.theta, f, order);
        if (fit.rms < best.rms) {
            best = fit;
            best_f = f;
        }
    }
    // Golden-section refinement of the fundamental around the best candidate.
    {
        const double inv_gold = (std::sqrt(5.0) - 1.0) / 2.0;
        double lo = 0.75 * best_f;
        double hi = 1.30 * best_f;
        double c = hi - inv_gold * (hi - lo);
        double d = lo + inv_gold * (hi - lo);
        double rms_c = trig_least_squares(series.t, series.theta, c, order).rms;
        double rms_d = trig_least_squares(series.t, series.theta, d, order).rms;
        for (int it = 0; it < 48; ++it) {
            if (rms_c < rms_d) {
                hi = d;
                d = c;
                rms_d = rms_c;
                c = hi - inv_gold * (hi - lo);
                rms_c = trig_least_squares(series.t, series.theta, c, order).rms;
            } else {
                lo = c;
                c = d;
                rms_c = rms_d;
                d = lo + inv_gold * (hi - lo);
                rms_d = trig_least_squares(series.t, series.theta, d, order).rms;
            }
        }
        const double refined = 0.5 * (lo + hi);
        const TrigFit fit = trig_least_squares(series.t, series.theta, refined, order);
        if (fit.rms < best.rms) {
            best = fit;
            best_f = refined;
        }
    }

    FourierFit fit;
    fit.fundamental = best_f;
    fit.dominant_hz = dominant;
    fit.a0 = best.coeffs[0];
    fit.cos_coeffs.resize(order);
    fit.sin_coeffs.resize(order);
    for (int k = 1; k <= order; ++k) {
        fit.cos_coeffs[k - 1] = best.coeffs[2 * k - 1];
        fit.sin_coeffs[k - 1] = best.coeffs[2 * k];
    }
    fit.residual_rms = best.rms;
    return fit;
}

FsDerivatives fs_derivatives(const FourierFit& fit, std::span<const double> t) {
    const int n = static_cast<int>(t.size());
    FsDerivatives out;
    out.theta = Eigen::VectorXd::Constant(n, fit.a0);
    out.thetadot = Eigen::VectorXd::Zero(n);
    out.thetaddot = Eigen::VectorXd::Zero(n);
    for (int k = 1; k <= fit.order(); ++k) {
        const double omega = 2.0 * std::numbers::pi * k * fit.fundamental;
        const double a = fit.cos_coeffs[k - 1];
        const double b = fit.sin_coeffs[k - 1];
        for (int i = 0; i < n; ++i) {
            const double c = std::cos(omega * t[i]);
            const double s = std::sin(omega * t[i]);
            out.theta[i] += a * c + b * s;
            out.thetadot[i] += omega * (-a * s + b * c);
            out.thetaddot[i] += omega * omega * (-a * c - b * s);
        }
    }
    return out;
}

IdentifiedKb identify_kb(std::span<const double> theta, std::span<const double> thetadot,
                         std::span<const double> thetaddot, const PendulumGeometry& geometry) {
    const int n = static_cast<int>(theta.size());
    if (n < 2 || thetadot.size() != theta.size() || thetaddot.size() != theta.size()) {
        throw ValueError("identify_kb needs equal-length series with at least two samples");
    }
    const double pivot_inertia =
        geometry.inertia_com + geometry.mass * geometry.com_distance * geometry.com_distance;

    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd target(n);
    for (int i = 0; i < n; ++i) {
        design(i, 0) = theta[i];
        design(i, 1) = thetadot[i];
        target[i] = -pivot_inertia * thetaddot[i] -
                    geometry.mass * geometry.gravity * geometry.com_distance * std::sin(theta[i]);
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smax = svd.singularValues()(0);
    const double smin = svd.singularValues()(1);
    if (!(smax > 0.0) || smin / smax < 1e-10) {
        throw RankError("theta and thetadot are collinear or constant; "
                        "the recording has no usable excitation");
    }
    const Eigen::Vector2d solution = svd.solve(target);

    IdentifiedKb result;
    result.stiffness = solution[0];
    result.damping = solution[1];
    result.residual_rms = std::sqrt((design * solution - target).squaredNorm() / n);
    return result;
}

AirDampingSplit split_air_damping(const std::vector<AreaDampingSample>& samples,
                                  double material_damping) {
    std::vector<SurfaceSample> points;
    points.reserve(samples.size());
    for (const AreaDampingSample& s : samples) {
        points.push_back({{s.area}, s.damping});
    }
    AirDampingSplit split;
    split.total = fit_quadratic_surface(points, {"a"});
    split.air = split.total.surface;
    split.air.constant -= material_damping;
    return split;
}

} // namespace foldsim
