#include "foldsim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "foldsim/output.hpp"
#include "foldsim/svg_plot.hpp"
#include "foldsim/version.hpp"

namespace foldsim {

namespace {

using nlohmann::ordered_json;

void report_error(const std::string& kind, const std::string& message) {
    ordered_json doc;
    doc["error"] = kind;
    doc["message"] = message;
    std::cerr << doc.dump() << "\n";
}

std::string read_text_file_or_schema_error(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open input file '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

template <typename F>
int guarded(F&& body) {
    try {
        return body();
    } catch (const SchemaError& e) {
        report_error("SchemaError", e.what());
        return exit_code::invalid_input;
    } catch (const ReferenceError& e) {
        report_error("ReferenceError", e.what());
        return exit_code::invalid_input;
    } catch (const TopologyError& e) {
        report_error("TopologyError", e.what());
        return exit_code::invalid_input;
    } catch (const ValueError& e) {
        report_error("ValueError", e.what());
        return exit_code::invalid_input;
    } catch (const BurnInFailedError& e) {
        report_error("BurnInFailedError", e.what());
        return exit_code::analysis;
    } catch (const SpectrumError& e) {
        report_error("SpectrumError", e.what());
        return exit_code::analysis;
    } catch (const DegenerateAxisError& e) {
        report_error("DegenerateAxisError", e.what());
        return exit_code::analysis;
    } catch (const RankError& e) {
        report_error("RankError", e.what());
        return exit_code::analysis;
    } catch (const SingularMassError& e) {
        report_error("SingularMassError", e.what());
        return exit_code::analysis;
    } catch (const NumericalBlowupError& e) {
        report_error("NumericalBlowupError", e.what());
        return exit_code::blowup;
    } catch (const std::exception& e) {
        report_error("Error", e.what());
        return exit_code::failure;
    }
}

/// Downsampled per-joint plot series; long trajectories are strided to keep
/// the SVG bounded.
std::vector<PlotSeries> joint_plot_series(const Trajectory& trajectory,
                                          const std::vector<std::string>& joint_ids,
                                          bool velocities) {
    const int n = static_cast<int>(trajectory.samples.size());
    const int stride = std::max(1, n / 2000);
    std::vector<PlotSeries> series(joint_ids.size());
    for (std::size_t j = 0; j < joint_ids.size(); ++j) {
        series[j].label = joint_ids[j];
        for (int i = 0; i < n; i += stride) {
            const TrajectorySample& sample = trajectory.samples[i];
            series[j].x.push_back(sample.state.t);
            series[j].y.push_back(velocities ? sample.state.qdot[static_cast<int>(j)]
                                             : sample.state.q[static_cast<int>(j)]);
        }
    }
    return series;
}

ordered_json config_echo(const SimulateOptions& options) {
    ordered_json doc;
    doc["dt"] = options.config.dt;
    doc["burn_in_steps"] = options.config.burn_in_steps;
    doc["production_duration"] = options.config.production_duration;
    doc["alpha"] = options.config.baumgarte.alpha;
    doc["beta"] = options.config.baumgarte.beta;
    doc["baumgarte_enabled"] = options.config.baumgarte.enabled;
    doc["constraint_tolerance"] = options.config.constraint_tolerance;
    doc["hold_torques_during_burn_in"] = options.config.hold_torques_during_burn_in;
    doc["frames"] = options.max_frames;
    doc["seed"] = options.seed;
    return doc;
}

} // namespace

int cmd_simulate(const SimulateOptions& options) {
    return guarded([&]() {
        const std::string source = [&] {
            std::ifstream in(options.input, std::ios::binary);
            if (!in) throw SchemaError("cannot open mechanism file '" + options.input + "'");
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }();
        const MechanismSpec mech = parse_mechanism(source);
        const SimulationResult result = simulate(mech, options.config);

        std::filesystem::create_directories(options.out_dir);
        const auto out_path = [&](const std::string& name) {
            return (std::filesystem::path(options.out_dir) / name).string();
        };
        const std::vector<std::string> joint_ids = coordinate_joint_ids(result.tree);

        RunManifest manifest;
        manifest.command = "simulate";
        manifest.input_path = options.input;
        manifest.input_hash = content_hash(source);
        manifest.config = config_echo(options);

        write_text_file(out_path("burn_in.csv"), trajectory_csv(result.burn_in, joint_ids));
        manifest.outputs.push_back("burn_in.csv");
        write_text_file(out_path("trajectory.csv"),
                        trajectory_csv(result.production, joint_ids));
        manifest.outputs.push_back("trajectory.csv");
        write_line_plot(out_path("angles.svg"), "joint angles", "t [s]", "angle [rad]",
                        joint_plot_series(result.production, joint_ids, false));
        manifest.outputs.push_back("angles.svg");
        write_line_plot(out_path("velocities.svg"), "joint angular velocities", "t [s]",
                        "angular velocity [rad/s]",
                        joint_plot_series(result.production, joint_ids, true));
        manifest.outputs.push_back("velocities.svg");
        write_text_file(out_path("frames.json"),
                        frames_json(mech, result.tree, result.production, options.max_frames)
                                .dump(2) +
                            "\n");
        manifest.outputs.push_back("frames.json");
        write_text_file(out_path("manifest.json"), manifest.to_json().dump(2) + "\n");

        std::cout << "wrote " << manifest.outputs.size() + 1 << " files to " << options.out_dir
                  << "\n";
        return exit_code::ok;
    });
}

int cmd_identify(const IdentifyOptions& options) {
    return guarded([&]() {
        const std::string source = read_text_file_or_schema_error(options.input);
        const MocapRecording recording = parse_mocap_csv(source);
        if (recording.bodies.size() < 2 && (options.parent.empty() || options.child.empty())) {
            throw SchemaError("recording has fewer than two bodies; pass --parent and --child");
        }
        const std::string parent =
            options.parent.empty() ? recording.bodies[0] : options.parent;
        const std::string child = options.child.empty() ? recording.bodies[1] : options.child;

        const AngleSeries series = signed_angle_series(recording, parent, child);
        const FourierFit fit = fourier_fit(series, options.order);

        const double t0 = series.t.front();
        const double t1 = series.t.back();
        const double lo = t0 + options.trim_fraction * (t1 - t0);
        const double hi = t1 - options.trim_fraction * (t1 - t0);
        std::vector<double> eval_t;
        for (double t : series.t) {
            if (t >= lo && t <= hi) eval_t.push_back(t);
        }
        const FsDerivatives der = fs_derivatives(fit, eval_t);
        const IdentifiedKb kb = identify_kb(
            {der.theta.data(), static_cast<std::size_t>(der.theta.size())},
            {der.thetadot.data(), static_cast<std::size_t>(der.thetadot.size())},
            {der.thetaddot.data(), static_cast<std::size_t>(der.thetaddot.size())},
            options.geometry);

        std::filesystem::create_directories(options.out_dir);
        const auto out_path = [&](const std::string& name) {
            return (std::filesystem::path(options.out_dir) / name).string();
        };

        ordered_json report;
        report["k"] = kb.stiffness;
        report["b"] = kb.damping;
        report["rms"] = kb.residual_rms;
        report["n_samples"] = series.t.size();
        report["fundamental_hz"] = fit.dominant_hz;
        report["basis_fundamental_hz"] = fit.fundamental;
        report["fit_rms"] = fit.residual_rms;
        report["order"] = options.order;
        report["parent"] = parent;
        report["child"] = child;
        ordered_json warnings = ordered_json::array();
        if (!series.interpolated.empty()) {
            warnings.push_back(std::to_string(series.interpolated.size()) +
                               " dropped samples were reconstructed by interpolation");
        }
        if (series.truncated) {
            warnings.push_back("a dropout longer than 5 samples truncated the series");
        }
        report["warnings"] = warnings;

        // Overlay: measured angle, its smoothed fit and the trajectory the
        // identified model predicts from the same initial state.
        PlotSeries measured{"measured", series.t, series.theta};
        PlotSeries smoothed{"fourier fit", {}, {}};
        for (double t : series.t) {
            smoothed.x.push_back(t);
            smoothed.y.push_back(fit.evaluate(t));
        }
        PlotSeries predicted{"identified model", {}, {}};
        {
            const double pivot_inertia =
                options.geometry.inertia_com +
                options.geometry.mass * options.geometry.com_distance * options.geometry.com_distance;
            const double mgr = options.geometry.mass * options.geometry.gravity *
                               options.geometry.com_distance;
            const auto accel = [&](double theta, double thetadot) {
                return (-kb.stiffness * theta - kb.damping * thetadot - mgr * std::sin(theta)) /
                       pivot_inertia;
            };
            const FsDerivatives start = fs_derivatives(fit, std::span<const double>{&series.t[0], 1});
            double theta = start.theta[0];
            double thetadot = start.thetadot[0];
            predicted.x.push_back(series.t[0]);
            predicted.y.push_back(theta);
            for (std::size_t i = 1; i < series.t.size(); ++i) {
                const double h = series.t[i] - series.t[i - 1];
                const double k1q = thetadot, k1v = accel(theta, thetadot);
                const double k2q = thetadot + 0.5 * h * k1v,
                             k2v = accel(theta + 0.5 * h * k1q, thetadot + 0.5 * h * k1v);
                const double k3q = thetadot + 0.5 * h * k2v,
                             k3v = accel(theta + 0.5 * h * k2q, thetadot + 0.5 * h * k2v);
                const double k4q = thetadot + h * k3v,
                             k4v = accel(theta + h * k3q, thetadot + h * k3v);
                theta += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
                thetadot += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
                predicted.x.push_back(series.t[i]);
                predicted.y.push_back(theta);
            }
        }

        RunManifest manifest;
        manifest.command = "identify";
        manifest.input_path = options.input;
        manifest.input_hash = content_hash(source);
        ordered_json config;
        config["order"] = options.order;
        config["trim_fraction"] = options.trim_fraction;
        config["mass"] = options.geometry.mass;
        config["com_distance"] = options.geometry.com_distance;
        config["inertia_com"] = options.geometry.inertia_com;
        config["gravity"] = options.geometry.gravity;
        config["seed"] = options.seed;
        manifest.config = config;

        write_text_file(out_path("identification.json"), report.dump(2) + "\n");
        manifest.outputs.push_back("identification.json");
        write_line_plot(out_path("fit_overlay.svg"), "identification fit", "t [s]",
                        "angle [rad]", {measured, smoothed, predicted});
        manifest.outputs.push_back("fit_overlay.svg");
        write_text_file(out_path("manifest.json"), manifest.to_json().dump(2) + "\n");

        std::cout << report.dump(2) << "\n";
        return exit_code::ok;
    });
}

int cmd_hinge(const HingeOptions& options, std::ostream& out) {
    return guarded([&]() {
        const auto require = [](const std::optional<double>& value, const char* flag) {
            if (!value) throw SchemaError(std::string("hinge model needs ") + flag);
            return *value;
        };
        ordered_json doc;
        doc["model"] = options.model;
        if (options.model == "air") {
            const EvaluatedDamping e = damping_from_area(require(options.area, "--a"));
            doc["k"] = nullptr;
            doc["b"] = e.value;
            doc["source"] = to_string(HingeSource::air_model);
            doc["clamped"] = {{"stiffness", false}, {"damping", e.clamped}};
            doc["warnings"] = e.warnings;
        } else {
            HingeProperties props;
            if (options.model == "width") {
                props = properties_from_width(require(options.width, "--w"));
            } else if (options.model == "length") {
                props = properties_from_length(require(options.length, "--l"));
            } else if (options.model == "comprehensive") {
                props = properties_comprehensive({require(options.length, "--l"),
                                                  require(options.width, "--w"),
                                                  require(options.area, "--a")});
            } else {
                throw SchemaError("unknown hinge model '" + options.model +
                                  "'; expected air, width, length or comprehensive");
            }
            doc["k"] = props.stiffness;
            doc["b"] = props.damping;
            doc["source"] = to_string(props.source);
            doc["clamped"] = {{"stiffness", props.stiffness_clamped},
                              {"damping", props.damping_clamped}};
            doc["warnings"] = props.warnings;
        }
        out << doc.dump(2) << "\n";
        return exit_code::ok;
    });
}

int cmd_fit_surface(const FitSurfaceOptions& options, std::ostream& out) {
    return guarded([&]() {
        const std::string source = read_text_file_or_schema_error(options.input);
        std::istringstream in(source);
        std::string line;
        if (!std::getline(in, line)) throw SchemaError("experiment table is empty");
        // Tolerate trailing \r from windows-edited tables.
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line != "l,w,a,k_meas,b_meas") {
            throw SchemaError("experiment table header must be 'l,w,a,k_meas,b_meas'");
        }
        std::vector<SurfaceSample> k_samples;
        std::vector<SurfaceSample> b_samples;
        int line_no = 1;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            std::istringstream row(line);
            double l, w, a, k, b;
            char c1, c2, c3, c4;
            if (!(row >> l >> c1 >> w >> c2 >> a >> c3 >> k >> c4 >> b) || c1 != ',' ||
                c2 != ',' || c3 != ',' || c4 != ',') {
                throw SchemaError("experiment table line " + std::to_string(line_no) +
                                  " is not 'l,w,a,k,b'");
            }
            k_samples.push_back({{l, w, a}, k});
            b_samples.push_back({{l, w, a}, b});
        }

        const auto surface_json = [](const SurfaceFit& fit) {
            ordered_json doc;
            doc["variables"] = fit.surface.variables;
            doc["constant"] = fit.surface.constant;
            doc["linear"] = fit.surface.linear;
            doc["quadratic"] = fit.surface.quadratic;
            doc["mae"] = fit.mae;
            doc["mae_percent"] = fit.mae_percent;
            return doc;
        };

        ordered_json doc;
        const std::vector<std::string> vars{"l", "w", "a"};
        if (options.target == "k" || options.target == "both") {
            doc["k_model"] = surface_json(fit_quadratic_surface(k_samples, vars));
        }
        if (options.target == "b" || options.target == "both") {
            doc["b_model"] = surface_json(fit_quadratic_surface(b_samples, vars));
        }
        if (!doc.contains("k_model") && !doc.contains("b_model")) {
            throw SchemaError("--target must be k, b or both");
        }
        out << doc.dump(2) << "\n";
        return exit_code::ok;
    });
}

int cmd_validate(const std::string& input, std::ostream& out) {
    return guarded([&]() {
        const MechanismSpec mech = parse_mechanism_file(input);
        const KinematicTree tree = build_tree(mech);
        ordered_json doc;
        doc["valid"] = true;
        doc["bodies"] = mech.bodies.size();
        doc["joints"] = mech.joints.size();
        doc["closed_loop"] = tree.cut_edge.has_value();
        if (tree.cut_edge) {
            doc["split_body"] = tree.cut_edge->original_body;
        }
        out << doc.dump(2) << "\n";
        return exit_code::ok;
    });
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"dynamics and hinge characterization for laminate flexure mechanisms"};
    app.set_version_flag("--version", std::string("foldsim ") + kVersion);
    app.require_subcommand(1);

    SimulateOptions sim_options;
    bool no_hold_torques = false;
    CLI::App* sim = app.add_subcommand("simulate", "two-phase dynamics run with file outputs");
    sim->add_option("mechanism", sim_options.input, "mechanism YAML file")->required();
    sim->add_option("--out-dir", sim_options.out_dir, "output directory")
        ->capture_default_str();
    sim->add_option("--dt", sim_options.config.dt, "integration step [s]")
        ->capture_default_str();
    sim->add_option("--alpha", sim_options.config.baumgarte.alpha,
                    "stabilization velocity gain [1/s]")
        ->capture_default_str();
    sim->add_option("--beta", sim_options.config.baumgarte.beta,
                    "stabilization position gain [1/s]")
        ->capture_default_str();
    sim->add_option("--burn-in-steps", sim_options.config.burn_in_steps,
                    "phase-one step count")
        ->capture_default_str();
    sim->add_option("--duration", sim_options.config.production_duration,
                    "phase-two duration [s]")
        ->capture_default_str();
    sim->add_option("--constraint-tolerance", sim_options.config.constraint_tolerance,
                    "burn-in exit tolerance [m]")
        ->capture_default_str();
    sim->add_flag("--no-hold-torques", no_hold_torques,
                  "do not hold pre-zero external torques during burn-in");
    sim->add_option("--frames", sim_options.max_frames, "frame count cap in frames.json")
        ->capture_default_str();
    sim->add_option("--seed", sim_options.seed, "seed echoed into the manifest")
        ->capture_default_str();

    IdentifyOptions id_options;
    CLI::App* ident = app.add_subcommand("identify",
                                         "recover hinge stiffness/damping from mocap data");
    ident->add_option("recording", id_options.input, "mocap CSV file")->required();
    ident->add_option("--out-dir", id_options.out_dir, "output directory")
        ->capture_default_str();
    ident->add_option("--parent", id_options.parent, "parent body id (default: first)");
    ident->add_option("--child", id_options.child, "child body id (default: second)");
    ident->add_option("--mass", id_options.geometry.mass, "pendulum mass [kg]")->required();
    ident->add_option("--com-distance", id_options.geometry.com_distance,
                      "hinge-to-COM distance r [m]")
        ->required();
    ident->add_option("--inertia", id_options.geometry.inertia_com,
                      "inertia about the COM [kg m^2]")
        ->required();
    ident->add_option("--gravity", id_options.geometry.gravity, "gravity [m/s^2]")
        ->capture_default_str();
    ident->add_option("--order", id_options.order, "Fourier order")->capture_default_str();
    ident->add_option("--trim", id_options.trim_fraction,
                      "fraction trimmed from each end for the regression")
        ->capture_default_str();
    ident->add_option("--seed", id_options.seed, "seed echoed into the manifest")
        ->capture_default_str();

    HingeOptions hinge_options;
    CLI::App* hinge = app.add_subcommand("hinge", "evaluate a hinge property surface");
    hinge->add_option("--model", hinge_options.model, "air | width | length | comprehensive")
        ->capture_default_str();
    hinge->add_option("--l", hinge_options.length, "hinge length [m]");
    hinge->add_option("--w", hinge_options.width, "hinge width [m]");
    hinge->add_option("--a", hinge_options.area, "moving-body cross-sectional area [m^2]");

    FitSurfaceOptions fit_options;
    CLI::App* fit = app.add_subcommand("fit-surface",
                                       "fit quadratic property surfaces to an experiment table");
    fit->add_option("table", fit_options.input, "CSV table l,w,a,k_meas,b_meas")->required();
    fit->add_option("--target", fit_options.target, "k | b | both")->capture_default_str();

    std::string validate_input;
    CLI::App* val = app.add_subcommand("validate", "schema-check a mechanism file");
    val->add_option("mechanism", validate_input, "mechanism YAML file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    if (*sim) {
        sim_options.config.hold_torques_during_burn_in = !no_hold_torques;
        return cmd_simulate(sim_options);
    }
    if (*ident) return cmd_identify(id_options);
    if (*hinge) return cmd_hinge(hinge_options);
    if (*fit) return cmd_fit_surface(fit_options);
    if (*val) return cmd_validate(validate_input);
    return exit_code::failure;
}

} // namespace foldsim
