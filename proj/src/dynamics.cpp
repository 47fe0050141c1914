#include "foldsim/dynamics.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace foldsim {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kBlowupLimit = 1e6;

/// Per-coordinate external torque source for one integration phase.
struct TorqueSource {
    const MechanismSpec* mech = nullptr;
    bool held = false;
    Eigen::VectorXd held_values;

    Eigen::VectorXd at(double t) const {
        if (held) return held_values;
        Eigen::VectorXd tau(mech->joints.size());
        for (std::size_t i = 0; i < mech->joints.size(); ++i) {
            tau[static_cast<int>(i)] = mech->joints[i].torque_at(t);
        }
        return tau;
    }
};

/// Owns the shared articulation model for one run and evaluates the
/// equations of motion.
class Engine {
public:
    Engine(const MechanismSpec& mech, const KinematicTree& tree)
        : mech_(&mech), model_(std::make_shared<ArticulatedModel>(mech, tree)) {
        if (tree.cut_edge) {
            constraints_.emplace(model_, *tree.loop_points);
        }
    }

    const ArticulatedModel& model() const { return *model_; }
    const ConstraintSystem* constraints() const {
        return constraints_ ? &*constraints_ : nullptr;
    }

    /// Spring/damper/external joint torques plus the gravity projection.
    Eigen::VectorXd applied_forces(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                   const Eigen::VectorXd& external) const {
        const auto states = model_->sweep(q, qdot);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(model_->coord_count());
        add_gravity(states, f);
        add_joint_forces(q, qdot, external, f);
        return f;
    }

    EomSolution solve(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                      const Eigen::VectorXd& external, const ConstraintSystem* cs,
                      const BaumgarteParams& params) const {
        const auto states = model_->sweep(q, qdot);
        const int n = model_->coord_count();

        EomSolution sol;
        sol.mass_matrix = Eigen::MatrixXd::Zero(n, n);
        sol.rhs = Eigen::VectorXd::Zero(n);

        const Eigen::Vector3d gravity = mech_->gravity;
        const auto& nodes = model_->nodes();
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto& node = nodes[i];
            const double m = node.props.mass;
            const Eigen::Vector3d com_w = states.point_world(static_cast<int>(i), node.props.com);
            const Eigen::Matrix3d inertia_w = states.rotation[i] * node.props.inertia *
                                              states.rotation[i].transpose();
            const Eigen::Vector3d a_com_bias =
                states.point_accel_bias(static_cast<int>(i), node.props.com);
            const Eigen::Vector3d torque_bias =
                inertia_w * states.omega_dot_bias[i] +
                states.omega[i].cross(inertia_w * states.omega[i]);

            const auto& path = model_->coordinate_path(static_cast<int>(i));
            std::vector<Eigen::Vector3d> jv(path.size());
            std::vector<Eigen::Vector3d> jw(path.size());
            for (std::size_t a = 0; a < path.size(); ++a) {
                jv[a] = ArticulatedModel::partial_velocity(states, path[a], com_w);
                jw[a] = states.joint_axis_world[path[a]];
            }
            for (std::size_t a = 0; a < path.size(); ++a) {
                const int ca = nodes[path[a]].coord;
                sol.rhs[ca] += jv[a].dot(m * gravity) - m * jv[a].dot(a_com_bias) -
                               jw[a].dot(torque_bias);
                for (std::size_t b = 0; b <= a; ++b) {
                    const int cb = nodes[path[b]].coord;
                    const double value = m * jv[a].dot(jv[b]) + jw[a].dot(inertia_w * jw[b]);
                    sol.mass_matrix(ca, cb) += value;
                    if (ca != cb) sol.mass_matrix(cb, ca) += value;
                }
            }
        }
        add_joint_forces_to_rhs(q, qdot, external, sol.rhs);

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.mass_matrix);
        const double lambda_max = eig.eigenvalues().maxCoeff();
        const double lambda_min = eig.eigenvalues().minCoeff();
        if (!(lambda_min > 0.0) || lambda_max / lambda_min > kConditionLimit) {
            std::ostringstream msg;
            msg << "mass matrix is numerically singular (eigenvalue range [" << lambda_min
                << ", " << lambda_max << "]); check for zero-inertia bodies";
            throw SingularMassError(msg.str());
        }

        if (cs == nullptr) {
            sol.qddot = eig.eigenvectors() *
                        (eig.eigenvalues().cwiseInverse().asDiagonal() *
                         (eig.eigenvectors().transpose() * sol.rhs));
            return sol;
        }

        const auto [a_mat, b_vec] = stabilized_acceleration_rhs(*cs, params, q, qdot);
        const int m_rows = static_cast<int>(a_mat.rows());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m_rows, n + m_rows);
        kkt.topLeftCorner(n, n) = sol.mass_matrix;
        kkt.topRightCorner(n, m_rows) = a_mat.transpose();
        kkt.bottomLeftCorner(m_rows, n) = a_mat;
        Eigen::VectorXd rhs(n + m_rows);
        rhs.head(n) = sol.rhs;
        rhs.tail(m_rows) = b_vec;
        // Minimum-norm least squares: the nine coincidence rows are redundant.
        const Eigen::VectorXd packed =
            kkt.completeOrthogonalDecomposition().solve(rhs);
        sol.qddot = packed.head(n);
        sol.lambda = packed.tail(m_rows);
        return sol;
    }

    DynamicState rk4_step(const DynamicState& state, double dt, const TorqueSource& torques,
                          const ConstraintSystem* cs, const BaumgarteParams& params) const {
        const auto deriv = [&](double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
            return solve(q, qd, torques.at(t), cs, params).qddot;
        };
        const Eigen::VectorXd& q = state.q;
        const Eigen::VectorXd& qd = state.qdot;
        const double t = state.t;

        const Eigen::VectorXd k1q = qd;
        const Eigen::VectorXd k1v = deriv(t, q, qd);
        const Eigen::VectorXd k2q = qd + 0.5 * dt * k1v;
        const Eigen::VectorXd k2v = deriv(t + 0.5 * dt, q + 0.5 * dt * k1q, qd + 0.5 * dt * k1v);
        const Eigen::VectorXd k3q = qd + 0.5 * dt * k2v;
        const Eigen::VectorXd k3v = deriv(t + 0.5 * dt, q + 0.5 * dt * k2q, qd + 0.5 * dt * k2v);
        const Eigen::VectorXd k4q = qd + dt * k3v;
        const Eigen::VectorXd k4v = deriv(t + dt, q + dt * k3q, qd + dt * k3v);

        DynamicState next;
        next.t = t + dt;
        next.q = q + (dt / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
        next.qdot = qd + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        check_finite(next);
        return next;
    }

    std::pair<double, double> energies(const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& qdot) const {
        const auto states = model_->sweep(q, qdot);
        double ke = 0.0;
        double pe = 0.0;
        const auto& nodes = model_->nodes();
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto& node = nodes[i];
            const Eigen::Vector3d v_com = states.point_velocity(static_cast<int>(i), node.props.com);
            const Eigen::Matrix3d inertia_w =
                states.rotation[i] * node.props.inertia * states.rotation[i].transpose();
            ke += 0.5 * node.props.mass * v_com.squaredNorm() +
                  0.5 * states.omega[i].dot(inertia_w * states.omega[i]);
            const Eigen::Vector3d com_w = states.point_world(static_cast<int>(i), node.props.com);
            pe -= node.props.mass * mech_->gravity.dot(com_w - node.props.com);
        }
        for (const JointSpec& joint : mech_->joints) {
            const int c = model_->tree().coordinate_index.at(joint.id);
            const double deflection = q[c] - joint.rest_angle;
            pe += 0.5 * joint.stiffness * deflection * deflection;
        }
        return {ke, pe};
    }

private:
    void check_finite(const DynamicState& state) const {
        for (int i = 0; i < state.q.size(); ++i) {
            const bool bad = !std::isfinite(state.q[i]) || !std::isfinite(state.qdot[i]) ||
                             std::abs(state.q[i]) > kBlowupLimit ||
                             std::abs(state.qdot[i]) > kBlowupLimit;
            if (bad) {
                throw NumericalBlowupError("state diverged at t = " + std::to_string(state.t) +
                                           "; reduce dt or check joint parameters");
            }
        }
    }

    void add_gravity(const ArticulatedModel::BodyStates& states, Eigen::VectorXd& f) const {
        const auto& nodes = model_->nodes();
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            const auto& node = nodes[i];
            const Eigen::Vector3d com_w = states.point_world(static_cast<int>(i), node.props.com);
            for (int pn : model_->coordinate_path(static_cast<int>(i))) {
                f[nodes[pn].coord] += ArticulatedModel::partial_velocity(states, pn, com_w)
                                          .dot(node.props.mass * mech_->gravity);
            }
        }
    }

    void add_joint_forces(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                          const Eigen::VectorXd& external, Eigen::VectorXd& f) const {
        add_joint_forces_to_rhs(q, qdot, external, f);
    }

    void add_joint_forces_to_rhs(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                                 const Eigen::VectorXd& external, Eigen::VectorXd& f) const {
        for (const JointSpec& joint : mech_->joints) {
            const int c = model_->tree().coordinate_index.at(joint.id);
            f[c] += -joint.stiffness * (q[c] - joint.rest_angle) - joint.damping * qdot[c] +
                    external[c];
        }
    }

    const MechanismSpec* mech_;
    std::shared_ptr<const ArticulatedModel> model_;
    std::optional<ConstraintSystem> constraints_;
};

TorqueSource scheduled_torques(const MechanismSpec& mech) {
    TorqueSource src;
    src.mech = &mech;
    return src;
}

TorqueSource burn_in_torques(const MechanismSpec& mech, bool hold) {
    TorqueSource src;
    src.mech = &mech;
    src.held = true;
    src.held_values = Eigen::VectorXd::Zero(static_cast<int>(mech.joints.size()));
    if (hold) {
        for (std::size_t i = 0; i < mech.joints.size(); ++i) {
            src.held_values[static_cast<int>(i)] = mech.joints[i].torque_before_zero();
        }
    }
    return src;
}

void check_config(const SimulationConfig& config) {
    if (!(config.dt > 0.0)) throw ValueError("dt must be > 0");
    if (config.burn_in_steps < 0) throw ValueError("burn_in_steps must be >= 0");
    if (!(config.constraint_tolerance > 0.0)) {
        throw ValueError("constraint_tolerance must be > 0");
    }
    if (!(config.production_duration >= 0.0)) {
        throw ValueError("production_duration must be >= 0");
    }
}

} // namespace

Eigen::VectorXd generalized_forces(const MechanismSpec& mech, const KinematicTree& tree,
                                   const DynamicState& state) {
    const Engine engine(mech, tree);
    const TorqueSource torques = scheduled_torques(mech);
    return engine.applied_forces(state.q, state.qdot, torques.at(state.t));
}

EomSolution assemble_eom(const MechanismSpec& mech, const KinematicTree& tree,
                         const ConstraintSystem* constraints, const BaumgarteParams& params,
                         const DynamicState& state) {
    const Engine engine(mech, tree);
    const TorqueSource torques = scheduled_torques(mech);
    return engine.solve(state.q, state.qdot, torques.at(state.t), constraints, params);
}

DynamicState step(const MechanismSpec& mech, const KinematicTree& tree,
                  const ConstraintSystem* constraints, const BaumgarteParams& params,
                  const SimulationConfig& config, const DynamicState& state) {
    check_config(config);
    const Engine engine(mech, tree);
    const TorqueSource torques = scheduled_torques(mech);
    return engine.rk4_step(state, config.dt, torques, constraints, params);
}

std::pair<double, double> energies(const MechanismSpec& mech, const KinematicTree& tree,
                                   const DynamicState& state) {
    const Engine engine(mech, tree);
    return engine.energies(state.q, state.qdot);
}

SimulationResult simulate(const MechanismSpec& mech, const SimulationConfig& config) {
    check_config(config);
    SimulationResult result;
    result.tree = build_tree(mech);
    const Engine engine(mech, result.tree);
    const int n = result.tree.coordinate_count();

    Eigen::VectorXd q0 = Eigen::VectorXd::Zero(n);
    for (const JointSpec& joint : mech.joints) {
        q0[result.tree.coordinate_index.at(joint.id)] = joint.initial_angle_guess.value_or(0.0);
    }

    const ConstraintSystem* cs = engine.constraints();
    const auto record = [&](Trajectory& traj, const DynamicState& state) {
        TrajectorySample sample;
        sample.state = state;
        sample.constraint_error = cs ? cs->max_point_error(state.q) : 0.0;
        std::tie(sample.kinetic_energy, sample.potential_energy) =
            engine.energies(state.q, state.qdot);
        traj.samples.push_back(std::move(sample));
    };

    DynamicState state;
    state.q = q0;
    state.qdot = Eigen::VectorXd::Zero(n);

    if (cs != nullptr && config.burn_in_steps > 0) {
        const TorqueSource held = burn_in_torques(mech, config.hold_torques_during_burn_in);
        state.t = -config.burn_in_steps * config.dt;
        record(result.burn_in, state);
        for (int i = 0; i < config.burn_in_steps; ++i) {
            state = engine.rk4_step(state, config.dt, held, cs, config.baumgarte);
            record(result.burn_in, state);
        }
        const double error = cs->max_point_error(state.q);
        if (!(error < config.constraint_tolerance)) {
            std::ostringstream msg;
            msg << "burn-in ended with loop error " << error << " m (tolerance "
                << config.constraint_tolerance
                << "); increase burn_in_steps or the alpha/beta gains";
            throw BurnInFailedError(msg.str());
        }
    }

    // Phase two restarts the clock from the burn-in configuration at rest.
    state.t = 0.0;
    state.qdot.setZero();
    BaumgarteParams accel_only = config.baumgarte;
    accel_only.enabled = false;
    const TorqueSource scheduled = scheduled_torques(mech);
    record(result.production, state);
    const long steps = std::lround(config.production_duration / config.dt);
    for (long i = 0; i < steps; ++i) {
        state = engine.rk4_step(state, config.dt, scheduled, cs, accel_only);
        record(result.production, state);
    }
    return result;
}

} // namespace foldsim
