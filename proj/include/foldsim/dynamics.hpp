#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "foldsim/constraints.hpp"
#include "foldsim/kinematics.hpp"

namespace foldsim {

struct DynamicState {
    double t = 0.0;        // s
    Eigen::VectorXd q;     // rad, one per joint
    Eigen::VectorXd qdot;  // rad/s
};

struct SimulationConfig {
    double dt = 1e-4;                 // s, fixed RK4 step
    int burn_in_steps = 300;
    double production_duration = 5.0; // s
    BaumgarteParams baumgarte{};
    double constraint_tolerance = 1e-6; // m
    bool hold_torques_during_burn_in = true;
};

struct TrajectorySample {
    DynamicState state;
    double constraint_error = 0.0; // m, largest point gap
    double kinetic_energy = 0.0;   // J
    double potential_energy = 0.0; // J
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
};

struct SimulationResult {
    KinematicTree tree;
    Trajectory burn_in;
    Trajectory production;
};

struct EomSolution {
    Eigen::MatrixXd mass_matrix;
    Eigen::VectorXd rhs;    // applied + velocity-product generalized forces
    Eigen::VectorXd qddot;
    Eigen::VectorXd lambda; // constraint multipliers, empty when unconstrained
};

/// Applied generalized forces: joint springs, dampers and external torques
/// plus the partial-velocity projection of gravity. Velocity-product (bias)
/// terms are not included here; assemble_eom adds them.
Eigen::VectorXd generalized_forces(const MechanismSpec& mech, const KinematicTree& tree,
                                   const DynamicState& state);

/// Kane's equations evaluated numerically at one state. With a constraint
/// system the block system [M A^T; A 0][qddot; lambda] = [f; b] is solved by
/// a minimum-norm least-squares factorization (the three coincidence points
/// give redundant rows).
EomSolution assemble_eom(const MechanismSpec& mech, const KinematicTree& tree,
                         const ConstraintSystem* constraints, const BaumgarteParams& params,
                         const DynamicState& state);

/// One fixed-size RK4 step.
DynamicState step(const MechanismSpec& mech, const KinematicTree& tree,
                  const ConstraintSystem* constraints, const BaumgarteParams& params,
                  const SimulationConfig& config, const DynamicState& state);

/// (kinetic, potential). Potential is gravity relative to the flat state
/// plus joint spring energy, so the resting flat state reads (0, 0).
std::pair<double, double> energies(const MechanismSpec& mech, const KinematicTree& tree,
                                   const DynamicState& state);

/// Two-phase run. Closed loops first integrate burn_in_steps with the
/// stabilization enabled and burn-in torques held, then restart at t = 0
/// with velocities zeroed, stabilization off (acceleration-level enforcement
/// only) and scheduled torques. Open chains skip phase one.
SimulationResult simulate(const MechanismSpec& mech, const SimulationConfig& config);

} // namespace foldsim
