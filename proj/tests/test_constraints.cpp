#include <doctest.h>

#include <random>

#include "foldsim/constraints.hpp"
#include "support/fixtures.hpp"

using namespace foldsim;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

/// Independent root finder: damped Newton on C(q) with a finite-difference
/// Jacobian and a least-squares step.
Eigen::VectorXd solve_closure(const ConstraintSystem& cs, Eigen::VectorXd q) {
    const int n = static_cast<int>(q.size());
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd c = cs.residual(q);
        if (c.norm() < 1e-13) break;
        Eigen::MatrixXd jac(c.size(), n);
        const double h = 1e-7;
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd qp = q, qm = q;
            qp[j] += h;
            qm[j] -= h;
            jac.col(j) = (cs.residual(qp) - cs.residual(qm)) / (2 * h);
        }
        const Eigen::VectorXd step =
            jac.completeOrthogonalDecomposition().solve(-c);
        q += 0.8 * step;
    }
    return q;
}

} // namespace

TEST_CASE("constraints require a closed loop") {
    const MechanismSpec mech = testing::chain_pendulum({2});
    const KinematicTree tree = build_tree(mech);
    CHECK_THROWS_AS(ConstraintSystem(mech, tree), TopologyError);
}

TEST_CASE("flat fabricated state of a closed-drawn loop satisfies C(0) = 0") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    const ConstraintSystem cs(mech, tree);
    CHECK(cs.rows() == 9);
    CHECK(cs.residual(Eigen::VectorXd::Zero(5)).norm() < 1e-14);
}

TEST_CASE("an independent root finder reaches a loop-consistent configuration") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    const ConstraintSystem cs(mech, tree);
    Eigen::VectorXd guess = Eigen::VectorXd::Zero(5);
    guess[0] = 0.5; // kick the crank off the flat branch
    guess[1] = -0.2;
    const Eigen::VectorXd q = solve_closure(cs, guess);
    CHECK(cs.residual(q).norm() < 1e-9);
    CHECK(q.norm() > 0.05); // found a non-flat branch, not the trivial zero

    // the three constraint points coincide in world space on both copies
    const auto placements = forward_kinematics(tree, mech, q);
    const auto& orig = placements.at(tree.cut_edge->original_body);
    const auto& dummy = placements.at(tree.cut_edge->dummy_body);
    for (const Eigen::Vector3d& p : tree.loop_points->points) {
        CHECK((orig.apply(p) - dummy.apply(p)).norm() < 1e-9);
    }
}

TEST_CASE("jacobian matches central finite differences at random q") {
    for (const MechanismSpec& mech : {testing::five_bar(), testing::spherical_six_bar()}) {
        const KinematicTree tree = build_tree(mech);
        const ConstraintSystem cs(mech, tree);
        const int n = tree.coordinate_count();
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd q = random_vector(rng, n, 0.7);
            const Eigen::MatrixXd analytic = cs.jacobian(q);
            Eigen::MatrixXd fd(analytic.rows(), n);
            const double h = 1e-6;
            for (int j = 0; j < n; ++j) {
                Eigen::VectorXd qp = q, qm = q;
                qp[j] += h;
                qm[j] -= h;
                fd.col(j) = (cs.residual(qp) - cs.residual(qm)) / (2 * h);
            }
            CHECK((analytic - fd).cwiseAbs().maxCoeff() < 1e-6);
        }
    }
}

TEST_CASE("stabilized rhs: no error means no alpha/beta contribution") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    const ConstraintSystem cs(mech, tree);
    const Eigen::VectorXd q = Eigen::VectorXd::Zero(5); // C = 0
    const Eigen::VectorXd qd = Eigen::VectorXd::Zero(5); // Cdot = 0
    const auto [a_on, b_on] = stabilized_acceleration_rhs(cs, {30.0, 50.0, true}, q, qd);
    const auto [a_off, b_off] = stabilized_acceleration_rhs(cs, {30.0, 50.0, false}, q, qd);
    CHECK((b_on - b_off).norm() < 1e-14);
    CHECK((a_on - a_off).norm() == 0.0);
}

TEST_CASE("stabilized rhs: disabled output is independent of alpha and beta") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    const ConstraintSystem cs(mech, tree);
    std::mt19937_64 rng(11);
    const Eigen::VectorXd q = random_vector(rng, 5, 0.4);
    const Eigen::VectorXd qd = random_vector(rng, 5, 1.0);
    const auto [a1, b1] = stabilized_acceleration_rhs(cs, {10.0, 10.0, false}, q, qd);
    const auto [a2, b2] = stabilized_acceleration_rhs(cs, {500.0, 2.0, false}, q, qd);
    CHECK((a1 - a2).norm() == 0.0);
    CHECK((b1 - b2).norm() == 0.0);
}

TEST_CASE("stabilized rhs: alpha/beta terms match the hand-expanded feedback law") {
    const MechanismSpec mech = testing::spherical_six_bar();
    const KinematicTree tree = build_tree(mech);
    const ConstraintSystem cs(mech, tree);
    std::mt19937_64 rng(13);
    const int n = tree.coordinate_count();
    const Eigen::VectorXd q = random_vector(rng, n, 0.4);
    const Eigen::VectorXd qd = random_vector(rng, n, 1.0);
    const double alpha = 2.0, beta = 2.0;
    const auto [a_fb, b_fb] = stabilized_acceleration_rhs(cs, {alpha, beta, true}, q, qd);
    const auto [a_raw, b_raw] = stabilized_acceleration_rhs(cs, {alpha, beta, false}, q, qd);
    const Eigen::VectorXd c = cs.residual(q);
    const Eigen::VectorXd cdot = cs.jacobian(q) * qd;
    const Eigen::VectorXd expected = b_raw - 2.0 * alpha * cdot - beta * beta * c;
    CHECK((b_fb - expected).norm() < 1e-10);
    CHECK((a_fb - a_raw).norm() == 0.0);
}

TEST_CASE("property: residual is invariant under rigid translation of the flat drawing") {
    const Eigen::Vector2d shift{0.37, -0.21};
    MechanismSpec mech = testing::five_bar();
    MechanismSpec moved = mech;
    for (auto& body : moved.bodies) {
        for (auto& v : body.polygon) v += shift;
    }
    for (auto& joint : moved.joints) {
        joint.axis_p1 += Eigen::Vector3d{shift.x(), shift.y(), 0.0};
        joint.axis_p2 += Eigen::Vector3d{shift.x(), shift.y(), 0.0};
    }
    const KinematicTree tree = build_tree(mech);
    const KinematicTree tree2 = build_tree(moved);
    const ConstraintSystem cs(mech, tree);
    const ConstraintSystem cs2(moved, tree2);
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd q = random_vector(rng, 5, 0.8);
        CHECK((cs.residual(q) - cs2.residual(q)).norm() < 1e-12);
        CHECK((cs.jacobian(q) - cs2.jacobian(q)).norm() < 1e-10);
    }
}
