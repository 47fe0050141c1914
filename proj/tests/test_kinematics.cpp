#include <doctest.h>

#include <numbers>
#include <random>

#include "foldsim/kinematics.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace foldsim;

namespace {

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = u(rng);
    return v;
}

} // namespace

TEST_CASE("build_tree: open chain has no cut edge") {
    const MechanismSpec mech = testing::chain_pendulum({3});
    const KinematicTree tree = build_tree(mech);
    CHECK(tree.root == "base");
    CHECK(tree.edges.size() == 3);
    CHECK_FALSE(tree.cut_edge.has_value());
    CHECK(tree.coordinate_count() == 3);
}

TEST_CASE("build_tree: single body yields a root-only tree") {
    MechanismSpec mech;
    mech.materials.push_back(testing::sheet_material());
    BodySpec body;
    body.id = "only";
    body.newtonian = true;
    body.polygon = {{0, 0}, {0.1, 0}, {0.1, 0.1}, {0, 0.1}};
    body.layers.push_back({"sheet", std::nullopt});
    mech.bodies.push_back(body);
    const KinematicTree tree = build_tree(mech);
    CHECK(tree.edges.empty());
    CHECK(tree.coordinate_count() == 0);
}

TEST_CASE("build_tree: five-bar loop splits the cut joint's child with halved mass") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    REQUIRE(tree.cut_edge.has_value());
    CHECK(tree.cut_edge->joint == "j3");
    CHECK(tree.cut_edge->original_body == "link3");
    CHECK(tree.cut_edge->dummy_body == "link3__dummy");
    REQUIRE(tree.loop_points.has_value());
    CHECK(tree.edges.size() == 5); // four moving links + the dummy copy

    const ArticulatedModel model(mech, tree);
    const MassProperties full =
        compute_mass_properties(*mech.find_body("link3"), mech.materials);
    const auto& orig = model.nodes()[model.node_index("link3")];
    const auto& dummy = model.nodes()[model.node_index("link3__dummy")];
    CHECK(orig.props.mass == doctest::Approx(full.mass / 2));
    CHECK(dummy.props.mass == doctest::Approx(full.mass / 2));
    CHECK(orig.props.inertia(2, 2) == doctest::Approx(full.inertia(2, 2) / 2));
    CHECK(dummy.props.inertia(2, 2) == doctest::Approx(full.inertia(2, 2) / 2));
    CHECK(dummy.is_dummy);

    // constraint points: vertex triple of the split polygon, pairwise distinct
    const auto& pts = tree.loop_points->points;
    const double area =
        0.5 * ((pts[1] - pts[0]).cross(pts[2] - pts[0])).norm();
    CHECK(area > 1e-12);
}

TEST_CASE("forward_kinematics: q = 0 is the flat fabricated state") {
    const MechanismSpec mech = testing::four_bar();
    const KinematicTree tree = build_tree(mech);
    const auto placements = forward_kinematics(tree, mech, Eigen::VectorXd::Zero(4));
    for (const auto& [body, placement] : placements) {
        CAPTURE(body);
        CHECK((placement.rotation - Eigen::Matrix3d::Identity()).norm() < 1e-15);
        CHECK(placement.origin.norm() < 1e-15);
    }
}

TEST_CASE("forward_kinematics: single pendulum quarter turn about z") {
    const MechanismSpec mech = testing::chain_pendulum({1});
    const KinematicTree tree = build_tree(mech);
    Eigen::VectorXd q(1);
    q[0] = std::numbers::pi / 2;
    const auto placements = forward_kinematics(tree, mech, q);
    Eigen::Matrix3d expected;
    expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK((placements.at("link1").rotation - expected).norm() < 1e-14);
    // the hinge point stays put
    CHECK(placements.at("link1").apply({0, 0, 0}).norm() < 1e-15);
}

TEST_CASE("forward_kinematics: triple pendulum tip matches the transform-chain route") {
    const MechanismSpec mech = testing::chain_pendulum({3, 0.1, 0.02});
    const KinematicTree tree = build_tree(mech);

    testing::TransformChainOracle oracle;
    for (int i = 0; i < 3; ++i) {
        oracle.links.push_back({{0.0, -0.1 * i, 0.0}, {0.0, 0.0, 1.0}});
    }

    Eigen::VectorXd q(3);
    q << 0.1, 0.2, 0.3;
    const auto placements = forward_kinematics(tree, mech, q);
    const Eigen::Vector3d tip_flat{0.0, -0.3, 0.0};
    const Eigen::Vector3d tip = placements.at("link3").apply(tip_flat);
    const Eigen::Vector3d expected = oracle.placement(q, 2) * tip_flat;
    CHECK((tip - expected).norm() < 1e-12);
}

TEST_CASE("point_velocity: zero rates give zero velocity") {
    const MechanismSpec mech = testing::five_bar();
    const KinematicTree tree = build_tree(mech);
    std::mt19937_64 rng(1);
    const Eigen::VectorXd q = random_vector(rng, 5, 0.5);
    const Eigen::VectorXd qd = Eigen::VectorXd::Zero(5);
    CHECK(point_velocity(tree, mech, q, qd, "link2", {0.02, 0.05, 0.0}).norm() == 0.0);
}

TEST_CASE("point_velocity: single pendulum rim speed is omega x r") {
    const MechanismSpec mech = testing::chain_pendulum({1});
    const KinematicTree tree = build_tree(mech);
    Eigen::VectorXd q(1), qd(1);
    q[0] = 0.0;
    qd[0] = 1.0;
    const Eigen::Vector3d v = point_velocity(tree, mech, q, qd, "link1", {0.0, -0.2, 0.0});
    CHECK(v.norm() == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(v.dot(Eigen::Vector3d{0.0, -0.2, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("point_velocity: matches central finite differences of forward kinematics") {
    const MechanismSpec specs[] = {testing::chain_pendulum({3}), testing::five_bar(),
                                   testing::spherical_six_bar()};
    std::mt19937_64 rng(99);
    for (const MechanismSpec& mech : specs) {
        const KinematicTree tree = build_tree(mech);
        const int n = tree.coordinate_count();
        const std::string body = mech.bodies.back().id;
        const Eigen::Vector3d point{0.01, 0.015, 0.0};
        for (int trial = 0; trial < 5; ++trial) {
            const Eigen::VectorXd q = random_vector(rng, n, 0.6);
            const Eigen::VectorXd qd = random_vector(rng, n, 2.0);
            const double dt = 1e-6;
            const auto fwd = forward_kinematics(tree, mech, q + dt * qd);
            const auto bwd = forward_kinematics(tree, mech, q - dt * qd);
            const Eigen::Vector3d fd =
                (fwd.at(body).apply(point) - bwd.at(body).apply(point)) / (2 * dt);
            const Eigen::Vector3d analytic = point_velocity(tree, mech, q, qd, body, point);
            CHECK((analytic - fd).norm() < 1e-6);
        }
    }
}

TEST_CASE("property: rotations stay orthonormal at random q") {
    const MechanismSpec mech = testing::spherical_six_bar();
    const KinematicTree tree = build_tree(mech);
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd q = random_vector(rng, tree.coordinate_count(), 3.0);
        for (const auto& [body, placement] : forward_kinematics(tree, mech, q)) {
            CAPTURE(body);
            CHECK((placement.rotation.transpose() * placement.rotation -
                   Eigen::Matrix3d::Identity())
                      .norm() < 1e-10);
            CHECK(placement.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("property: point velocity is linear in qdot") {
    const MechanismSpec mech = testing::chain_pendulum({3});
    const KinematicTree tree = build_tree(mech);
    std::mt19937_64 rng(17);
    const Eigen::Vector3d point{0.005, -0.22, 0.0};
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::VectorXd q = random_vector(rng, 3, 1.0);
        const Eigen::VectorXd qd1 = random_vector(rng, 3, 2.0);
        const Eigen::VectorXd qd2 = random_vector(rng, 3, 2.0);
        const double a = 0.7, b = -1.3;
        const Eigen::Vector3d combined =
            point_velocity(tree, mech, q, a * qd1 + b * qd2, "link3", point);
        const Eigen::Vector3d sum = a * point_velocity(tree, mech, q, qd1, "link3", point) +
                                    b * point_velocity(tree, mech, q, qd2, "link3", point);
        CHECK((combined - sum).norm() < 1e-12);
    }
}

TEST_CASE("sweep: acceleration bias matches finite differences of point velocity") {
    // The qddot = 0 remainder acceleration drives both Kane's equations and
    // the constraint velocity-product term, so cross-check it directly.
    const MechanismSpec mech = testing::spherical_six_bar();
    const KinematicTree tree = build_tree(mech);
    const ArticulatedModel model(mech, tree);
    std::mt19937_64 rng(23);
    const int n = tree.coordinate_count();
    const Eigen::Vector3d point{0.02, 0.01, 0.0};
    const int node = model.node_index("b4");
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd q = random_vector(rng, n, 0.5);
        const Eigen::VectorXd qd = random_vector(rng, n, 1.5);
        const double dt = 1e-6;
        // frozen rates: advance q along qd, keep qd fixed -> d v/dt = bias accel
        const Eigen::Vector3d vf =
            model.sweep(q + dt * qd, qd).point_velocity(node, point);
        const Eigen::Vector3d vb =
            model.sweep(q - dt * qd, qd).point_velocity(node, point);
        const Eigen::Vector3d fd = (vf - vb) / (2 * dt);
        const Eigen::Vector3d bias = model.sweep(q, qd).point_accel_bias(node, point);
        CHECK((bias - fd).norm() < 1e-5);
    }
}
