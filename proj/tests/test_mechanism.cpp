#include <doctest.h>

#include <algorithm>
#include <random>

#include "foldsim/mechanism.hpp"
#include "support/fixtures.hpp"

using namespace foldsim;

namespace {

const char* kMinimalSingleBody = R"(
schema: 1
gravity: [0, -9.81, 0]
materials:
  - name: ps
    density: 1000.0
    thickness: 0.001
    youngs_modulus: 4.38327e9
    yield_stress: 4.284e7
bodies:
  - id: only
    newtonian: true
    polygon: [[0, 0], [0.1, 0], [0.1, 0.1], [0, 0.1]]
    layers:
      - material: ps
joints: []
)";

std::string six_body_loop_yaml() {
    // Six bodies, six joints, one cycle: a strip of five moving plates whose
    // last plate folds back onto the base.
    return serialize_mechanism(testing::planar_linkage(
        {{0.0, 0.0}, {0.0, 0.03}, {0.04, 0.05}, {0.08, 0.05}, {0.12, 0.03}, {0.12, 0.0}}));
}

} // namespace

TEST_CASE("parse: single newtonian body with no joints") {
    const MechanismSpec mech = parse_mechanism(kMinimalSingleBody);
    CHECK(mech.bodies.size() == 1);
    CHECK(mech.joints.empty());
    CHECK(mech.bodies[0].newtonian);
    CHECK(mech.gravity.y() == doctest::Approx(-9.81));
}

TEST_CASE("parse: six-body six-joint file has one detected cycle") {
    const MechanismSpec mech = parse_mechanism(six_body_loop_yaml());
    CHECK(mech.bodies.size() == 6);
    CHECK(mech.joints.size() == 6);
    CHECK(static_cast<int>(mech.joints.size()) - static_cast<int>(mech.bodies.size()) + 1 == 1);
}

TEST_CASE("parse: dangling body reference raises ReferenceError") {
    MechanismSpec mech = parse_mechanism(kMinimalSingleBody);
    JointSpec joint;
    joint.id = "j1";
    joint.parent = "only";
    joint.child = "b9";
    joint.axis_p1 = {0, 0, 0};
    joint.axis_p2 = {0, 0, 1};
    mech.joints.push_back(joint);
    CHECK_THROWS_AS(validate(mech), ReferenceError);
    CHECK_THROWS_AS(parse_mechanism(serialize_mechanism(mech)), ReferenceError);
}

TEST_CASE("parse: rejects unknown keys, bad schema and malformed documents") {
    CHECK_THROWS_AS(
        parse_mechanism("schema: 2\ngravity: [0,0,0]\nmaterials: []\nbodies: []\njoints: []"),
        SchemaError);
    CHECK_THROWS_AS(parse_mechanism("surprise: 1"), SchemaError);
    CHECK_THROWS_AS(parse_mechanism("[not, a, mechanism"), SchemaError);
    std::string with_unknown = kMinimalSingleBody;
    with_unknown += "\ncolor: red\n";
    CHECK_THROWS_AS(parse_mechanism(with_unknown), SchemaError);
}

TEST_CASE("parse: non-physical material constants raise ValueError") {
    std::string text = kMinimalSingleBody;
    const auto pos = text.find("density: 1000.0");
    text.replace(pos, 15, "density: -10.0 ");
    CHECK_THROWS_AS(parse_mechanism(text), ValueError);
}

TEST_CASE("validate: topology errors") {
    // disconnected
    MechanismSpec mech = testing::chain_pendulum({});
    BodySpec island;
    island.id = "island";
    island.polygon = {{0, 0}, {0.01, 0}, {0.01, 0.01}};
    island.layers.push_back({"sheet", std::nullopt});
    mech.bodies.push_back(island);
    CHECK_THROWS_AS(validate(mech), TopologyError);

    // two independent loops from doubled edges
    MechanismSpec two = testing::chain_pendulum({});
    for (int i = 0; i < 2; ++i) {
        JointSpec extra;
        extra.id = "extra" + std::to_string(i);
        extra.parent = "base";
        extra.child = "link1";
        extra.axis_p1 = {0.01 * (i + 1), 0, 0};
        extra.axis_p2 = {0.01 * (i + 1), 0, 1};
        two.joints.push_back(extra);
    }
    CHECK_THROWS_AS(validate(two), TopologyError);

    // self loop
    MechanismSpec self = testing::chain_pendulum({});
    JointSpec loop;
    loop.id = "self";
    loop.parent = "link1";
    loop.child = "link1";
    loop.axis_p1 = {0, 0, 0};
    loop.axis_p2 = {0, 0, 1};
    self.joints.push_back(loop);
    CHECK_THROWS_AS(validate(self), TopologyError);
}

TEST_CASE("validate: polygon and newtonian rules") {
    MechanismSpec mech = testing::chain_pendulum({});
    mech.bodies[1].polygon = {{0, 0}, {0.02, 0}, {0, 0.02}, {0.02, 0.02}}; // bowtie
    CHECK_THROWS_AS(validate(mech), ValueError);

    MechanismSpec twice = testing::chain_pendulum({});
    twice.bodies[1].newtonian = true;
    CHECK_THROWS_AS(validate(twice), SchemaError);
}

TEST_CASE("mass properties: unit square lamina") {
    BodySpec body;
    body.id = "square";
    body.polygon = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    body.layers.push_back({"unit", std::nullopt});
    const std::vector<MaterialSpec> materials{{"unit", 1.0, 1.0, 1.0, 1.0}};

    const MassProperties props = compute_mass_properties(body, materials);
    CHECK(props.mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(props.com.x() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(props.com.y() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(props.inertia(2, 2) == doctest::Approx(1.0 / 6.0).epsilon(1e-13));
    CHECK(props.inertia(0, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(props.inertia(1, 1) == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
    CHECK(props.inertia(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("mass properties: Monte Carlo cross-check on an irregular polygon") {
    BodySpec body;
    body.id = "blob";
    body.polygon = {{0, 0}, {0.9, 0.1}, {1.2, 0.8}, {0.5, 1.1}, {-0.2, 0.6}};
    body.layers.push_back({"unit", std::nullopt});
    const std::vector<MaterialSpec> materials{{"unit", 2.5, 1.0, 1.0, 1.0}};
    const MassProperties props = compute_mass_properties(body, materials);

    // Rejection sampling over the bounding box with an even-odd inside test.
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> ux(-0.2, 1.2), uy(0.0, 1.1);
    const auto inside = [&](double x, double y) {
        bool in = false;
        const auto& poly = body.polygon;
        for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
            if ((poly[i].y() > y) != (poly[j].y() > y) &&
                x < (poly[j].x() - poly[i].x()) * (y - poly[i].y()) /
                            (poly[j].y() - poly[i].y()) +
                        poly[i].x()) {
                in = !in;
            }
        }
        return in;
    };
    const int n = 400000;
    long hits = 0;
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng), y = uy(rng);
        if (!inside(x, y)) continue;
        ++hits;
        sx += x;
        sy += y;
    }
    const double box_area = 1.4 * 1.1;
    const double area = box_area * static_cast<double>(hits) / n;
    CHECK(props.mass == doctest::Approx(2.5 * area).epsilon(0.01));
    CHECK(props.com.x() == doctest::Approx(sx / hits).epsilon(0.01));
    CHECK(props.com.y() == doctest::Approx(sy / hits).epsilon(0.01));

    rng.seed(977);
    long hits2 = 0;
    double szz = 0;
    for (int i = 0; i < n; ++i) {
        const double x = ux(rng), y = uy(rng);
        if (!inside(x, y)) continue;
        ++hits2;
        szz += (x - props.com.x()) * (x - props.com.x()) +
               (y - props.com.y()) * (y - props.com.y());
    }
    const double izz = 2.5 * box_area * szz / n;
    CHECK(props.inertia(2, 2) == doctest::Approx(izz).epsilon(0.02));
}

TEST_CASE("mass properties: zero-thickness second layer adds nothing") {
    BodySpec body;
    body.id = "b";
    body.polygon = {{0, 0}, {0.1, 0}, {0.1, 0.05}, {0, 0.05}};
    body.layers.push_back({"sheet", std::nullopt});
    const std::vector<MaterialSpec> materials{testing::sheet_material()};
    const MassProperties one = compute_mass_properties(body, materials);
    body.layers.push_back({"sheet", 1e-300});
    const MassProperties two = compute_mass_properties(body, materials);
    CHECK(two.mass == doctest::Approx(one.mass).epsilon(1e-12));
    CHECK(two.inertia(2, 2) == doctest::Approx(one.inertia(2, 2)).epsilon(1e-12));
}

TEST_CASE("mass properties: point mass at a corner of a unit-mass square") {
    BodySpec body;
    body.id = "b";
    body.polygon = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    body.layers.push_back({"unit", std::nullopt});
    body.point_masses.push_back({{1.0, 1.0}, 1.0});
    const std::vector<MaterialSpec> materials{{"unit", 1.0, 1.0, 1.0, 1.0}};
    const MassProperties props = compute_mass_properties(body, materials);
    CHECK(props.mass == doctest::Approx(2.0));
    CHECK(props.com.x() == doctest::Approx(0.75));
    CHECK(props.com.y() == doctest::Approx(0.75));
}

TEST_CASE("mass properties: zero-area polygon raises ValueError") {
    BodySpec body;
    body.id = "line";
    body.polygon = {{0, 0}, {1, 0}, {2, 0}};
    body.layers.push_back({"unit", std::nullopt});
    const std::vector<MaterialSpec> materials{{"unit", 1.0, 1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(compute_mass_properties(body, materials), ValueError);
}

TEST_CASE("property: serialize/parse round trip is stable") {
    const MechanismSpec specs[] = {testing::chain_pendulum({3}), testing::four_bar(),
                                   testing::spherical_six_bar()};
    for (const MechanismSpec& mech : specs) {
        const std::string once = serialize_mechanism(mech);
        const std::string twice = serialize_mechanism(parse_mechanism(once));
        CHECK(once == twice);
    }
}

TEST_CASE("property: vertex-rotation invariance and translation equivariance") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    const std::vector<MaterialSpec> materials{{"unit", 3.0, 0.5, 1.0, 1.0}};
    for (int trial = 0; trial < 20; ++trial) {
        BodySpec body;
        body.id = "b";
        body.polygon = {{0, 0},
                        {0.9 + 0.1 * u(rng), 0.1},
                        {1.2, 0.8 + 0.1 * u(rng)},
                        {0.5, 1.1},
                        {-0.2 + 0.1 * u(rng), 0.6}};
        body.layers.push_back({"unit", std::nullopt});
        const MassProperties base = compute_mass_properties(body, materials);

        BodySpec rotated = body;
        std::rotate(rotated.polygon.begin(), rotated.polygon.begin() + trial % 5,
                    rotated.polygon.end());
        const MassProperties rot = compute_mass_properties(rotated, materials);
        CHECK(rot.mass == doctest::Approx(base.mass).epsilon(1e-12));
        CHECK((rot.com - base.com).norm() < 1e-12);
        CHECK((rot.inertia - base.inertia).norm() < 1e-12);

        const Eigen::Vector2d shift{u(rng), u(rng)};
        BodySpec moved = body;
        for (auto& v : moved.polygon) v += shift;
        const MassProperties trans = compute_mass_properties(moved, materials);
        CHECK(trans.mass == doctest::Approx(base.mass).epsilon(1e-12));
        CHECK((trans.com.head<2>() - (base.com.head<2>() + shift)).norm() < 1e-12);
        CHECK((trans.inertia - base.inertia).norm() < 1e-10);
    }
}

TEST_CASE("property: adding a point mass never decreases inertia about the origin") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<MaterialSpec> materials{{"unit", 1.0, 1.0, 1.0, 1.0}};
    for (int trial = 0; trial < 20; ++trial) {
        BodySpec body;
        body.id = "b";
        body.polygon = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        body.layers.push_back({"unit", std::nullopt});
        const MassProperties before = compute_mass_properties(body, materials);
        body.point_masses.push_back({{u(rng), u(rng)}, 0.1 + 0.4 * std::abs(u(rng))});
        const MassProperties after = compute_mass_properties(body, materials);
        const auto about_origin = [](const MassProperties& mp) {
            return mp.inertia(2, 2) + mp.mass * mp.com.head<2>().squaredNorm();
        };
        CHECK(about_origin(after) >= about_origin(before) - 1e-15);
    }
}

TEST_CASE("torque schedule lookup") {
    JointSpec joint;
    joint.external_torque = {{-1.0, 0.002}, {0.0, 0.0}, {0.5, -0.003}};
    CHECK(joint.torque_at(-2.0) == 0.0);
    CHECK(joint.torque_at(-1.0) == doctest::Approx(0.002));
    CHECK(joint.torque_at(-0.1) == doctest::Approx(0.002));
    CHECK(joint.torque_at(0.0) == 0.0);
    CHECK(joint.torque_at(0.499) == 0.0);
    CHECK(joint.torque_at(0.5) == doctest::Approx(-0.003));
    CHECK(joint.torque_before_zero() == doctest::Approx(0.002));
}
