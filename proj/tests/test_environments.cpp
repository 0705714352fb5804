#include "sets/env/config.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace sets;
using namespace sets::env;
using sets::testing::random_vector;

namespace {

const std::string kConfigDir = std::string(SETS_SOURCE_DIR) + "/configs";

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

NetParams net_params(double k_n, double c_n) {
  NetParams p;
  p.stiffness = k_n;
  p.damping = c_n;
  return p;
}

/// Stretched, moving chain with the target pressed into node 1.
Vector excited_net_state(const SpacecraftNetConfig& c) {
  Vector x = spacecraft_net_initial_state(c, Eigen::Vector2d::Zero());
  for (int i = 0; i < c.chain_nodes; ++i) x.segment<2>(4 * i) = Eigen::Vector2d(1.15 * i, 0.05 * (i % 2));
  x.segment<2>(4 * 0 + 2) = Eigen::Vector2d(-0.05, 0.02);
  x.segment<2>(4 * 2 + 2) = Eigen::Vector2d(0.03, -0.04);
  x.segment<2>(4 * c.chain_nodes) = Eigen::Vector2d(1.15, -0.2);
  x.segment<2>(4 * c.chain_nodes + 2) = Eigen::Vector2d(0.0, 0.05);
  return x;
}

GliderConfig glider_config() { return glider_config_from(load_json_file(kConfigDir + "/glider.json")); }

}  // namespace

TEST(DoubleIntegrator, RewardShaping) {
  DoubleIntegratorConfig c;
  c.goal = Eigen::Vector2d(1.0, 2.0);
  c.reward_scale = 0.5;
  const auto mdp = make_double_integrator(c);
  EXPECT_DOUBLE_EQ(mdp.stage_reward((Vector(4) << 1, 2, 0, 0).finished()), 1.0);
  EXPECT_NEAR(mdp.stage_reward((Vector(4) << 1.5, 2, 0, 0).finished()), 0.5, 1e-15);
  const Vector x = (Vector(4) << 0.2, 0.3, 0.4, -0.5).finished();
  EXPECT_EQ(step(mdp, x, Vector::Zero(2)).tail<2>(), x.tail<2>());
}

TEST(TrackedVehicle, RewardExamples) {
  EXPECT_DOUBLE_EQ(tracked_vehicle_reward((Vector(5) << 0, 0, 0, 0.7, 0.2).finished(), 0.7, 0.2), 1.0);
  EXPECT_NEAR(tracked_vehicle_reward((Vector(5) << 0, 0, 0, 1.0, 0.2).finished(), 0.0, 0.2), 0.2, 1e-15);
  EXPECT_DOUBLE_EQ(tracked_vehicle_reward((Vector(5) << 0, 0, 0, 1.8, 1.5).finished(), -1.0, -1.0), 0.0);
}

TEST(TrackedVehicle, DegradationScalesForwardCommand) {
  TrackedVehicleConfig c;
  c.degradation = {-0.25, 0.0, 0.0, 0.0};
  const auto degraded = make_tracked_vehicle(c, nullptr);
  const auto nominal = make_tracked_vehicle(TrackedVehicleConfig{}, nullptr);
  const Vector x = Vector::Zero(5);
  const double dv_deg = step(degraded, x, v2(1, 0.5))[3];
  const double dv_nom = step(nominal, x, v2(1, 0.5))[3];
  EXPECT_NEAR(dv_deg / dv_nom, 0.75, 1e-15);
  EXPECT_DOUBLE_EQ(step(degraded, x, v2(1, 0.5))[4], step(nominal, x, v2(1, 0.5))[4]);
}

TEST(TrackedVehicle, FootprintOffGridIsUnsafe) {
  auto grid = std::make_shared<const HazardGrid>(HazardGrid(Eigen::Vector2d(0, 0), 0.1, 20, 20));
  const auto mdp = make_tracked_vehicle(TrackedVehicleConfig{}, grid);
  EXPECT_FALSE(mdp.is_unsafe((Vector(5) << 1.0, 1.0, 0, 0, 0).finished()));
  EXPECT_TRUE(mdp.is_unsafe((Vector(5) << 0.1, 1.0, 0, 0, 0).finished()));
  EXPECT_TRUE(mdp.is_unsafe((Vector(5) << 5.0, 1.0, 0, 0, 0).finished()));
}

TEST(HazardGrid, DiscCollision) {
  HazardGrid g(Eigen::Vector2d(-1, -1), 0.1, 20, 20);
  g.fill_rect(0.3, -1.0, 0.5, 1.0);
  EXPECT_FALSE(g.disc_collides(0.0, 0.0, 0.2));
  EXPECT_TRUE(g.disc_collides(0.15, 0.0, 0.2));
  EXPECT_TRUE(g.disc_collides(0.4, 0.0, 0.01));
  EXPECT_TRUE(g.disc_collides(-0.9, 0.0, 0.2));
}

TEST(HazardGrid, JsonRoundTrip) {
  const HazardGrid g = make_chicane_map();
  const HazardGrid back = hazard_grid_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(back.rows, g.rows);
  EXPECT_EQ(back.cols, g.cols);
  EXPECT_EQ(back.resolution, g.resolution);
  EXPECT_EQ(back.origin, g.origin);
  EXPECT_EQ(back.cells, g.cells);
  auto bad = to_json(g);
  bad["data"].erase(bad["data"].begin());
  EXPECT_THROW(hazard_grid_from_json(bad), ConfigError);
  EXPECT_THROW(HazardGrid(Eigen::Vector2d::Zero(), 0.0, 2, 2), ConfigError);
}

TEST(HazardGrid, ChicaneLayout) {
  const HazardGrid g = make_chicane_map();
  EXPECT_FALSE(g.disc_collides(0.0, 0.0, 0.3));
  EXPECT_TRUE(g.disc_collides(5.2, 0.0, 0.3));   // first baffle
  EXPECT_FALSE(g.disc_collides(5.2, 1.6, 0.3));  // its gap
  EXPECT_TRUE(g.disc_collides(10.2, 0.0, 0.3));
  EXPECT_FALSE(g.disc_collides(10.2, -1.6, 0.3));
}

TEST(NetForce, TensionOnly) {
  const Eigen::Vector2d z = Eigen::Vector2d::Zero();
  const NetParams p = net_params(10.0, 0.0);
  EXPECT_EQ(net_segment_force(z, Eigen::Vector2d(1.0, 0), z, z, p).magnitude, 0.0);
  EXPECT_EQ(net_segment_force(z, Eigen::Vector2d(0.5, 0), z, z, p).magnitude, 0.0);
  const PairForce f = net_segment_force(z, Eigen::Vector2d(0, 1.1), z, z, p);
  EXPECT_NEAR(f.magnitude, 1.0, 1e-12);
  EXPECT_NEAR(f.on_first.y(), 1.0, 1e-12);
  EXPECT_EQ(f.on_first + f.on_second, z);
  EXPECT_TRUE(net_segment_force(z, z, z, z, p).degenerate);
}

TEST(NetForce, DampingResistsStretching) {
  const Eigen::Vector2d z = Eigen::Vector2d::Zero();
  const NetParams p = net_params(10.0, 2.0);
  const PairForce opening = net_segment_force(z, Eigen::Vector2d(1.1, 0), z, Eigen::Vector2d(0.1, 0), p);
  const PairForce closing = net_segment_force(z, Eigen::Vector2d(1.1, 0), z, Eigen::Vector2d(-0.1, 0), p);
  EXPECT_NEAR(opening.magnitude, 1.2, 1e-12);
  EXPECT_NEAR(closing.magnitude, 0.8, 1e-12);
}

TEST(ContactForce, Examples) {
  NetParams p;
  p.contact_stiffness = 5.0;
  p.target_radius = 0.3;
  const Eigen::Vector2d z = Eigen::Vector2d::Zero();
  EXPECT_EQ(contact_force(z, z, Eigen::Vector2d(0.3, 0), z, p).magnitude, 0.0);
  const PairForce f = contact_force(z, z, Eigen::Vector2d(0.15, 0), z, p);
  EXPECT_NEAR(std::abs(f.magnitude), 5.0 * 0.3 / 2.0, 1e-12);
  EXPECT_LT(f.on_first.x(), 0.0);   // node pushed away from the target
  EXPECT_GT(f.on_second.x(), 0.0);  // target pushed away from the node
  EXPECT_EQ(f.on_first + f.on_second, z);
}

TEST(SpacecraftNet, RestingSlackNetOnlyFeelsThrust) {
  const SpacecraftNetConfig c;
  const SpacecraftNet net(c);
  const Vector x = spacecraft_net_initial_state(c, Eigen::Vector2d(1.35, -1.0));
  const Vector u = (Vector(4) << 0.1, -0.2, 0.05, 0.0).finished();
  const Vector next = net.step(x, u);
  for (int i = 0; i < net.particle_count(); ++i) {
    Eigen::Vector2d expected = Eigen::Vector2d::Zero();
    if (i == 0) expected = c.dt * u.segment<2>(0) / c.spacecraft_mass;
    if (i == c.chain_nodes - 1) expected = c.dt * u.segment<2>(2) / c.spacecraft_mass;
    EXPECT_LE((SpacecraftNet::velocity(next, i) - expected).norm(), 1e-15);
  }
}

TEST(SpacecraftNet, RewardMaximumIsWeightSum) {
  SpacecraftNetConfig c;
  c.desired_velocity = Eigen::Vector2d(0.0, -0.1);
  const SpacecraftNet net(c);
  Vector x = spacecraft_net_initial_state(c, Eigen::Vector2d::Zero());
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (int i = 0; i < c.chain_nodes; ++i) centroid += SpacecraftNet::position(x, i);
  centroid /= c.chain_nodes;
  x.segment<2>(4 * c.chain_nodes) = centroid;
  for (int i = 0; i <= c.chain_nodes; ++i) x.segment<2>(4 * i + 2) = c.desired_velocity;
  EXPECT_NEAR(net.reward(x), c.c1 + c.c2 + c.c3, 1e-15);
}

TEST(SpacecraftNet, MomentumChangeEqualsImpulse) {
  SpacecraftNetConfig c;
  c.net.damping = 0.3;
  c.net.contact_damping = 0.2;
  const SpacecraftNet net(c);
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = excited_net_state(c) + 0.02 * random_vector(rng, net.state_dim(), -1, 1);
    const Vector u = random_vector(rng, 4, -0.2, 0.2);
    const Eigen::Vector2d change = net.momentum(net.step(x, u)) - net.momentum(x);
    const Eigen::Vector2d impulse = c.dt * (u.segment<2>(0) + u.segment<2>(2));
    EXPECT_LE((change - impulse).norm(), 1e-12);
  }
}

TEST(SpacecraftNet, EnergyDriftSmallWithoutDamping) {
  SpacecraftNetConfig c;
  c.dt = 0.01;
  const SpacecraftNet net(c);
  Vector x = excited_net_state(c);
  const double e0 = net.energy(x);
  ASSERT_GT(e0, 0.0);
  for (int k = 0; k < 100; ++k) x = net.step(x, Vector::Zero(4));
  EXPECT_LE(std::abs(net.energy(x) - e0) / e0, 0.01);
}

TEST(SpacecraftNet, RejectsBadConstants) {
  SpacecraftNetConfig c;
  c.c1 = 0.6;
  EXPECT_THROW(SpacecraftNet{c}, ConfigError);
  c = SpacecraftNetConfig{};
  c.net.stiffness = -1.0;
  EXPECT_THROW(SpacecraftNet{c}, ConfigError);
}

TEST(SpacecraftNet, RewardInUnitInterval) {
  const SpacecraftNetConfig c;
  const SpacecraftNet net(c);
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double r = net.reward(random_vector(rng, net.state_dim(), -3, 5));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Glider, ObservationCone) {
  GliderConfig c = glider_config();
  Vector x = glider_default_initial_state();
  c.target = Eigen::Vector3d(50.0, 0.0, -100.0);
  EXPECT_TRUE(Glider(c).target_observed(x));
  c.target = Eigen::Vector3d(150.0, 0.0, -100.0);
  EXPECT_FALSE(Glider(c).target_observed(x));
  c.target = Eigen::Vector3d(40.0, 40.0, -100.0);  // 45° off the nose
  EXPECT_FALSE(Glider(c).target_observed(x));
  x[8] = std::numbers::pi / 4;  // yaw toward it
  EXPECT_TRUE(Glider(c).target_observed(x));
}

TEST(Glider, ObservationCounter) {
  GliderConfig c = glider_config();
  c.target = Eigen::Vector3d(50.0, 0.0, -100.0);
  const Glider seen(c);
  Vector x = glider_default_initial_state();
  x[12] = 37.0;
  EXPECT_EQ(seen.step(x, Vector::Zero(3))[12], 0.0);
  c.target = Eigen::Vector3d(-500.0, 0.0, -100.0);
  EXPECT_EQ(Glider(c).step(x, Vector::Zero(3))[12], 38.0);
}

TEST(Glider, RewardFormula) {
  const GliderConfig c = glider_config();
  const Glider g(c);
  Vector x = glider_default_initial_state();
  x[12] = 3.0;
  EXPECT_NEAR(g.reward(x), 0.1 * c.stay_alive_reward + 0.9, 1e-15);
  x[12] = c.observation_timescale + 1.0;
  const double d = (x.head<3>() - c.target).norm();
  EXPECT_NEAR(g.reward(x), 0.1 * c.stay_alive_reward + 0.45 * normalized_distance_reward(d, c.target_distance_scale), 1e-15);
}

TEST(Glider, DragDissipatesEnergy) {
  GliderConfig c = glider_config();
  c.thermal_force = 0.0;
  const Glider g(c);
  Vector x = glider_default_initial_state();
  const double e0 = g.energy(x);
  for (int k = 0; k < 100; ++k) x = g.step(x, Vector::Zero(3));
  EXPECT_LT(g.energy(x), e0);
}

TEST(Glider, ThermalAddsEnergy) {
  GliderConfig c = glider_config();
  Vector x = glider_default_initial_state();
  c.thermal_center = Eigen::Vector2d(0.0, 0.0);
  c.thermal_radius = 1000.0;
  const Glider lifted(c);
  c.thermal_force = 0.0;
  const Glider still(c);
  Vector a = x, b = x;
  for (int k = 0; k < 50; ++k) {
    a = lifted.step(a, Vector::Zero(3));
    b = still.step(b, Vector::Zero(3));
  }
  EXPECT_TRUE(lifted.in_thermal(x));
  // More potential energy: higher altitude, i.e. more negative down.
  EXPECT_LT(a[2], b[2]);
}

TEST(Glider, MissingCoefficientIsConfigError) {
  auto j = load_json_file(kConfigDir + "/glider.json");
  j["aero"].erase("Cm_q");
  try {
    glider_config_from(j);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("Cm_q"), std::string::npos);
  }
  j = load_json_file(kConfigDir + "/glider.json");
  j.erase("aero");
  EXPECT_THROW(glider_config_from(j), ConfigError);
  j = load_json_file(kConfigDir + "/glider.json");
  j["cone_half_angle_deg"] = 95.0;
  EXPECT_THROW(environment_from_json(j), ConfigError);
}

TEST(Glider, ControlBox) {
  const auto mdp = make_glider(glider_config());
  EXPECT_EQ(mdp.action_box.lower, Vector::Constant(3, -0.5));
  EXPECT_EQ(mdp.action_box.upper, Vector::Constant(3, 0.5));
  EXPECT_EQ(mdp.state_dim, 13);
}

TEST(Config, ShippedConfigsLoad) {
  int loaded = 0;
  for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".json") continue;
    const auto j = load_json_file(entry.path().string());
    const Environment e = environment_from_json(j);
    const PlannerConfig p = planner_config_from(j);
    EXPECT_FALSE(e.mdp.is_unsafe(e.initial_state)) << entry.path();
    EXPECT_GE(p.branch_len(), 1);
    ++loaded;
  }
  EXPECT_GE(loaded, 5);
}

TEST(Config, Errors) {
  EXPECT_THROW(environment_from_json(nlohmann::json{{"type", "quadrotor"}}), ConfigError);
  EXPECT_THROW(environment_from_json(nlohmann::json::object()), ConfigError);
  EXPECT_THROW(environment_from_json(nlohmann::json{{"type", "double_integrator"}, {"dt", "fast"}}), ConfigError);
  EXPECT_THROW(environment_from_json(nlohmann::json{{"type", "double_integrator"}, {"initial_state", {1, 2}}}), ConfigError);
  EXPECT_THROW(environment_from_json(nlohmann::json{
                   {"type", "double_integrator"}, {"obstacles", {{{"center", {0, 0}}, {"radius", 1}}}}}),
               ConfigError);
  EXPECT_THROW(planner_config_from(nlohmann::json{{"planner", {{"method", "MPPI"}}}}), ConfigError);
  EXPECT_THROW(planner_config_from(nlohmann::json{{"planner", {{"branch_len", 0}}}}), ConfigError);
  EXPECT_THROW(load_json_file("/nonexistent/config.json"), ConfigError);
}

TEST(Config, PlannerSection) {
  const auto p = planner_config_from(nlohmann::json::parse(R"({"planner": {
      "method": "UD-PS", "branch_len": 7, "eta": 5, "c1": 2, "c2": 0.5, "c3": 0.25,
      "mode_groups": [[0, 1]], "goal_bias": [1, 2, 0, 0], "goal_coordinates": [0, 1], "wall_ms": 30,
      "on_dare_failure": "mark_unsafe"}})"));
  EXPECT_EQ(p.method, Method::kUdPs);
  EXPECT_EQ(p.branch_len(), 7);
  EXPECT_EQ(p.eta, 5);
  EXPECT_EQ(p.constants.c1, 2.0);
  EXPECT_EQ(p.constants.c3, 0.25);
  EXPECT_EQ(p.expansion.mode_groups.size(), 1u);
  ASSERT_TRUE(p.expansion.goal_bias.has_value());
  EXPECT_EQ(p.expansion.goal_coordinates, (std::vector<int>{0, 1}));
  EXPECT_FALSE(p.budget.max_iterations.has_value());
  EXPECT_EQ(*p.budget.max_wall_time, std::chrono::milliseconds(30));
  EXPECT_EQ(p.expansion.on_dare_failure, DareFailurePolicy::kMarkUnsafe);
}

TEST(Config, SpacecraftDefaultTargetBelowChainCenter) {
  const auto e = environment_from_json(nlohmann::json{{"type", "spacecraft_net"}});
  EXPECT_NEAR(e.initial_state[16], 0.9 * 1.5, 1e-12);
  EXPECT_NEAR(e.initial_state[17], -1.0, 1e-12);
}
