#include <gtest/gtest.h>

#include <cmath>

#include "crowdsim/rng.hpp"
#include "crowdsim/run_loop.hpp"
#include "crowdsim/social_force.hpp"

using namespace crowd;
using namespace crowd::social_force;

namespace {

const ForceParams kParams{};

AgentState agent_at(std::size_t id, Vec2 p, Vec2 v = {}) {
    AgentState a;
    a.id = id;
    a.position = p;
    a.velocity = v;
    return a;
}

}  // namespace

TEST(DrivingForce, StationaryIsolatedAgent) {
    const Vec2 f = driving_force({}, {}, {0.0, -1.0}, 60.0, 1.3, kParams);
    EXPECT_NEAR(norm(f), 78.0, 1e-12);
    EXPECT_NEAR(f.y, -78.0, 1e-12);
}

TEST(DrivingForce, ZeroAtDesiredVelocity) {
    const Vec2 e = normalized(Vec2{0.3, -1.0});
    const Vec2 f = driving_force(e * 1.3, {}, e, 60.0, 1.3, kParams);
    EXPECT_NEAR(norm(f), 0.0, 1e-12);
}

TEST(DrivingForce, PureHerdingFollowsNeighbors) {
    ForceParams p;
    p.herding = 1.0;
    const std::vector<Vec2> nb{{1.0, 0.0}, {0.0, 2.0}, {-0.4, 0.1}};
    const Vec2 v0 = desired_velocity({0.0, -1.0}, nb, 1.3, p);
    EXPECT_NEAR(v0.x, 0.2, 1e-12);
    EXPECT_NEAR(v0.y, 0.7, 1e-12);
}

TEST(DrivingForce, HerdingBlend) {
    const std::vector<Vec2> nb{{1.0, 0.0}};
    const Vec2 v0 = desired_velocity({0.0, -1.0}, nb, 1.3, kParams);
    EXPECT_NEAR(v0.x, 0.2, 1e-12);
    EXPECT_NEAR(v0.y, -0.8 * 1.3, 1e-12);
}

TEST(AgentRepulsion, ExactContact) {
    const Vec2 f = agent_repulsion({0, 0}, {}, {0.3, 0}, {}, 0.3, kParams);
    EXPECT_NEAR(f.x, -2000.0, 1e-9);
    EXPECT_NEAR(f.y, 0.0, 1e-9);
}

TEST(AgentRepulsion, TenFallOffLengthsApart) {
    const Vec2 f = agent_repulsion({0, 0}, {}, {0, 1.1}, {}, 0.3, kParams);
    EXPECT_NEAR(norm(f), 2000.0 * std::exp(-10.0), 1e-12);
    EXPECT_NEAR(norm(f), 0.0908, 1e-4);
}

TEST(AgentRepulsion, SmallOverlap) {
    const Vec2 f = agent_repulsion({0, 0}, {}, {0.29, 0}, {}, 0.3, kParams);
    EXPECT_NEAR(-f.x, 2000.0 * std::exp(0.125) + 120.0, 1e-9);
    EXPECT_NEAR(-f.x, 2386.3, 0.05);
}

TEST(AgentRepulsion, SlidingFrictionActsAlongTangent) {
    // j at +x; relative tangential speed 1 m/s along t = (0, 1) for i's frame
    const Vec2 pi{0, 0};
    const Vec2 pj{0.29, 0};
    const Vec2 f = agent_repulsion(pi, {0, 0}, pj, {0, 1.0}, 0.3, kParams);
    const Vec2 n = normalized(pi - pj);
    const Vec2 t{-n.y, n.x};
    const double dv = dot(Vec2{0, 1.0}, t);
    EXPECT_NEAR(dot(f, t), 24000.0 * 0.01 * dv, 1e-9);
}

TEST(AgentRepulsion, CoincidentCentersAreAnError) {
    EXPECT_THROW(agent_repulsion({1, 1}, {}, {1, 1}, {}, 0.3, kParams), std::domain_error);
}

TEST(AgentRepulsion, AntisymmetricOnRandomPairs) {
    Rng rng(3);
    for (int k = 0; k < 2000; ++k) {
        const Vec2 pi{rng.uniform(0, 2), rng.uniform(0, 2)};
        const Vec2 pj{rng.uniform(0, 2), rng.uniform(0, 2)};
        const Vec2 vi{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec2 vj{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const Vec2 a = agent_repulsion(pi, vi, pj, vj, 0.3, kParams);
        const Vec2 b = agent_repulsion(pj, vj, pi, vi, 0.3, kParams);
        const double scale = std::max(1.0, norm(a));
        ASSERT_NEAR(a.x + b.x, 0.0, 1e-9 * scale);
        ASSERT_NEAR(a.y + b.y, 0.0, 1e-9 * scale);
    }
}

TEST(AgentRepulsion, MagnitudeDecreasesWithDistanceOutsideContact) {
    Rng rng(4);
    for (int k = 0; k < 1000; ++k) {
        const double d1 = 0.3 + rng.uniform(1e-6, 2.0);
        const double d2 = d1 + rng.uniform(1e-6, 1.0);
        const double f1 = norm(agent_repulsion({0, 0}, {}, {d1, 0}, {}, 0.3, kParams));
        const double f2 = norm(agent_repulsion({0, 0}, {}, {d2, 0}, {}, 0.3, kParams));
        ASSERT_GT(f1, f2);
    }
}

TEST(AgentRepulsion, NormalForceContinuousAtContact) {
    const double inside = norm(agent_repulsion({0, 0}, {}, {0.3 - 1e-10, 0}, {}, 0.3, kParams));
    const double outside = norm(agent_repulsion({0, 0}, {}, {0.3 + 1e-10, 0}, {}, 0.3, kParams));
    EXPECT_NEAR(inside, outside, 1e-5);
}

TEST(WallForce, TouchingStationaryAgent) {
    const Segment wall{{0, 0}, {10, 0}};
    const Vec2 f = wall_force({5, 0.15}, {}, 0.15, wall, kParams);
    EXPECT_NEAR(f.x, 0.0, 1e-9);
    EXPECT_NEAR(f.y, 2000.0, 1e-9);
}

TEST(WallForce, TenFallOffLengthsAway) {
    const Segment wall{{0, 0}, {10, 0}};
    const Vec2 f = wall_force({5, 0.95}, {}, 0.15, wall, kParams);
    EXPECT_NEAR(norm(f), 0.0908, 1e-4);
}

TEST(WallForce, TangentialTermOpposesSliding) {
    const Segment wall{{0, 0}, {10, 0}};
    const double overlap = 0.01;
    const Vec2 v{1.0, 0.0};
    const Vec2 f = wall_force({5, 0.15 - overlap}, v, 0.15, wall, kParams);
    const Vec2 n{0, 1};
    const Vec2 t{-n.y, n.x};
    EXPECT_NEAR(dot(f, t), -24000.0 * overlap * dot(v, t), 1e-9);
    EXPECT_NEAR(f.x, -240.0, 1e-9);
    EXPECT_NEAR(f.y, 2000.0 * std::exp(0.01 / 0.08) + 12000.0 * overlap, 1e-9);
}

TEST(WallForce, CenterOnWallIsAnError) {
    EXPECT_THROW(wall_force({5, 0}, {}, 0.15, {{0, 0}, {10, 0}}, kParams), std::domain_error);
}

TEST(SocialForceStep, IsolatedAgentRelaxesToPreferredSpeed) {
    SceneConfig s;
    s.n_agents = 1;
    Engine engine(s, kParams);
    std::vector<AgentState> agents{agent_at(0, {15.0, 20.0})};
    const double dt = s.time_step;
    double previous = 0.0;
    for (int k = 1; k <= 100; ++k) {
        engine.step(agents, dt);
        const double speed = norm(agents[0].velocity);
        EXPECT_GT(speed, previous);
        EXPECT_LT(speed, 1.3);
        EXPECT_NEAR(agents[0].position.x, 15.0, 1e-12);
        previous = speed;
    }
    EXPECT_NEAR(norm(agents[0].velocity), 1.3 * (1.0 - std::exp(-5.0)),
                0.01 * 1.3 * (1.0 - std::exp(-5.0)));
}

TEST(SocialForceStep, SymmetricPairPushesApartSymmetrically) {
    SceneConfig s;
    s.n_agents = 2;
    Engine engine(s, kParams);
    std::vector<AgentState> agents{agent_at(0, {14.86, 10.0}), agent_at(1, {15.14, 10.0})};
    engine.rebuild_grid(agents);
    const Vec2 f0 = engine.total_force(agents, 0);
    const Vec2 f1 = engine.total_force(agents, 1);
    EXPECT_NEAR(f0.x, -f1.x, 1e-9);
    EXPECT_NEAR(f0.y, f1.y, 1e-9);
    EXPECT_LT(f0.x, -1000.0);
    engine.step(agents, s.time_step);
    EXPECT_LT(agents[0].velocity.x, 0.0);
    EXPECT_NEAR(agents[0].velocity.x, -agents[1].velocity.x, 1e-12);
}

TEST(SocialForceStep, SpeedNeverExceedsMaximum) {
    SceneConfig s;
    s.n_agents = 400;
    Engine engine(s, kParams);
    auto agents = init_scene(s, 5);
    for (int k = 0; k < 400; ++k) {
        engine.step(agents, s.time_step);
        for (auto& a : agents) {
            ASSERT_LE(norm(a.velocity), s.max_speed + 1e-12);
            if (!a.evacuated_at && beyond_exit(a.position, s)) {
                a.evacuated_at = k * s.time_step;
            }
        }
    }
}

TEST(RunSocialForce, DeterministicAndConserving) {
    SceneConfig s;
    s.n_agents = 60;
    const auto a = run_social_force(s, 9);
    const auto b = run_social_force(s, 9);
    EXPECT_TRUE(a == b);
    EXPECT_EQ(a.evacuated_count(), 60u);
    EXPECT_LE(a.step_count(), static_cast<std::size_t>(s.max_sim_time / s.time_step));
    std::size_t last = a.frame_count() - 1;
    std::size_t present = 0;
    for (std::size_t i = 0; i < a.n_agents; ++i) {
        present += a.present(last, i) && !a.evacuated_at[i];
    }
    EXPECT_EQ(a.evacuated_count() + present, a.n_agents);
}

TEST(ExitDirection, AimsAtUsableOpening) {
    SceneConfig s;
    const Vec2 straight = exit_direction(s, {15.0, 5.0});
    EXPECT_NEAR(straight.x, 0.0, 1e-12);
    EXPECT_NEAR(straight.y, -1.0, 1e-12);
    const Vec2 side = exit_direction(s, {5.0, 0.2});
    EXPECT_GT(side.x, 0.9);
    const Vec2 q = Vec2{5.0, 0.2} + side * (norm(Vec2{14.55 - 5.0, -0.2}));
    EXPECT_NEAR(q.x, 14.55, 1e-9);
    EXPECT_NEAR(q.y, 0.0, 1e-9);
}
