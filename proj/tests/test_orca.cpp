#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>

#include "crowdsim/orca.hpp"
#include "crowdsim/rng.hpp"
#include "crowdsim/run_loop.hpp"
#include "orca_oracle.hpp"

using namespace crowd;
using namespace crowd::orca;
using namespace crowd::oracle;

namespace {

// Earliest time within `horizon` at which discs at relative position `p`
// moving with relative velocity `v` come closer than `r`; infinity if never.
double time_to_collision(Vec2 p, Vec2 v, double r, double horizon) {
    const double a = abs_sq(v);
    const double b = dot(p, v);
    const double c = abs_sq(p) - r * r;
    if (c < 0.0) {
        return 0.0;
    }
    if (a == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double disc = b * b - a * c;
    if (disc < 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double t = (-b - std::sqrt(disc)) / a;
    return t >= 0.0 && t <= horizon ? t : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(SolveVelocity, NoLinesGivesClampedPreference) {
    const Vec2 v = solve_velocity({}, {1.0, 0.5}, 2.0);
    EXPECT_EQ(v.x, 1.0);
    EXPECT_EQ(v.y, 0.5);
    const Vec2 w = solve_velocity({}, {3.0, 4.0}, 2.0);
    EXPECT_NEAR(w.x, 1.2, 1e-12);
    EXPECT_NEAR(w.y, 1.6, 1e-12);
}

TEST(SolveVelocity, SingleExcludingLineProjects) {
    // permitted: v.y >= 0.3
    const std::vector<OrcaLine> lines{{{0.0, 0.3}, {1.0, 0.0}}};
    const Vec2 v = solve_velocity(lines, {0.7, -0.5}, 2.0);
    EXPECT_NEAR(v.x, 0.7, 1e-12);
    EXPECT_NEAR(v.y, 0.3, 1e-12);
}

TEST(SolveVelocity, MatchesGridOracleOnRandomFeasibleSets) {
    Rng rng(2024);
    const auto start = std::chrono::steady_clock::now();
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Vec2 anchor = random_in_disc(rng, 1.5);
        const auto lines = random_feasible_lines(rng, 1 + rng.below(6), anchor);
        const Vec2 preferred = random_in_disc(rng, 2.5);
        const Vec2 v = solve_velocity(lines, preferred, kVmax);

        const auto oracle = grid_oracle([&](Vec2 x) { return satisfies(lines, x); },
                                        [&](Vec2 x) { return norm(x - preferred); });
        ASSERT_TRUE(oracle.found) << "trial " << trial;
        ASSERT_TRUE(satisfies(lines, v, 1e-9)) << "trial " << trial;
        ASSERT_LE(norm(v), kVmax + 1e-9);
        const double d = norm(v - preferred);
        EXPECT_LE(d, oracle.score + 1e-9) << "trial " << trial;
        const auto exact = enumerate_optimum(lines, preferred, kVmax);
        ASSERT_TRUE(exact) << "trial " << trial;
        EXPECT_NEAR(d, norm(*exact - preferred), 1e-9) << "trial " << trial;
        EXPECT_LE(norm(v - *exact), 1e-6) << "trial " << trial;
        ++checked;
    }
    EXPECT_EQ(checked, 1000);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 30.0);
}

TEST(SolveVelocity, InfeasibleSetsMinimizeLargestViolation) {
    Rng rng(77);
    int infeasible = 0;
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<OrcaLine> lines;
        const std::size_t n = 3 + rng.below(4);
        for (std::size_t k = 0; k < n; ++k) {
            const double a = rng.uniform(0.0, 2.0 * M_PI);
            const Vec2 d{std::cos(a), std::sin(a)};
            // Half-planes whose boundary passes outside the origin, facing away.
            lines.push_back({perp(d) * rng.uniform(0.2, 1.5), d});
        }
        const std::size_t hard = rng.below(2);
        const Vec2 preferred = random_in_disc(rng, 2.0);
        const bool hard_ok = hard == 0 || violation(lines[0], {}) <= 0.0 ||
                             norm(lines[0].point) < kVmax;
        if (!hard_ok) {
            continue;
        }
        const auto feasible = grid_oracle([&](Vec2 x) { return satisfies(lines, x); },
                                          [&](Vec2 x) { return norm(x - preferred); });
        if (feasible.found) {
            continue;
        }
        ++infeasible;
        const Vec2 v = solve_velocity(lines, hard, preferred, kVmax);
        auto worst = [&](Vec2 x) {
            double m = -std::numeric_limits<double>::infinity();
            for (std::size_t k = hard; k < lines.size(); ++k) {
                m = std::max(m, violation(lines[k], x));
            }
            return m;
        };
        const auto oracle = grid_oracle(
            [&](Vec2 x) { return hard == 0 || violation(lines[0], x) <= 0.0; }, worst);
        ASSERT_TRUE(oracle.found);
        if (hard) {
            EXPECT_LE(violation(lines[0], v), 1e-9) << "trial " << trial;
        }
        EXPECT_LE(norm(v), kVmax + 1e-9);
        EXPECT_LE(worst(v), oracle.score + 1e-3) << "trial " << trial;
    }
    EXPECT_GT(infeasible, 50);
}

TEST(OrcaLineAgent, DistantPairAtRestDoesNotBind) {
    const Disc a{{0, 0}, {0.5, 0.0}, 0.15};
    const Disc b{{4, 3}, {0.5, 0.0}, 0.15};
    const auto line = orca_line_agent(a, b, 0.5, 0.05);
    EXPECT_LE(violation(line, a.velocity), 0.0);
    EXPECT_NEAR(norm(line.direction), 1.0, 1e-12);
}

TEST(OrcaLineAgent, OverlappingPairIsPushedApartAlongCenterLine) {
    const Disc a{{0, 0}, {0, 0}, 0.15};
    const Disc b{{0.2, 0}, {0, 0}, 0.15};
    const auto line = orca_line_agent(a, b, 0.5, 0.05);
    EXPECT_NEAR(line.direction.x, 0.0, 1e-12);
    EXPECT_NEAR(std::fabs(line.direction.y), 1.0, 1e-12);
    EXPECT_LE(violation(line, {-1.0, 0.0}), 0.0);
    EXPECT_GT(violation(line, {0.0, 0.0}), 0.0);
    EXPECT_GT(violation(line, {1.0, 0.0}), 0.0);
    // escaping within one step needs relative separation speed (0.3 - 0.2)/dt
    EXPECT_NEAR(-line.point.x, 0.5 * (0.3 - 0.2) / 0.05, 1e-12);
}

TEST(OrcaLineAgent, ReciprocalHalvesPreventCollisionWithinHorizon) {
    // Both agents pick any velocity in their half-plane: the pair stays clear for tau.
    Rng rng(5);
    for (int trial = 0; trial < 500; ++trial) {
        const Disc a{{0, 0}, random_in_disc(rng, 1.5), 0.15};
        const double ang = rng.uniform(0, 2 * M_PI);
        const Disc b{Vec2{std::cos(ang), std::sin(ang)} * rng.uniform(0.35, 2.0),
                     random_in_disc(rng, 1.5), 0.15};
        const auto la = orca_line_agent(a, b, 0.5, 0.05);
        const auto lb = orca_line_agent(b, a, 0.5, 0.05);
        const std::vector<OrcaLine> ca{la};
        const std::vector<OrcaLine> cb{lb};
        const Vec2 va = solve_velocity(ca, random_in_disc(rng, 2.0), 2.0);
        const Vec2 vb = solve_velocity(cb, random_in_disc(rng, 2.0), 2.0);
        const double ttc = time_to_collision(b.position - a.position, vb - va, 0.3 - 1e-6, 0.5);
        EXPECT_TRUE(std::isinf(ttc)) << "trial " << trial << " ttc " << ttc;
    }
}

TEST(OrcaLineAgent, CoincidentCentersAreAnError) {
    const Disc a{{1, 1}, {}, 0.15};
    EXPECT_THROW(orca_line_agent(a, a, 0.5, 0.05), std::domain_error);
}

TEST(OrcaLinesWall, FarWallGivesNoConstraint) {
    const Disc a{{5, 1.0}, {0, -1}, 0.15};
    EXPECT_TRUE(orca_lines_wall(a, {{0, 0}, {10, 0}}, 0.05, 2.6).empty());
}

TEST(OrcaLinesWall, AdjacentAgentMaySlideButNotApproach) {
    const Disc a{{5, 0.16}, {1, 0}, 0.15};
    const auto lines = orca_lines_wall(a, {{0, 0}, {10, 0}}, 0.05, 2.6);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_LE(violation(lines[0], {1.0, 0.0}), 0.0);
    EXPECT_LE(violation(lines[0], {-2.0, 0.0}), 0.0);
    EXPECT_LE(violation(lines[0], {0.0, -0.19}), 0.0);
    EXPECT_GT(violation(lines[0], {0.0, -0.5}), 0.0);
    // sampled check: every permitted velocity keeps the body off the wall for tau
    Rng rng(1);
    for (int k = 0; k < 2000; ++k) {
        const Vec2 v = random_in_disc(rng, 2.6);
        if (violation(lines[0], v) <= 0.0) {
            EXPECT_GE(0.16 + v.y * 0.05, 0.15 - 1e-12);
        }
    }
}

TEST(OrcaLinesWall, TouchingAgentCannotPressIntoWall) {
    const Disc a{{5, 0.15}, {0, -1}, 0.15};
    const auto lines = orca_lines_wall(a, {{0, 0}, {10, 0}}, 0.05, 2.6);
    ASSERT_EQ(lines.size(), 1u);
    EXPECT_GT(violation(lines[0], {0.0, -1.0}), 0.0);
    const Vec2 v = solve_velocity(lines, 1, {0.0, -1.0}, 2.6);
    EXPECT_NEAR(v.y, 0.0, 1e-12);
}

namespace {

struct PairRun {
    double min_distance = std::numeric_limits<double>::infinity();
    double max_asymmetry = 0.0;
    Vec2 a;
    Vec2 b;
};

// Two agents walking toward each other's start, free space, synchronous updates.
PairRun head_on(Vec2 a0, Vec2 b0, int steps) {
    const double dt = 0.05;
    Disc a{a0, {1, 0}, 0.15};
    Disc b{b0, {-1, 0}, 0.15};
    const Vec2 mid = (a0 + b0) * 0.5;
    PairRun out;
    for (int s = 0; s < steps; ++s) {
        const std::vector<OrcaLine> la{orca_line_agent(a, b, 0.5, dt)};
        const std::vector<OrcaLine> lb{orca_line_agent(b, a, 0.5, dt)};
        const Vec2 va = solve_velocity(la, {1.0, 0.0}, 2.6);
        const Vec2 vb = solve_velocity(lb, {-1.0, 0.0}, 2.6);
        a.velocity = va;
        b.velocity = vb;
        a.position += va * dt;
        b.position += vb * dt;
        out.min_distance = std::min(out.min_distance, norm(a.position - b.position));
        const Vec2 reflected = mid * 2.0 - b.position;
        out.max_asymmetry = std::max(out.max_asymmetry, norm(a.position - reflected));
    }
    out.a = a.position;
    out.b = b.position;
    return out;
}

}  // namespace

TEST(OrcaPair, HeadOnPairNeverInterpenetratesAndStaysMirrored) {
    const auto r = head_on({0, 0}, {2, 0}, 200);
    EXPECT_GE(r.min_distance, 0.3 - 1e-6);
    EXPECT_LE(r.max_asymmetry, 1e-9);
}

TEST(OrcaPair, SlightlyOffsetPairPassesWithoutContact) {
    const auto r = head_on({0, 0}, {2, 0.05}, 200);
    EXPECT_GE(r.min_distance, 0.3 - 1e-6);
    EXPECT_LE(r.max_asymmetry, 1e-9);
    EXPECT_GT(r.a.x, r.b.x + 0.3);
}

TEST(OrcaEngine, SingleAgentWalksStraightAtPreferredSpeed) {
    SceneConfig s;
    s.n_agents = 1;
    Engine engine(s, {});
    std::vector<AgentState> agents(1);
    agents[0].position = {15.0, 10.0};
    for (int k = 0; k < 20; ++k) {
        engine.step(agents, s.time_step);
        EXPECT_NEAR(agents[0].velocity.x, 0.0, 1e-12);
        EXPECT_NEAR(agents[0].velocity.y, -1.3, 1e-12);
    }
}

TEST(OrcaEngine, MirrorSymmetricStartStaysMirrored) {
    SceneConfig s;
    s.n_agents = 4;
    Engine engine(s, {});
    std::vector<AgentState> agents(4);
    agents[0].position = {13.0, 3.0};
    agents[1].position = {17.0, 3.0};
    agents[2].position = {14.2, 1.0};
    agents[3].position = {15.8, 1.0};
    for (std::size_t i = 0; i < 4; ++i) {
        agents[i].id = i;
    }
    for (int k = 0; k < 60; ++k) {
        engine.step(agents, s.time_step);
        for (std::size_t p = 0; p < 4; p += 2) {
            ASSERT_NEAR(agents[p].position.x + agents[p + 1].position.x, 30.0, 1e-9);
            ASSERT_NEAR(agents[p].position.y, agents[p + 1].position.y, 1e-9);
        }
    }
}

TEST(OrcaEngine, CrowdKeepsSpeedLimitAndEvacuates) {
    SceneConfig s;
    s.n_agents = 150;
    const auto log = run_orca(s, 21);
    EXPECT_EQ(log.evacuated_count(), 150u);
    EXPECT_TRUE(log == run_orca(s, 21));
    for (std::size_t f = 0; f + 1 < log.frame_count(); ++f) {
        for (std::size_t a = 0; a < log.n_agents; ++a) {
            if (log.present(f + 1, a)) {
                // float32 storage adds a little slack to the displacement
                ASSERT_LE(norm(log.position(f + 1, a) - log.position(f, a)),
                          s.max_speed * s.time_step + 1e-5);
            }
        }
    }
}
