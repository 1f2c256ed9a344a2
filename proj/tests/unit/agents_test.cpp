#include "twinhub/agents/head_profile.hpp"
#include "twinhub/agents/trigger.hpp"
#include "twinhub/agents/vehicle_agent.hpp"
#include "twinhub/core/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace twinhub;
using namespace twinhub::agents;

namespace
{
    VehicleSpec spec_of(VehicleKind kind)
    {
        VehicleSpec s;
        s.vehicle_id = kind == VehicleKind::Virtual ? "v" : "p";
        s.kind = kind;
        return s;
    }

    ControlInstruction command(FrameId frame, double speed, std::uint64_t seq, double angle = 0.0)
    {
        ControlInstruction c;
        c.desired_speed = speed;
        c.desired_front_wheel_angle = angle;
        c.source_frame = frame;
        c.seq = seq;
        return c;
    }

    double stddev(const std::vector<double>& xs)
    {
        const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs)
        {
            ss += (x - mean) * (x - mean);
        }
        return std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }

    FrameTable frames;
} // namespace

TEST(Rng, ReproducibleAndStreamsIndependent)
{
    DeterministicRng a(42, 1), b(42, 1), c(42, 2), d(43, 1);
    int same_c = 0, same_d = 0;
    for (int i = 0; i < 1000; ++i)
    {
        const double x = a.normal(1.0);
        ASSERT_EQ(x, b.normal(1.0));
        same_c += x == c.normal(1.0);
        same_d += x == d.normal(1.0);
    }
    EXPECT_EQ(same_c, 0);
    EXPECT_EQ(same_d, 0);
    DeterministicRng e(1, 1);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i)
    {
        xs.push_back(e.normal(2.0));
    }
    EXPECT_NEAR(stddev(xs), 2.0, 0.05);
}

TEST(VehicleAgent, VirtualLagSettlesWithinFiveTau)
{
    const Track track = Track::stadium();
    VehicleAgent agent(spec_of(VehicleKind::Virtual), frames.transform(FrameId::Virtual), track, {});
    agent.place(0.0, 2.8, 0.0);
    agent.receive(command(FrameId::Virtual, 3.0, 1));
    const double tau = 0.15;
    for (int i = 0; i < static_cast<int>(std::round(5 * tau / 0.01)); ++i)
    {
        agent.step(0.01);
    }
    EXPECT_NEAR(agent.publish().speed, 3.0, 0.2 * std::exp(-5.0) + 1e-9);
}

TEST(VehicleAgent, StaysOnTrackUnderZeroSteering)
{
    const Track track = Track::stadium();
    VehicleAgent agent(spec_of(VehicleKind::Virtual), frames.transform(FrameId::Virtual), track, {});
    agent.place(10.0, 2.8, 0.0);
    for (int i = 0; i < 50; ++i)
    {
        agent.step(0.02);
    }
    EXPECT_NEAR(agent.truth().arc_position, 12.8, 1e-9);
    EXPECT_NEAR(agent.odometer(), 2.8, 1e-9);
}

TEST(VehicleAgent, PhysicalNoiseScalesToUnified)
{
    const Track track = Track::stadium();
    auto imp = ImperfectionModel::emulated_physical_defaults(7);
    VehicleAgent agent(spec_of(VehicleKind::EmulatedPhysical), frames.transform(FrameId::Physical), track, imp);
    agent.place(20.0, 0.0, 0.0);
    agent.receive(command(FrameId::Physical, 0.0, 1));
    std::vector<double> xs;
    const double x0 = agent.truth_unified().pose.x;
    for (int i = 0; i < 20000; ++i)
    {
        agent.step(0.02);
        const VehicleState obs = agent.publish();
        EXPECT_EQ(obs.frame, FrameId::Physical);
        xs.push_back(to_unified(obs, frames.transform(FrameId::Physical)).pose.x - x0);
    }
    EXPECT_NEAR(stddev(xs), 0.028, 0.028 * 0.03);
}

TEST(VehicleAgent, SameSeedSameSeries)
{
    const Track track = Track::stadium();
    auto run = [&](std::uint64_t seed) {
        VehicleAgent agent(spec_of(VehicleKind::EmulatedPhysical), frames.transform(FrameId::Physical), track,
                           ImperfectionModel::emulated_physical_defaults(seed));
        agent.place(0.0, 2.8, 0.0);
        std::vector<VehicleState> out;
        for (int i = 0; i < 500; ++i)
        {
            if (i % 10 == 0)
            {
                agent.receive(command(FrameId::Physical, 0.2 + 0.01 * std::sin(i * 0.1), static_cast<std::uint64_t>(i + 1), 0.02));
            }
            agent.step(0.02);
            out.push_back(agent.publish());
        }
        return out;
    };
    EXPECT_EQ(run(3), run(3));
    EXPECT_NE(run(3), run(4));
}

TEST(VehicleAgent, PhysicalSpeedVarianceExceedsVirtual)
{
    const Track track = Track::stadium();
    auto speeds = [&](VehicleKind kind) {
        const FrameId frame = default_frame(kind);
        ImperfectionModel imp = kind == VehicleKind::Virtual ? ImperfectionModel{} : ImperfectionModel::emulated_physical_defaults(9);
        VehicleAgent agent(spec_of(kind), frames.transform(frame), track, imp);
        agent.place(0.0, 2.8, 0.0);
        std::vector<double> v;
        for (int i = 0; i < 3000; ++i)
        {
            const double desired = 2.8 + 0.3 * std::sin(i * 0.01);
            agent.receive(from_unified(command(FrameId::Unified, desired, static_cast<std::uint64_t>(i + 1)), frames.transform(frame)));
            agent.step(0.02);
            v.push_back(to_unified(agent.publish(), frames.transform(frame)).speed);
        }
        return stddev(v);
    };
    EXPECT_GT(speeds(VehicleKind::EmulatedPhysical), speeds(VehicleKind::Virtual));
}

TEST(VehicleAgent, JitterDelaysCommandsWithinBound)
{
    const Track track = Track::stadium();
    ImperfectionModel imp;
    imp.command_jitter = 0.005;
    imp.rng_seed = 1;
    VehicleSpec spec = spec_of(VehicleKind::EmulatedPhysical);
    VehicleAgent agent(spec, frames.transform(FrameId::Physical), track, imp); // lag 0: ideal actuator
    agent.place(0.0, 0.0, 0.0);
    agent.receive(command(FrameId::Physical, 0.1, 1));
    agent.step(0.02);
    // accelerating at max_accel/14 for 0.02 s minus the delay, delay in [0, 10 ms]
    const double a = 2.0 / 14.0;
    const double delay = 0.02 - agent.truth().speed / a;
    EXPECT_GE(delay, -1e-12);
    EXPECT_LE(delay, 0.010 + 1e-12);
}

TEST(VehicleAgent, StaleCommandsIgnoredAndInterlockBrakes)
{
    const Track track = Track::stadium();
    VehicleAgent agent(spec_of(VehicleKind::Virtual), frames.transform(FrameId::Virtual), track, {});
    agent.place(0.0, 2.8, 0.0);
    agent.receive(command(FrameId::Virtual, 2.8, 5));
    agent.receive(command(FrameId::Virtual, 0.0, 4));
    agent.step(0.02);
    EXPECT_NEAR(agent.truth().speed, 2.8, 1e-12);

    agent.set_interlock(true);
    agent.step(0.1);
    EXPECT_NEAR(agent.truth().speed, 2.8 - 0.3, 1e-12); // max_decel 3 m/s^2, no lag
    EXPECT_THROW(agent.receive(command(FrameId::Physical, 1.0, 9)), Error);
}

TEST(HeadProfile, ScenarioValues)
{
    HeadProfile a;
    a.perturbation = PerturbationSpec{HalfSine{}, "C", 1};
    EXPECT_EQ(head_speed(a, std::nullopt, 100.0), 2.8);
    EXPECT_EQ(head_speed(a, 50.0, 49.9), 2.8);
    EXPECT_NEAR(head_speed(a, 50.0, 51.75), 3.6389, 1e-12);
    EXPECT_NEAR(ms_to_kmh(head_speed(a, 50.0, 51.75)), 13.10, 0.005);
    EXPECT_EQ(head_speed(a, 50.0, 53.5), 2.8);
    EXPECT_DOUBLE_EQ(perturbation_duration(a), 3.5);

    std::get<HalfSine>(a.perturbation->shape).duration_is_full_period = true;
    EXPECT_NEAR(head_speed(a, 50.0, 50.875), 3.6389, 1e-12);
    EXPECT_EQ(head_speed(a, 50.0, 51.75), 2.8);

    HeadProfile b;
    b.perturbation = PerturbationSpec{Brake{}, "D", 1};
    const auto ph = brake_phases(std::get<Brake>(b.perturbation->shape), 2.8);
    EXPECT_NEAR(ph.decel, 9.0, 0.01);
    EXPECT_NEAR(ph.decel + ph.hold + ph.recover, 41.0, 0.01);
    EXPECT_NEAR(head_speed(b, 0.0, ph.decel + 10.0), 0.28056, 1e-12);
    EXPECT_NEAR(head_speed(b, 0.0, ph.decel + 26.0), 0.28056 + (2.8 - 0.28056) * 0.5, 1e-12);
    EXPECT_EQ(head_speed(b, 0.0, 42.0), 2.8);
    for (double t = 0.0; t < 60.0; t += 0.01)
    {
        ASSERT_GE(head_speed(b, 0.0, t), 0.0);
    }

    b.perturbation->shape = Brake{3.0, 0.28, 20, 12};
    EXPECT_THROW(validate(b), Error);
}

TEST(TriggerLatch, FiresOnceOnDesignatedLap)
{
    const Track track = Track::stadium();
    const double c = track.named_point("C");
    TriggerLatch latch(track, "C", 1);
    int fired = 0;
    double arc = 0.0;
    latch.update(arc);
    latch.arm();
    for (int i = 0; i < 3 * 245 * 10; ++i)
    {
        arc = track.wrap(arc + 0.1);
        if (latch.update(arc))
        {
            ++fired;
            EXPECT_NEAR(arc, c, 0.1 + 1e-9);
        }
    }
    EXPECT_EQ(fired, 1);
    EXPECT_THROW(TriggerLatch(track, "Q", 1), Error);
}

TEST(TriggerLatch, CoarseStepsAndLaterLaps)
{
    const Track track = Track::stadium();
    const double c = track.named_point("C");
    TriggerLatch latch(track, "C", 2);
    latch.arm();
    latch.update(c - 0.1);
    EXPECT_FALSE(latch.update(c + 0.18)); // first crossing, jumps past the point
    // noise wobbling back over the point does not count again
    EXPECT_FALSE(latch.update(c - 0.05));
    EXPECT_FALSE(latch.update(c + 0.3));
    double arc = c + 0.3;
    bool fired = false;
    for (int i = 0; i < 1000 && !fired; ++i)
    {
        arc = track.wrap(arc + 2.8 * 0.1);
        fired = latch.update(arc);
    }
    EXPECT_TRUE(fired);
    EXPECT_NEAR(arc, c, 0.28);
}

TEST(TriggerLatch, UnarmedIgnoresCrossings)
{
    const Track track = Track::stadium();
    const double c = track.named_point("C");
    TriggerLatch latch(track, "C", 1);
    latch.update(c - 1.0);
    EXPECT_FALSE(latch.update(c + 1.0));
    latch.arm();
    EXPECT_FALSE(latch.update(c + 2.0));
    EXPECT_FALSE(latch.fired());
}
