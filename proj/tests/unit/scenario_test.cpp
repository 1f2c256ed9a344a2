#include "twinhub/core/error.hpp"
#include "twinhub/scenario/assembly.hpp"
#include "twinhub/scenario/lockstep.hpp"
#include "twinhub/scenario/report.hpp"

#include "../support/scenario_builders.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <set>

using namespace twinhub;
using namespace twinhub::scenario;
using testkit::chain_spec;
using testkit::head_only;

namespace
{
    const std::filesystem::path kScenarios = TWINHUB_SCENARIO_DIR;

    ErrorCode code_of(const std::function<void()>& fn)
    {
        try
        {
            fn();
        }
        catch (const Error& e)
        {
            return e.code();
        }
        ADD_FAILURE() << "expected an Error";
        return ErrorCode::BadLog;
    }

    std::string message_of(const std::function<void()>& fn)
    {
        try
        {
            fn();
        }
        catch (const Error& e)
        {
            return e.what();
        }
        return {};
    }

    bool any_contains(const std::vector<std::string>& msgs, const std::string& needle)
    {
        for (const auto& m : msgs)
        {
            if (m.find(needle) != std::string::npos)
            {
                return true;
            }
        }
        return false;
    }

    const char* kMinimal = R"({
  "name": "mini",
  "platoon": [
    {"id": "h", "kind": "Virtual", "role": "Head"},
    {"id": "a", "kind": "Virtual", "role": "CAV"}
  ]
})";
} // namespace

TEST(ScenarioSpec, ShippedFilesLoadAndValidate)
{
    for (const char* name : {"mixed8_a.json", "mixed8_b.json", "mixed8_b_aggressive.json", "mixed8_b_briefed.json"})
    {
        const ScenarioSpec s = load_scenario(kScenarios / name);
        EXPECT_TRUE(validate_scenario(s).empty()) << name;
        ASSERT_EQ(s.platoon.size(), 8u);
        EXPECT_EQ(s.platoon[0].spec.role, VehicleRole::Head);
        EXPECT_EQ(s.platoon[0].spec.kind, VehicleKind::EmulatedPhysical);
        EXPECT_EQ(s.platoon[2].source, SourceKind::Cacc);
        EXPECT_EQ(s.platoon[7].frame, FrameId::InnoLike);
        EXPECT_EQ(s.initial_gaps.size(), 7u);
        EXPECT_EQ(s.laps, 4);
    }
    const ScenarioSpec b = load_scenario(kScenarios / "mixed8_b_aggressive.json");
    EXPECT_EQ(b.platoon[1].driver, *controllers::driver_preset("aggressive"));
    ASSERT_TRUE(b.perturbation);
    EXPECT_EQ(b.perturbation->trigger_point, "D");
}

TEST(ScenarioSpec, DefaultsFillUnsetFields)
{
    const ScenarioSpec s = scenario_from_json_text(kMinimal);
    EXPECT_EQ(s.platoon[0].source, SourceKind::HeadProfile);
    EXPECT_EQ(s.platoon[1].source, SourceKind::Cacc);
    EXPECT_EQ(s.platoon[1].frame, FrameId::Virtual);
    EXPECT_DOUBLE_EQ(s.initial_gap(1), s.cacc.d_des);
    EXPECT_DOUBLE_EQ(s.collision_threshold, 4.6);
    EXPECT_FALSE(s.perturbation);
    EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(ScenarioSpec, UnknownKeyIsNamed)
{
    const std::string text = R"({"platoon": [{"id": "h", "kind": "Virtual", "role": "Head", "colour": "red"}]})";
    EXPECT_EQ(code_of([&] { scenario_from_json_text(text); }), ErrorCode::ConfigParse);
    EXPECT_NE(message_of([&] { scenario_from_json_text(text); }).find("platoon[0].colour"), std::string::npos);

    const std::string top = R"({"platoon": [], "lapz": 3})";
    EXPECT_NE(message_of([&] { scenario_from_json_text(top); }).find("'lapz'"), std::string::npos);
}

TEST(ScenarioSpec, SyntaxErrorReportsLineAndColumn)
{
    const std::string text = "{\n  \"name\": \"x\",\n  \"laps\": ,\n}";
    const std::string msg = message_of([&] { scenario_from_json_text(text); });
    EXPECT_NE(msg.find("ConfigParse"), std::string::npos);
    EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(ScenarioSpec, WrongTypesAndValuesAreRejected)
{
    EXPECT_NE(message_of([] { scenario_from_json_text(R"({"laps": "four", "platoon": []})"); }).find("laps"), std::string::npos);
    EXPECT_NE(message_of([] {
                  scenario_from_json_text(R"({"platoon": [{"id": "h", "kind": "Wooden", "role": "Head"}]})");
              }).find("platoon[0].kind"),
              std::string::npos);
    EXPECT_NE(message_of([] {
                  scenario_from_json_text(R"({"platoon": [{"id": "h", "kind": "Virtual", "role": "HDV", "driver": "sleepy"}]})");
              }).find("sleepy"),
              std::string::npos);
    EXPECT_NE(message_of([] { scenario_from_json_text(R"({"perturbation": {"kind": "Wiggle"}, "platoon": []})"); }).find("Wiggle"),
              std::string::npos);
    EXPECT_EQ(code_of([] { scenario_from_json_text(R"({"name": "no platoon"})"); }), ErrorCode::ConfigParse);
    EXPECT_EQ(code_of([] { load_scenario("/nonexistent/dir/x.json"); }), ErrorCode::IoFailure);
}

TEST(ScenarioSpec, ExplicitDriverAndImperfections)
{
    const std::string text = R"({"platoon": [
        {"id": "h", "kind": "EmulatedPhysical", "role": "Head", "imperfections": "none"},
        {"id": "d", "kind": "Virtual", "role": "HDV", "driver": {"k_h": 3.0, "tau_h": 0.5}},
        {"id": "p", "kind": "EmulatedPhysical", "role": "HDV", "imperfections": {"position_noise_sigma": 0.01}}],
        "initial_gaps": [21, 22], "perturbation": {"kind": "Brake", "hold": 5}})";
    const ScenarioSpec s = scenario_from_json_text(text);
    EXPECT_EQ(s.imperfections_for(0), agents::ImperfectionModel{});
    EXPECT_DOUBLE_EQ(s.platoon[1].driver.k_h, 3.0);
    EXPECT_DOUBLE_EQ(s.platoon[1].driver.v_free, controllers::ScriptedDriverParams{}.v_free);
    EXPECT_EQ(s.platoon[1].driver_preset, "custom");
    EXPECT_DOUBLE_EQ(s.imperfections_for(2).position_noise_sigma, 0.01);
    EXPECT_DOUBLE_EQ(s.imperfections_for(2).actuation_lag_tau, 0.35);
    EXPECT_DOUBLE_EQ(s.initial_gap(2), 22.0);
    EXPECT_EQ(s.perturbation->trigger_point, "D");
    EXPECT_DOUBLE_EQ(std::get<agents::Brake>(s.perturbation->shape).hold, 5.0);
    EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(ScenarioValidation, ExactlyOneHead)
{
    ScenarioSpec s = scenario_from_json_text(kMinimal);
    s.platoon[1].spec.role = VehicleRole::Head;
    s.platoon[1].source = SourceKind::HeadProfile;
    EXPECT_TRUE(any_contains(validate_scenario(s), "exactly one Head"));

    s = scenario_from_json_text(kMinimal);
    s.platoon[0].spec.role = VehicleRole::CAV;
    s.platoon[0].source = SourceKind::Cacc;
    EXPECT_TRUE(any_contains(validate_scenario(s), "exactly one Head"));
}

TEST(ScenarioValidation, HeadMustComeFirst)
{
    ScenarioSpec s = scenario_from_json_text(kMinimal);
    std::swap(s.platoon[0], s.platoon[1]);
    EXPECT_TRUE(any_contains(validate_scenario(s), "position 1"));
}

TEST(ScenarioValidation, GapBelowThresholdIsNamed)
{
    ScenarioSpec s = load_scenario(kScenarios / "mixed8_a.json");
    s.initial_gaps[3] = 4.0;
    const auto v = validate_scenario(s);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("'v5'"), std::string::npos);
    EXPECT_NE(v[0].find("collision_threshold"), std::string::npos);
}

TEST(ScenarioValidation, CollectsEveryViolation)
{
    ScenarioSpec s = scenario_from_json_text(kMinimal);
    s.laps = 0;
    s.platoon[1].spec.vehicle_id = "h";
    s.perturbation = agents::PerturbationSpec{agents::Brake{3.0}, "D", 1}; // target above base
    s.cacc.k_p = -1.0;
    const auto v = validate_scenario(s);
    EXPECT_TRUE(any_contains(v, "laps"));
    EXPECT_TRUE(any_contains(v, "duplicate"));
    EXPECT_TRUE(any_contains(v, "perturbation"));
    EXPECT_TRUE(any_contains(v, "cacc"));
}

TEST(Collisions, SingleDipReportsItsMinimum)
{
    const std::vector<double> t{0, 1, 2, 3, 4, 5};
    const std::vector<std::optional<double>> g{6.0, 5.0, 4.1, 3.67, 4.4, 6.0};
    const auto ev = detect_collisions(t, g, 4.6, "b", "a", true);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_DOUBLE_EQ(ev[0].min_gap, 3.67);
    EXPECT_DOUBLE_EQ(ev[0].min_gap_time, 3.0);
    EXPECT_DOUBLE_EQ(ev[0].start_time, 2.0);
    EXPECT_EQ(ev[0].end_time, 5.0);
    EXPECT_TRUE(ev[0].virtual_involved);
    EXPECT_EQ(ev[0].follower, "b");
}

TEST(Collisions, NoneWhenAboveThreshold)
{
    const std::vector<double> t{0, 1, 2};
    EXPECT_TRUE(detect_collisions(t, {5.0, 4.6, 9.0}, 4.6, "b", "a", false).empty());
}

TEST(Collisions, OneEventPerExcursion)
{
    const std::vector<double> t{0, 1, 2, 3, 4, 5, 6};
    const auto ev = detect_collisions(t, {5.0, 4.0, 5.0, 4.5, 4.2, 5.0, 4.0}, 4.6, "b", "a", false);
    ASSERT_EQ(ev.size(), 3u);
    EXPECT_DOUBLE_EQ(ev[1].min_gap, 4.2);
    EXPECT_FALSE(ev[2].end_time); // still open at the end
}

TEST(Collisions, MissingSamplesAreSkipped)
{
    const std::vector<double> t{0, 1, 2, 3};
    const auto ev = detect_collisions(t, {4.0, std::nullopt, std::nan(""), 3.0}, 4.6, "b", "a", false);
    ASSERT_EQ(ev.size(), 1u);
    EXPECT_DOUBLE_EQ(ev[0].min_gap, 3.0);
}

namespace
{
    RunReport synthetic(std::vector<std::vector<double>> speeds, std::optional<double> trigger)
    {
        RunReport r;
        r.base_speed = 2.8;
        r.trigger_time = trigger;
        for (std::size_t k = 0; k < speeds.front().size(); ++k)
        {
            r.ticks.push_back(k + 1);
            r.time.push_back(static_cast<double>(k));
        }
        for (std::size_t i = 0; i < speeds.size(); ++i)
        {
            VehicleSeries v;
            v.vehicle_id = "v" + std::to_string(i);
            v.speed = speeds[i];
            r.vehicles.push_back(v);
        }
        return r;
    }
} // namespace

TEST(Amplification, SelfAndPassThroughAreOne)
{
    const std::vector<double> head{2.8, 2.8, 3.3, 2.8};
    const RunReport r = synthetic({head, head}, 1.0);
    EXPECT_DOUBLE_EQ(amplification(r, "v0"), 1.0);
    EXPECT_DOUBLE_EQ(amplification(r, "v1"), 1.0);
}

TEST(Amplification, RatioOfPeakDeviations)
{
    // Deviation before the trigger is ignored; undershoot counts by magnitude.
    const RunReport r = synthetic({{2.8, 2.8, 3.3, 2.8}, {9.0, 2.8, 2.9, 2.1}}, 1.0);
    EXPECT_NEAR(amplification(r, "v1"), 0.7 / 0.5, 1e-12);
    EXPECT_DOUBLE_EQ(peak_speed(r, r.vehicles[1]), 2.9);
}

TEST(Amplification, RequiresAPerturbation)
{
    EXPECT_EQ(code_of([] { amplification(synthetic({{2.8, 3.0}}, std::nullopt), "v0"); }), ErrorCode::NoPerturbation);
    EXPECT_EQ(code_of([] { amplification(synthetic({{2.8, 2.8}}, 0.0), "v0"); }), ErrorCode::NoPerturbation);
    EXPECT_EQ(code_of([] { amplification(synthetic({{2.8, 3.0}}, 0.0), "zz"); }), ErrorCode::UnknownVehicle);
}

TEST(Assembly, InitialLayoutAndBindings)
{
    const ScenarioSpec s = load_scenario(kScenarios / "mixed8_a.json");
    const double a = s.track.named_point("A");
    EXPECT_NEAR(initial_arc(s, 0), a, 1e-12);
    EXPECT_NEAR(initial_arc(s, 3), s.track.wrap(a - 60.0), 1e-9);
    const auto b = bindings_for(s);
    ASSERT_EQ(b.size(), 16u);
    std::set<std::string> sources;
    for (const auto& x : b)
    {
        EXPECT_TRUE(sources.insert(x.source_id).second);
    }
    EXPECT_EQ(b[5].source_id, "cacc/v3");
    EXPECT_EQ(b[5].predecessor_id, "v2");
    EXPECT_EQ(b[5].head_id, "v1");
    EXPECT_EQ(b[3].kind, controllers::BindingKind::Scripted);
    const auto cfg = host_config_for(s, [](const controllers::Binding& x) { return x.kind == controllers::BindingKind::Head; });
    ASSERT_EQ(cfg.bindings.size(), 1u);
    ASSERT_TRUE(cfg.head);
    EXPECT_DOUBLE_EQ(cfg.head->actuator_tau, 0.35);
}

TEST(Lockstep, HeadOnlyPlatoon)
{
    const RunReport r = run_lockstep(head_only(testkit::scenario_a())).report;
    ASSERT_EQ(r.vehicles.size(), 1u);
    EXPECT_TRUE(r.collisions.empty());
    EXPECT_FALSE(min_gap(r.vehicles[0]));
    ASSERT_TRUE(r.trigger_time);
    EXPECT_NEAR(peak_speed(r, r.vehicles[0]), 2.8 + 0.8389, 0.02);
    EXPECT_FALSE(r.truncated);
    EXPECT_EQ(r.tick_count(), r.time.size());
}

TEST(Lockstep, MixedPlatoonShape)
{
    const RunReport r = run_lockstep(load_scenario(kScenarios / "mixed8_a.json")).report;
    ASSERT_EQ(r.vehicles.size(), 8u);
    int gap_series = 0;
    for (const auto& v : r.vehicles)
    {
        EXPECT_EQ(v.speed.size(), r.time.size());
        if (min_gap(v))
        {
            ++gap_series;
        }
    }
    EXPECT_EQ(gap_series, 7);
    ASSERT_TRUE(r.settled_at);
    ASSERT_TRUE(r.trigger_time);
    EXPECT_GT(*r.trigger_time, *r.settled_at);
    EXPECT_NEAR(r.time.back(), 4 * 245.0 / 2.8, 5.0);
    EXPECT_EQ(r.hub.broadcasts, r.tick_count());
    EXPECT_EQ(r.hub.unmapped_dropped, 0u);
}

TEST(Lockstep, DeterministicReport)
{
    const ScenarioSpec s = load_scenario(kScenarios / "mixed8_b.json");
    EXPECT_EQ(report_json(run_lockstep(s).report), report_json(run_lockstep(s).report));
}

TEST(Lockstep, SeedChangesEmulatedNoise)
{
    ScenarioSpec s = load_scenario(kScenarios / "mixed8_a.json");
    const auto a = run_lockstep(s).report;
    s.seed += 1;
    const auto b = run_lockstep(s).report;
    EXPECT_NE(a.vehicle("v2").speed, b.vehicle("v2").speed);
}

TEST(Lockstep, CollisionMinimaMatchTheLoggedSeries)
{
    const RunReport r = run_lockstep(load_scenario(kScenarios / "mixed8_b_aggressive.json")).report;
    ASSERT_FALSE(r.collisions.empty());
    bool virtual_seen = false;
    for (const auto& c : r.collisions)
    {
        virtual_seen = virtual_seen || c.virtual_involved;
        const VehicleSeries& v = r.vehicle(c.follower);
        double lowest = INFINITY;
        for (std::size_t k = 0; k < r.time.size(); ++k)
        {
            const bool inside = r.time[k] >= c.start_time && (!c.end_time || r.time[k] < *c.end_time);
            if (inside && v.gap[k])
            {
                lowest = std::min(lowest, *v.gap[k]);
            }
        }
        EXPECT_EQ(c.min_gap, lowest);
    }
    EXPECT_TRUE(virtual_seen);
}

TEST(Lockstep, InterlockKeepsPhysicalPairsApart)
{
    ScenarioSpec s = load_scenario(kScenarios / "mixed8_b_aggressive.json");
    const auto with = run_lockstep(s).report;
    for (const auto& c : with.collisions)
    {
        EXPECT_TRUE(c.virtual_involved) << c.follower << " -> " << c.leader;
    }
    s.interlock = false;
    const auto without = run_lockstep(s).report;
    EXPECT_EQ(without.interlock_engagements, 0u);
    // Damage-free or not, events are recorded once nothing holds the physical cars back.
    bool physical_pair = false;
    for (const auto& c : without.collisions)
    {
        physical_pair = physical_pair || !c.virtual_involved;
    }
    EXPECT_TRUE(physical_pair);
    EXPECT_GT(with.interlock_engagements, 0u);
}

TEST(Lockstep, BriefedDriversStayClear)
{
    const RunReport r = run_lockstep(load_scenario(kScenarios / "mixed8_b_briefed.json")).report;
    EXPECT_TRUE(r.collisions.empty());
}

TEST(Lockstep, SettlingTimeoutSurfaces)
{
    ScenarioSpec s = chain_spec(SourceKind::Cacc, 2);
    s.initial_gaps = {40.0, 40.0};
    s.settle.timeout = 5.0;
    EXPECT_EQ(code_of([&] { run_lockstep(s); }), ErrorCode::SettlingTimeout);
}

TEST(Lockstep, InvalidSpecIsRejected)
{
    ScenarioSpec s = chain_spec(SourceKind::Cacc, 1);
    s.platoon.clear();
    EXPECT_EQ(code_of([&] { run_lockstep(s); }), ErrorCode::SchemaViolation);
}

TEST(Lockstep, TruncatesAtMaxSimTime)
{
    ScenarioSpec s = head_only(std::nullopt);
    s.max_sim_time = 3.0;
    const RunReport r = run_lockstep(s).report;
    EXPECT_TRUE(r.truncated);
    EXPECT_EQ(r.tick_count(), 150u);
}

TEST(Lockstep, PoolLogMatchesReport)
{
    ScenarioSpec s = chain_spec(SourceKind::Cacc, 2);
    s.laps = 1;
    const auto res = run_lockstep(s);
    ASSERT_EQ(res.pool_log.size(), 3 * res.report.time.size());
    EXPECT_EQ(res.pool_log[3].speed, res.report.vehicles[0].speed[1]);
    EXPECT_EQ(res.pool_log[5].gap_to_predecessor, res.report.vehicles[2].gap[1]);
}

TEST(Report, WritesSummaryAndCsvs)
{
    ScenarioSpec s = chain_spec(SourceKind::Cacc, 1);
    s.laps = 1;
    const RunReport r = run_lockstep(s).report;
    const auto dir = std::filesystem::temp_directory_path() / "twinhub_report_test";
    std::filesystem::remove_all(dir);
    write_report(r, dir);
    std::ifstream summary(dir / "report.json");
    std::stringstream ss;
    ss << summary.rdbuf();
    EXPECT_EQ(ss.str(), report_json(r));
    std::ifstream csv(dir / "vehicle_f1.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "tick,time,arc_position,speed,gap_to_predecessor");
    std::size_t rows = 0;
    for (std::string line; std::getline(csv, line);)
    {
        ++rows;
    }
    EXPECT_EQ(rows, r.time.size());
    std::filesystem::remove_all(dir);
}

namespace
{
    std::vector<double> ratios(const RunReport& r)
    {
        std::vector<double> out;
        for (const auto& v : r.vehicles)
        {
            out.push_back(amplification(r, v.vehicle_id));
        }
        return out;
    }
} // namespace

TEST(StringStability, CaccChainAttenuates)
{
    const RunReport r = run_lockstep(chain_spec(SourceKind::Cacc, 5)).report;
    const auto a = ratios(r);
    for (std::size_t i = 1; i < a.size(); ++i)
    {
        EXPECT_LE(a[i], 1.001);
        EXPECT_LE(a[i], a[i - 1] + 1e-3) << "follower " << i;
        EXPECT_LE(peak_speed(r, r.vehicles[i]), peak_speed(r, r.vehicles[i - 1]) + 0.01);
    }
}

TEST(StringStability, ScriptedChainAmplifies)
{
    const RunReport r = run_lockstep(chain_spec(SourceKind::Scripted, 5)).report;
    const auto a = ratios(r);
    for (std::size_t i = 1; i < a.size(); ++i)
    {
        EXPECT_GE(a[i], 1.0);
        EXPECT_GE(a[i], a[i - 1]) << "follower " << i;
        EXPECT_GE(peak_speed(r, r.vehicles[i]), peak_speed(r, r.vehicles[i - 1]));
    }
}

TEST(StringStability, SluggishDriverAgreesWithLinearAnalysis)
{
    // Linearized delayed optimal-velocity follower:
    //   G(s) = k V' e^{-s tau} / (s^2 + k e^{-s tau} (s + V'))
    // sup |G(jw)| <= 1 means a single follower cannot amplify the input.
    controllers::ScriptedDriverParams p;
    p.k_h = 0.6;
    p.tau_h = 0.8;
    const double slope = p.v_free / (p.gap_free - p.gap_stop);
    double sup = 0.0;
    for (int i = 1; i <= 20000; ++i)
    {
        const std::complex<double> s(0.0, i * 1e-3);
        const auto d = std::exp(-s * p.tau_h);
        sup = std::max(sup, std::abs(p.k_h * slope * d / (s * s + p.k_h * d * (s + slope))));
    }
    EXPECT_LE(sup, 1.0 + 1e-9);
    const RunReport r = run_lockstep(chain_spec(SourceKind::Scripted, 1, p)).report;
    EXPECT_LT(amplification(r, "f1"), 1.0);
}
