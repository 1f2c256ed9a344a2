// Runs every primary acceptance criterion and prints one PASS/FAIL line each.
// Exit status is the number of failures.

#include "../support/random_envelopes.hpp"
#include "../support/scenario_builders.hpp"

#include "twinhub/controllers/cacc.hpp"
#include "twinhub/core/error.hpp"
#include "twinhub/net/distributed.hpp"
#include "twinhub/protocol/codec.hpp"
#include "twinhub/protocol/json_codec.hpp"
#include "twinhub/scenario/lockstep.hpp"
#include "twinhub/scenario/report.hpp"

#include <CLI11.hpp>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>

using namespace twinhub;
using namespace twinhub::scenario;

namespace
{
    struct Outcome
    {
        bool pass = false;
        std::string detail;
    };

    // Accumulates checks; the first failing one is reported.
    class Checks
    {
    public:
        void expect(bool ok, const std::string& what)
        {
            if (!ok && failed_.empty())
            {
                failed_ = what;
            }
        }
        Outcome done(const std::string& summary) const { return failed_.empty() ? Outcome{true, summary} : Outcome{false, failed_ + " (" + summary + ")"}; }

    private:
        std::string failed_;
    };

    double seconds_since(std::chrono::steady_clock::time_point t)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
    }

    VehicleState at_arc(const std::string& id, double arc, double v)
    {
        VehicleState s;
        s.vehicle_id = id;
        s.arc_position = arc;
        s.speed = v;
        return s;
    }

    Outcome cacc_unit_vectors()
    {
        using namespace controllers;
        const CaccParams gains{0.45, 0.25, 0.25, 20.0, -2.0, 2.0};
        const Track track = Track::stadium();
        const auto head = at_arc("1", 100.0, 2.8);
        Checks c;
        const auto level = at_arc("2", 80.0, 2.8);
        c.expect(cacc_accel(at_arc("3", 60.0, 2.8), &level, &head, gains, track) == 0.0, "equilibrium is not 0");
        const auto pred = at_arc("2", 52.0, 2.8);
        const double a = cacc_accel(at_arc("3", 30.0, 2.5), &pred, &head, gains, track);
        c.expect(std::abs(a - (0.45 * 2.0 + 0.25 * 0.3 + 0.25 * 0.3)) <= 1e-12, fmt::format("gap 22 m case gave {:.15g}", a));
        const auto close = at_arc("2", 40.0, 2.8);
        const double clamped = cacc_accel(at_arc("3", 30.0, 2.8), &close, &head, gains, track);
        c.expect(clamped == std::max(-2.0, 0.45 * -10.0), fmt::format("clamp case gave {}", clamped));
        c.expect(accel_to_speed_cmd(0.0, 2.5, 0.02) == 2.5, "a = 0 does not hold v_prev");
        const double v = accel_to_speed_cmd(1.05, 2.5, 0.02);
        c.expect(std::abs(v - (2.5 + 1.05 * 0.02)) <= 1e-12, fmt::format("v_cmd {:.15g}", v));
        c.expect(accel_to_speed_cmd(-2.0, 0.1, 0.1) == 0.0, "floor at 0 missing");
        return c.done(fmt::format("a = {:.12f} m/s^2, v_cmd = {:.12f} m/s", a, v));
    }

    Outcome scenario_a_fidelity()
    {
        const auto start = std::chrono::steady_clock::now();
        const auto r = run_lockstep(testkit::head_only(testkit::scenario_a())).report;
        const double peak = peak_speed(r, r.vehicles.front());
        const double expected = (10.08 + 3.02) / 3.6; // km/h -> m/s
        const double took = seconds_since(start);
        Checks c;
        c.expect(std::abs(peak - expected) <= 0.02, fmt::format("peak {:.4f} vs {:.4f}", peak, expected));
        c.expect(took < 10.0, fmt::format("took {:.1f} s", took));
        return c.done(fmt::format("head peak {:.4f} m/s, expected {:.4f} +- 0.02, {:.2f} s", peak, expected, took));
    }

    Outcome scenario_b_timing()
    {
        const auto start = std::chrono::steady_clock::now();
        const auto spec = testkit::head_only(testkit::scenario_b());
        const auto r = run_lockstep(spec).report;
        const auto& v = r.vehicles.front();
        const double base = spec.base_speed;
        const double target = 0.28056;
        const double eps = 1e-3;
        Checks c;
        c.expect(r.trigger_time.has_value(), "brake never triggered");
        if (!r.trigger_time)
        {
            return c.done("no trigger");
        }
        // Phase boundaries from the head's logged speed.
        std::optional<double> reached, left, recovered;
        for (std::size_t k = 0; k < r.time.size(); ++k)
        {
            const double t = r.time[k];
            if (t < *r.trigger_time)
            {
                continue;
            }
            if (!reached && v.speed[k] <= target + eps) reached = t;
            else if (reached && !left && v.speed[k] > target + eps) left = r.time[k - 1];
            else if (left && !recovered && v.speed[k] >= base - eps) recovered = t;
        }
        c.expect(reached && left && recovered, "a phase boundary was never observed");
        if (!(reached && left && recovered))
        {
            return c.done("incomplete profile");
        }
        const double brake = *reached - *r.trigger_time;
        const double hold = *left - *reached;
        const double recover = *recovered - *left;
        const double took = seconds_since(start);
        c.expect(std::abs(brake - 9.0) <= 0.1, fmt::format("braking took {:.3f} s", brake));
        c.expect(std::abs(hold - 20.0) <= 0.1, fmt::format("hold lasted {:.3f} s", hold));
        c.expect(std::abs(recover - 12.0) <= 0.1, fmt::format("recovery took {:.3f} s", recover));
        c.expect(took < 30.0, fmt::format("took {:.1f} s", took));
        return c.done(fmt::format("brake {:.2f} s, hold {:.2f} s, recover {:.2f} s", brake, hold, recover));
    }

    // Peak deviation of each follower over the head's.
    std::vector<double> chain_ratios(const RunReport& r)
    {
        std::vector<double> out;
        const double head = peak_deviation(r, r.vehicles.front());
        for (std::size_t i = 1; i < r.vehicles.size(); ++i)
        {
            out.push_back(peak_deviation(r, r.vehicles[i]) / head);
        }
        return out;
    }

    Outcome wave_attenuation()
    {
        const auto cacc = run_lockstep(testkit::chain_spec(SourceKind::Cacc, 5)).report;
        const auto human = run_lockstep(testkit::chain_spec(SourceKind::Human, 5)).report;
        Checks c;
        const auto rc = chain_ratios(cacc);
        const auto rh = chain_ratios(human);
        for (std::size_t i = 0; i < rc.size(); ++i)
        {
            c.expect(rc[i] <= 1.001, fmt::format("CACC follower {} ratio {:.4f}", i + 1, rc[i]));
        }
        for (std::size_t i = 0; i < rh.size(); ++i)
        {
            c.expect(rh[i] >= 1.0, fmt::format("scripted follower {} ratio {:.4f}", i + 1, rh[i]));
            c.expect(i == 0 || rh[i] >= rh[i - 1], fmt::format("scripted ratio decreases at follower {}", i + 1));
        }
        return c.done(fmt::format("CACC ratios [{:.3f}], scripted ratios [{:.3f}]", fmt::join(rc, ", "), fmt::join(rh, ", ")));
    }

    Outcome collision_capability(const std::string& dir)
    {
        const auto spec = load_scenario(dir + "/mixed8_b_aggressive.json");
        const auto result = run_lockstep(spec);
        const auto& r = result.report;
        Checks c;
        c.expect(r.collision_threshold == 4.6, "threshold is not 4.6 m");
        bool virtual_seen = false;
        for (const auto& e : r.collisions)
        {
            virtual_seen = virtual_seen || e.virtual_involved;
            // Oracle: the minimum of the logged gap column over the event window.
            double logged = std::numeric_limits<double>::infinity();
            for (const auto& row : result.pool_log)
            {
                const bool inside = row.time >= e.start_time && (!e.end_time || row.time < *e.end_time);
                if (row.vehicle_id == e.follower && inside && row.gap_to_predecessor)
                {
                    logged = std::min(logged, *row.gap_to_predecessor);
                }
            }
            c.expect(logged == e.min_gap, fmt::format("{} event min {:.17g} vs logged {:.17g}", e.follower, e.min_gap, logged));
        }
        c.expect(!r.collisions.empty(), "no collision events");
        c.expect(virtual_seen, "no event involves a virtual vehicle");
        const auto first = r.collisions.empty() ? std::string("none")
                                                : fmt::format("{} -> {} min {:.3f} m", r.collisions.front().follower,
                                                              r.collisions.front().leader, r.collisions.front().min_gap);
        return c.done(fmt::format("{} events, first {}", r.collisions.size(), first));
    }

    Outcome determinism(const std::string& dir)
    {
        const auto spec = load_scenario(dir + "/mixed8_a.json");
        Checks c;
        c.expect(spec.platoon.size() == 8 && spec.laps == 4, "reference spec is not 8 vehicles x 4 laps");
        const auto t0 = std::chrono::steady_clock::now();
        const std::string a = report_json(run_lockstep(spec).report);
        const double first = seconds_since(t0);
        const std::string b = report_json(run_lockstep(spec).report);
        c.expect(a == b, "report JSON differs between runs");
        c.expect(first < 60.0, fmt::format("one run took {:.1f} s", first));
        return c.done(fmt::format("{} bytes identical, {:.2f} s per run", a.size(), first));
    }

    // First index after which every pool has every vehicle; size() when never.
    std::size_t r_index_full(const RunReport& r)
    {
        std::size_t from = r.time.size();
        for (std::size_t k = r.time.size(); k-- > 0;)
        {
            bool all = true;
            for (const auto& v : r.vehicles)
            {
                all = all && !std::isnan(v.speed[k]);
            }
            if (!all)
            {
                break;
            }
            from = k;
        }
        return from;
    }

    Outcome distributed(const std::string& dir, double duration)
    {
        const auto spec = load_scenario(dir + "/mixed8_a.json");
        net::DistributedOptions opts;
        opts.duration = duration;
        const auto result = net::run_distributed(spec, opts);
        const auto& s = *result.hub;
        const double period = spec.dt();
        Checks c;
        c.expect(s.vehicles == spec.platoon.size(), fmt::format("{} vehicles registered at the end", s.vehicles));
        c.expect(s.vehicles_lost == 0, fmt::format("{} vehicles lost", s.vehicles_lost));
        c.expect(s.p99_interval <= 0.030, fmt::format("p99 interval {:.1f} ms", s.p99_interval * 1e3));
        c.expect(s.max_staleness <= 2.0 * period, fmt::format("staleness {:.1f} ms", s.max_staleness * 1e3));
        const double rate = static_cast<double>(s.ticks) / duration;
        c.expect(rate >= 0.98 * spec.tick_hz, fmt::format("broadcast rate {:.2f} Hz", rate));
        // Every pool after the last registration carries the whole platoon.
        std::size_t full_from = r_index_full(result.report);
        c.expect(full_from < result.report.time.size(), "no pool ever carried all vehicles");
        return c.done(fmt::format("{} ticks in {:.0f} s ({:.2f} Hz), p99 {:.1f} ms, max {:.1f} ms, staleness {:.1f} ms, lost {}", s.ticks,
                                  duration, rate, s.p99_interval * 1e3, s.max_interval * 1e3, s.max_staleness * 1e3, s.vehicles_lost));
    }

    Outcome delay_compensation()
    {
        auto spec = testkit::head_only(std::nullopt);
        spec.max_sim_time = 60.0;
        spec.network.state_delay = 0.1;
        spec.network.delay_compensation = true;
        const auto on = run_lockstep(spec).report.vehicles.front().mean_position_error;
        spec.network.delay_compensation = false;
        const auto off = run_lockstep(spec).report.vehicles.front().mean_position_error;
        Checks c;
        c.expect(on && off, "no position error recorded");
        if (!(on && off))
        {
            return c.done("missing statistics");
        }
        c.expect(*off - *on >= 0.2, fmt::format("improvement {:.3f} m", *off - *on));
        return c.done(fmt::format("mean error {:.3f} m compensated vs {:.3f} m raw", *on, *off));
    }

    Outcome hot_swap()
    {
        auto spec = testkit::chain_spec(SourceKind::Cacc, 3, {}, std::nullopt);
        spec.laps = 1;
        const std::uint64_t swap_tick = 500;
        const std::string moved = "cacc/f1";
        Checks c;
        std::optional<std::uint64_t> first_after;
        std::uint64_t violations = 0;
        LockstepHooks hooks;
        hooks.after_tick = [&](hub::HubCore& hub, std::uint64_t tick, const std::vector<hub::Dispatch>& ds) {
            // One source, one channel, one vehicle per tick.
            std::map<std::pair<std::string, int>, std::set<std::string>> targets;
            for (const auto& d : ds)
            {
                if (d.lateral) targets[{d.instruction.source_id, 0}].insert(d.instruction.target_vehicle_id);
                if (d.longitudinal) targets[{d.instruction.source_id, 1}].insert(d.instruction.target_vehicle_id);
                if (tick > swap_tick && d.instruction.source_id == moved && d.longitudinal && !first_after)
                {
                    first_after = tick;
                    c.expect(d.instruction.target_vehicle_id == "f2", "next instruction went to " + d.instruction.target_vehicle_id);
                }
            }
            for (const auto& [key, vs] : targets)
            {
                violations += vs.size() > 1 ? 1 : 0;
            }
            if (tick == swap_tick)
            {
                // Swap the longitudinal sources of f1 and f2.
                const auto a = hub.handle_admin({"remap", moved, "f2", protocol::Channel::Longitudinal, true});
                const auto b = hub.handle_admin({"remap", "cacc/f2", "f1", protocol::Channel::Longitudinal, false});
                c.expect(a.ok && b.ok, "remap refused: " + a.message + b.message);
            }
        };
        run_lockstep(spec, hooks);
        c.expect(first_after == swap_tick + 1, "the tick after the swap carried no instruction from the moved source");
        c.expect(violations == 0, fmt::format("{} ticks sent one source to two vehicles", violations));
        return c.done(fmt::format("remap at tick {}, first rerouted dispatch at tick {}", swap_tick, first_after.value_or(0)));
    }

    bool contains(const protocol::Json& actual, const protocol::Json& expected)
    {
        if (expected.is_object())
        {
            if (!actual.is_object()) return false;
            for (const auto& [key, value] : expected.items())
            {
                if (!actual.contains(key) || !contains(actual.at(key), value)) return false;
            }
            return true;
        }
        if (expected.is_array())
        {
            if (!actual.is_array() || actual.size() != expected.size()) return false;
            for (std::size_t i = 0; i < expected.size(); ++i)
            {
                if (!contains(actual[i], expected[i])) return false;
            }
            return true;
        }
        return actual == expected;
    }

    Outcome protocol_conformance(const std::string& fixtures)
    {
        using namespace protocol;
        Checks c;
        std::ifstream in(fixtures + "/protocol_conformance.json");
        const Json corpus = Json::parse(in);
        std::size_t cases = 0;
        for (const auto& k : corpus.at("cases"))
        {
            ++cases;
            const std::string name = k.at("name");
            std::vector<std::uint8_t> bytes;
            const std::string hex = k.at("hex");
            for (std::size_t i = 0; i + 1 < hex.size(); i += 2)
            {
                bytes.push_back(static_cast<std::uint8_t>(std::stoi(hex.substr(i, 2), nullptr, 16)));
            }
            if (k.contains("error"))
            {
                std::string got = "none";
                try
                {
                    decode(bytes);
                }
                catch (const Error& e)
                {
                    got = std::string(to_string(e.code()));
                }
                c.expect(got == k.at("error").get<std::string>(), name + ": error " + got);
                continue;
            }
            if (k.value("incomplete", false))
            {
                c.expect(!decode(bytes).envelope, name + ": incomplete frame decoded");
                continue;
            }
            FrameDecoder dec;
            dec.feed(bytes);
            std::vector<MessageEnvelope> got;
            while (auto e = dec.next())
            {
                got.push_back(std::move(*e));
            }
            const Json expected = k.contains("expect_sequence") ? k.at("expect_sequence") : Json::array({k.at("expect")});
            c.expect(got.size() == expected.size(), name + ": wrong message count");
            for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i)
            {
                c.expect(contains(to_json(got[i]), expected[i]), name + ": fields differ");
            }
        }

        testkit::EnvelopeFuzzer fuzz(424242);
        for (int i = 0; i < 10000; ++i)
        {
            const auto e = fuzz.next();
            const auto r = decode(encode(e));
            c.expect(r.envelope && *r.envelope == e, fmt::format("random envelope {} did not round-trip", i));
        }

        std::mt19937_64 rng(5);
        std::vector<MessageEnvelope> sent;
        std::vector<std::uint8_t> stream;
        for (int i = 0; i < 500; ++i)
        {
            sent.push_back(fuzz.next());
            const auto f = encode(sent.back());
            stream.insert(stream.end(), f.begin(), f.end());
        }
        FrameDecoder dec;
        std::vector<MessageEnvelope> got;
        for (std::size_t pos = 0; pos < stream.size();)
        {
            const std::size_t n = std::min<std::size_t>(stream.size() - pos, std::uniform_int_distribution<std::size_t>(1, 700)(rng));
            dec.feed(std::span(stream).subspan(pos, n));
            pos += n;
            while (auto e = dec.next())
            {
                got.push_back(std::move(*e));
            }
        }
        c.expect(got == sent, "chunked stream decoded to a different sequence");
        return c.done(fmt::format("{} corpus cases, 10000 round trips, {} chunked frames", cases, sent.size()));
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::string only;
    double duration = 60.0;
    app.add_option("--only", only, "Run the criteria whose name contains this text");
    app.add_option("--distributed-seconds", duration, "Length of the soft-real-time run");
    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::err);

    const std::string scenarios = TWINHUB_SCENARIO_DIR;
    const std::string fixtures = TWINHUB_FIXTURE_DIR;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"cacc-unit-vectors", cacc_unit_vectors},
        {"scenario-a-profile-fidelity", scenario_a_fidelity},
        {"scenario-b-phase-timing", scenario_b_timing},
        {"wave-attenuation", wave_attenuation},
        {"collision-capability", [&] { return collision_capability(scenarios); }},
        {"determinism", [&] { return determinism(scenarios); }},
        {"distributed-soft-real-time", [&] { return distributed(scenarios, duration); }},
        {"delay-compensation", delay_compensation},
        {"hot-swap", hot_swap},
        {"protocol-conformance", [&] { return protocol_conformance(fixtures); }},
    };

    int failures = 0;
    for (const auto& [name, run] : criteria)
    {
        if (!only.empty() && name.find(only) == std::string::npos)
        {
            continue;
        }
        Outcome o;
        try
        {
            o = run();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("threw ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        fmt::print("{} {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
        std::fflush(stdout);
    }
    return failures;
}
