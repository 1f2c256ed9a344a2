// Multi-role entry point: run, validate, replay, hub, agent, controller.

#include "twinhub/cli/launch_config.hpp"
#include "twinhub/core/error.hpp"
#include "twinhub/hub/pool_log.hpp"
#include "twinhub/net/clients.hpp"
#include "twinhub/net/distributed.hpp"
#include "twinhub/net/hub_server.hpp"
#include "twinhub/net/replay.hpp"
#include "twinhub/scenario/assembly.hpp"
#include "twinhub/scenario/lockstep.hpp"
#include "twinhub/scenario/report.hpp"

#include <CLI11.hpp>

#include <boost/asio/executor_work_guard.hpp>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <thread>

using namespace twinhub;
namespace asio = boost::asio;

namespace
{
    std::atomic<bool> g_interrupted{false};

    extern "C" void on_signal(int) { g_interrupted = true; }

    int exit_code_for(const Error& e)
    {
        switch (e.code())
        {
        case ErrorCode::SettlingTimeout: return cli::kExitSettlingTimeout;
        case ErrorCode::AgentLost: return cli::kExitAgentLost;
        case ErrorCode::IoFailure: return cli::kExitIo;
        default: return cli::kExitConfig;
        }
    }

    class IoThread
    {
    public:
        IoThread() : guard_(asio::make_work_guard(io_)), thread_([this] { io_.run(); }) {}
        ~IoThread()
        {
            guard_.reset();
            io_.stop();
            thread_.join();
        }
        asio::io_context& io() { return io_; }

    private:
        asio::io_context io_;
        asio::executor_work_guard<asio::io_context::executor_type> guard_;
        std::thread thread_;
    };

    // Sleeps in small steps until `done` holds, a signal arrives, or
    // `duration` (0 = no limit) elapses.
    template <typename Done>
    void wait_until(double duration, Done done)
    {
        const auto start = std::chrono::steady_clock::now();
        while (!g_interrupted && !done())
        {
            if (duration > 0.0 && std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >= duration)
            {
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    }

    scenario::ScenarioSpec load_spec(const std::filesystem::path& path, std::optional<std::uint64_t> seed)
    {
        auto spec = scenario::load_scenario(path);
        if (seed)
        {
            spec.seed = *seed;
        }
        return spec;
    }

    void print_summary(const scenario::RunReport& r, const std::filesystem::path& out)
    {
        fmt::print("{} ({}): {} ticks, {:.1f} s simulated{}\n", r.scenario, r.mode, r.tick_count(), r.time.empty() ? 0.0 : r.time.back(),
                   r.truncated ? ", truncated" : "");
        for (const auto& c : r.collisions)
        {
            fmt::print("  collision {} -> {}: min gap {:.3f} m at t={:.2f} s{}\n", c.follower, c.leader, c.min_gap, c.min_gap_time,
                       c.virtual_involved ? " (virtual involved)" : "");
        }
        fmt::print("report written to {}\n", out.string());
    }

    struct RunArgs
    {
        std::string spec;
        std::string mode = "lockstep";
        std::string hub;
        std::optional<std::uint64_t> seed;
        std::string out = "out";
        double duration = 0.0;
    };

    int cmd_run(const RunArgs& a)
    {
        if (a.mode != "lockstep" && a.mode != "distributed")
        {
            throw Error(ErrorCode::ConfigParse, "--mode must be lockstep or distributed, got '" + a.mode + "'");
        }
        const auto spec = load_spec(a.spec, a.seed);
        const std::filesystem::path out = a.out;
        scenario::RunReport report;
        if (a.mode == "lockstep")
        {
            auto result = scenario::run_lockstep(spec);
            report = std::move(result.report);
            scenario::write_report(report, out);
            hub::write_pool_log(out / "pool_log.csv", result.pool_log);
        }
        else
        {
            net::DistributedOptions opts;
            if (!a.hub.empty())
            {
                opts.hub = net::parse_endpoint(a.hub);
            }
            opts.duration = a.duration;
            auto result = net::run_distributed(spec, opts);
            report = std::move(result.report);
            scenario::write_report(report, out);
            if (result.hub)
            {
                fmt::print("hub: {} ticks, p99 interval {:.1f} ms, max staleness {:.1f} ms, {} vehicles lost\n", result.hub->ticks,
                           result.hub->p99_interval * 1e3, result.hub->max_staleness * 1e3, result.hub->vehicles_lost);
            }
        }
        print_summary(report, out);
        return cli::kExitOk;
    }

    int cmd_validate(const std::string& path)
    {
        scenario::ScenarioSpec spec;
        try
        {
            spec = scenario::load_scenario(path);
        }
        catch (const Error& e)
        {
            fmt::print(stderr, "{}\n", e.what());
            return cli::kExitConfig;
        }
        const auto problems = scenario::validate_scenario(spec);
        for (const auto& p : problems)
        {
            fmt::print("{}: {}\n", path, p);
        }
        if (problems.empty())
        {
            fmt::print("{}: ok ({} vehicles)\n", path, spec.platoon.size());
        }
        return problems.empty() ? cli::kExitOk : cli::kExitConfig;
    }

    struct ReplayArgs
    {
        std::string log;
        double factor = 1.0;
        std::string listen = "127.0.0.1:7400";
        std::string socket = "127.0.0.1:7401";
        std::size_t observers = 0;
        double wait = 30.0;
        std::string scenario;
    };

    int cmd_replay(const ReplayArgs& a)
    {
        const Track track = a.scenario.empty() ? Track::stadium() : scenario::load_scenario(a.scenario).track;
        const auto pools = net::pools_from_log(hub::read_pool_log(a.log), track);
        net::HubServerConfig cfg;
        cfg.stream = net::parse_endpoint(a.listen);
        cfg.socket = net::parse_endpoint(a.socket);
        cfg.tick_enabled = false;
        net::HubServer server(cfg);
        server.start();
        if (a.observers > 0)
        {
            wait_until(a.wait, [&] { return server.subscribers() >= a.observers; });
            if (server.subscribers() < a.observers)
            {
                throw Error(ErrorCode::IoFailure, fmt::format("only {} of {} observers connected", server.subscribers(), a.observers));
            }
        }
        const auto sent = net::replay_pools(pools, a.factor, [&](const auto& pool) { server.publish_pool(pool); });
        // Let the last frames leave before the sockets close.
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
        server.stop();
        fmt::print("replayed {} of {} pools\n", sent, pools.size());
        return cli::kExitOk;
    }

    net::HubServerConfig hub_config(const cli::LaunchConfig& c)
    {
        net::HubServerConfig cfg;
        if (c.scenario)
        {
            cfg.hub = scenario::hub_config_for(scenario::load_scenario(*c.scenario));
        }
        cfg.stream = c.hub.value_or(net::Endpoint{"127.0.0.1", 7400});
        cfg.socket = c.socket.value_or(net::Endpoint{"127.0.0.1", 7401});
        if (c.pool_log)
        {
            cfg.hub.record = true;
            cfg.pool_log = c.pool_log;
        }
        return cfg;
    }

    int cmd_hub(const cli::LaunchConfig& c)
    {
        net::HubServer server(hub_config(c));
        server.start();
        wait_until(c.duration, [] { return false; });
        const auto s = server.stats();
        server.stop();
        fmt::print("hub: {} ticks, p99 interval {:.1f} ms, max staleness {:.1f} ms, {} vehicles lost, {} slow consumers dropped\n", s.ticks,
                   s.p99_interval * 1e3, s.max_staleness * 1e3, s.vehicles_lost, s.slow_consumers_dropped);
        return cli::kExitOk;
    }

    int cmd_agent(const cli::LaunchConfig& c)
    {
        const auto spec = load_spec(*c.scenario, c.seed);
        std::optional<std::size_t> index;
        for (std::size_t i = 0; i < spec.platoon.size(); ++i)
        {
            if (spec.platoon[i].spec.vehicle_id == c.vehicle)
            {
                index = i;
            }
        }
        if (!index)
        {
            throw Error(ErrorCode::ConfigParse, "field 'vehicle': '" + c.vehicle + "' is not in " + c.scenario->string());
        }
        const auto& e = spec.platoon[*index];
        net::AgentOptions o;
        o.spec = e.spec;
        o.frame = e.frame;
        o.frames = spec.frames;
        o.track = spec.track;
        o.imperfections = spec.imperfections_for(*index);
        o.initial_arc = scenario::initial_arc(spec, *index);
        o.initial_speed = spec.base_speed;
        o.step_hz = spec.tick_hz;

        IoThread net;
        net::AgentClient agent(net.io(), *c.hub, o);
        agent.start();
        wait_until(c.duration, [&] { return agent.lost(); });
        if (agent.lost())
        {
            throw Error(ErrorCode::IoFailure, "hub connection lost");
        }
        agent.stop();
        fmt::print("agent {}: {} states published, {} commands applied\n", agent.id(), agent.published(), agent.commands());
        return cli::kExitOk;
    }

    int cmd_controller(const cli::LaunchConfig& c)
    {
        using controllers::BindingKind;
        const auto spec = load_spec(*c.scenario, c.seed);
        const auto steering = [](const controllers::Binding& b) { return b.kind == BindingKind::Lateral || b.kind == BindingKind::Head; };
        const auto keep = [&](const controllers::Binding& b) {
            switch (c.bindings)
            {
            case cli::BindingSet::Lateral: return steering(b);
            case cli::BindingSet::Longitudinal: return !steering(b);
            case cli::BindingSet::All: return true;
            }
            return true;
        };
        const auto host = scenario::host_config_for(spec, keep);
        const std::string id = c.entity_id.empty() ? spec.name + "/ctl-" + std::string(c.bindings == cli::BindingSet::All ? "all"
                                                                               : c.bindings == cli::BindingSet::Lateral ? "lateral"
                                                                                                                        : "longitudinal")
                                                   : c.entity_id;
        IoThread net;
        net::ControllerClient ctl(net.io(), *c.hub, id, host);
        ctl.start();
        if (c.remap)
        {
            net::AdminClient admin(net.io(), *c.hub, id + "/admin");
            admin.start();
            for (const auto& b : host.bindings)
            {
                protocol::AdminCommandPayload cmd;
                cmd.source_id = b.source_id;
                cmd.vehicle_id = b.vehicle_id;
                cmd.channel = b.kind == BindingKind::Lateral ? protocol::Channel::Lateral : protocol::Channel::Longitudinal;
                // Agents may still be connecting.
                for (int attempt = 0;; ++attempt)
                {
                    const auto ack = admin.command(cmd);
                    if (ack.ok)
                    {
                        break;
                    }
                    if (ack.error_code != "UnknownVehicle" || attempt >= 100 || g_interrupted)
                    {
                        throw Error(ErrorCode::ConfigParse, "remap " + b.source_id + " -> " + b.vehicle_id + " refused: " + ack.message);
                    }
                    std::this_thread::sleep_for(std::chrono::milliseconds(100));
                }
            }
            admin.stop();
        }
        wait_until(c.duration, [&] { return ctl.lost() || ctl.failure() != nullptr; });
        if (auto f = ctl.failure())
        {
            std::rethrow_exception(f);
        }
        if (ctl.lost())
        {
            throw Error(ErrorCode::IoFailure, "hub connection lost");
        }
        ctl.stop();
        fmt::print("controller {}: {} pools handled\n", id, ctl.pools_seen());
        return cli::kExitOk;
    }

    // --hub/--seed/--duration on the command line override the file.
    cli::LaunchConfig launch(const std::string& file, cli::Role role, const std::string& hub, std::optional<std::uint64_t> seed, double duration)
    {
        cli::LaunchConfig c;
        if (!file.empty())
        {
            c = cli::load_launch_config(file);
            if (c.role != role)
            {
                throw Error(ErrorCode::ConfigParse, fmt::format("field 'role': {} is a {} config, not {}", file, cli::to_string(c.role), cli::to_string(role)));
            }
        }
        else
        {
            c.role = role;
            if (role != cli::Role::Hub)
            {
                throw Error(ErrorCode::ConfigParse, "--config is required for the " + std::string(cli::to_string(role)) + " role");
            }
        }
        if (!hub.empty())
        {
            c.hub = net::parse_endpoint(hub);
        }
        if (seed)
        {
            c.seed = seed;
        }
        if (duration > 0.0)
        {
            c.duration = duration;
        }
        return c;
    }
} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mixed physical/virtual platoon testbed"};
    app.require_subcommand(1);
    std::string log_level = "info";
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error")->envname("TWINHUB_LOG_LEVEL");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a scenario and write its report");
    run_cmd->add_option("spec", run.spec, "Scenario JSON")->required();
    run_cmd->add_option("--mode", run.mode, "lockstep or distributed")->envname("TWINHUB_MODE");
    run_cmd->add_option("--hub", run.hub, "Hub endpoint host:port (distributed; in-process hub when empty)")->envname("TWINHUB_HUB");
    run_cmd->add_option("--seed", run.seed, "Override the scenario seed")->envname("TWINHUB_SEED");
    run_cmd->add_option("--out", run.out, "Report directory")->envname("TWINHUB_OUT");
    run_cmd->add_option("--duration", run.duration, "Distributed: stop after this many wall seconds (0 = run the laps)");

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a scenario file statically");
    validate_cmd->add_option("spec", validate_path, "Scenario JSON")->required();

    ReplayArgs replay;
    auto* replay_cmd = app.add_subcommand("replay", "Rebroadcast a pool log to observers");
    replay_cmd->add_option("log", replay.log, "pool_log.csv")->required();
    replay_cmd->add_option("--factor", replay.factor, "Speed factor; 0 sends only the final frame");
    replay_cmd->add_option("--listen", replay.listen, "Stream endpoint");
    replay_cmd->add_option("--socket", replay.socket, "WebSocket endpoint");
    replay_cmd->add_option("--observers", replay.observers, "Wait for this many observers before starting");
    replay_cmd->add_option("--wait", replay.wait, "Seconds to wait for observers");
    replay_cmd->add_option("--scenario", replay.scenario, "Take the track from this scenario");

    std::string config;
    std::string hub_override;
    std::optional<std::uint64_t> seed_override;
    double duration = 0.0;
    const auto role_cmd = [&](const char* name, const char* help) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--config", config, "Launch config JSON")->check(CLI::ExistingFile);
        cmd->add_option("--hub", hub_override, "Hub endpoint host:port")->envname("TWINHUB_HUB");
        cmd->add_option("--seed", seed_override, "Override the scenario seed")->envname("TWINHUB_SEED");
        cmd->add_option("--duration", duration, "Exit after this many seconds (0 = until interrupted)");
        return cmd;
    };
    auto* hub_cmd = role_cmd("hub", "Serve the hub: stream listener for agents/controllers, WebSocket for UIs");
    auto* agent_cmd = role_cmd("agent", "Run one vehicle agent from a scenario");
    auto* controller_cmd = role_cmd("controller", "Host controller bindings from a scenario");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? cli::kExitOk : cli::kExitConfig;
    }

    spdlog::set_level(spdlog::level::from_str(log_level));
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);

    try
    {
        if (*run_cmd) return cmd_run(run);
        if (*validate_cmd) return cmd_validate(validate_path);
        if (*replay_cmd) return cmd_replay(replay);
        if (*hub_cmd) return cmd_hub(launch(config, cli::Role::Hub, hub_override, seed_override, duration));
        if (*agent_cmd) return cmd_agent(launch(config, cli::Role::Agent, hub_override, seed_override, duration));
        if (*controller_cmd) return cmd_controller(launch(config, cli::Role::Controller, hub_override, seed_override, duration));
    }
    catch (const Error& e)
    {
        spdlog::error("{}", e.what());
        return exit_code_for(e);
    }
    catch (const std::exception& e)
    {
        spdlog::error("{}", e.what());
        return cli::kExitConfig;
    }
    return cli::kExitOk;
}
