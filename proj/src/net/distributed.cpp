#include "twinhub/net/distributed.hpp"

#include "twinhub/core/error.hpp"
#include "twinhub/net/clients.hpp"
#include "twinhub/scenario/assembly.hpp"
#include "twinhub/scenario/run_monitor.hpp"

#include <boost/asio/executor_work_guard.hpp>

#include <spdlog/spdlog.h>

#include <chrono>
#include <thread>

namespace twinhub::net
{
    namespace asio = boost::asio;
    using controllers::Binding;
    using controllers::BindingKind;

    namespace
    {
        // Runs an io_context on its own thread for the lifetime of the object.
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
    } // namespace

    DistributedResult run_distributed(const scenario::ScenarioSpec& spec, const DistributedOptions& options)
    {
        if (const auto problems = scenario::validate_scenario(spec); !problems.empty())
        {
            throw Error(ErrorCode::SchemaViolation, "invalid scenario: " + problems.front());
        }

        std::unique_ptr<HubServer> server;
        Endpoint hub_ep;
        if (options.hub)
        {
            hub_ep = *options.hub;
        }
        else
        {
            HubServerConfig cfg;
            cfg.hub = scenario::hub_config_for(spec);
            server = std::make_unique<HubServer>(cfg);
            server->start();
            hub_ep = server->stream_endpoint();
        }

        DistributedResult result;
        {
            IoThread net;
            std::mutex monitor_mutex;
            scenario::RunMonitor monitor(spec, "distributed");

            std::vector<std::unique_ptr<AgentClient>> agents;
            for (std::size_t i = 0; i < spec.platoon.size(); ++i)
            {
                const auto& e = spec.platoon[i];
                AgentOptions o;
                o.spec = e.spec;
                o.frame = e.frame;
                o.frames = spec.frames;
                o.track = spec.track;
                o.imperfections = spec.imperfections_for(i);
                o.initial_arc = scenario::initial_arc(spec, i);
                o.initial_speed = spec.base_speed;
                o.step_hz = spec.tick_hz;
                agents.push_back(std::make_unique<AgentClient>(net.io(), hub_ep, std::move(o)));
                agents.back()->start(options.connect_timeout);
            }

            const auto all = scenario::bindings_for(spec);
            const auto steering = [](const Binding& b) { return b.kind == BindingKind::Lateral || b.kind == BindingKind::Head; };
            ControllerClient lead(net.io(), hub_ep, spec.name + "/ctl-lateral", scenario::host_config_for(spec, steering));
            ControllerClient rest(net.io(), hub_ep, spec.name + "/ctl-longitudinal",
                                  scenario::host_config_for(spec, [&](const Binding& b) { return !steering(b); }));
            ObserverClient observer(net.io(), hub_ep, spec.name + "/monitor", [&](const protocol::StatePoolPayload& pool) {
                std::lock_guard lock(monitor_mutex);
                monitor.on_pool(pool);
            });
            AdminClient admin(net.io(), hub_ep, spec.name + "/admin");
            lead.start(options.connect_timeout);
            rest.start(options.connect_timeout);
            observer.start(options.connect_timeout);
            admin.start(options.connect_timeout);

            for (const auto& b : all)
            {
                protocol::AdminCommandPayload cmd;
                cmd.source_id = b.source_id;
                cmd.vehicle_id = b.vehicle_id;
                cmd.channel = b.kind == BindingKind::Lateral ? protocol::Channel::Lateral : protocol::Channel::Longitudinal;
                const auto ack = admin.command(cmd, options.connect_timeout);
                if (!ack.ok)
                {
                    throw Error(ErrorCode::SchemaViolation, "remap " + b.source_id + " -> " + b.vehicle_id + " refused: " + ack.message);
                }
            }

            const double distance = spec.laps * spec.track.lap_length();
            const auto started = std::chrono::steady_clock::now();
            bool truncated = false;
            for (;;)
            {
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
                for (const auto* c : {&lead, &rest})
                {
                    if (auto f = c->failure())
                    {
                        std::rethrow_exception(f);
                    }
                }
                for (const auto& a : agents)
                {
                    if (a->lost() || !a->connected())
                    {
                        throw Error(ErrorCode::AgentLost, "agent '" + a->id() + "' lost its hub connection");
                    }
                }
                if (server && server->stats().vehicles_lost > 0)
                {
                    throw Error(ErrorCode::AgentLost, "the hub dropped a vehicle agent");
                }
                if (lead.lost() || rest.lost() || observer.lost())
                {
                    throw Error(ErrorCode::IoFailure, "hub connection lost");
                }
                const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
                if (options.duration > 0.0)
                {
                    if (elapsed >= options.duration)
                    {
                        break;
                    }
                    continue;
                }
                {
                    std::lock_guard lock(monitor_mutex);
                    if (monitor.head_odometer() >= distance)
                    {
                        break;
                    }
                }
                if (elapsed >= spec.max_sim_time)
                {
                    truncated = true;
                    spdlog::warn("distributed run truncated at max_sim_time {:.1f} s", spec.max_sim_time);
                    break;
                }
            }

            hub::HubCounters counters;
            if (server)
            {
                result.hub = server->stats();
                counters = result.hub->counters;
            }
            admin.stop();
            observer.stop();
            lead.stop();
            rest.stop();
            for (auto& a : agents)
            {
                a->stop();
            }
            std::lock_guard lock(monitor_mutex);
            result.report = monitor.finish(lead.settled_at(), lead.trigger_time(), counters, 0, truncated);
        }
        if (server)
        {
            server->stop();
        }
        return result;
    }
} // namespace twinhub::net
