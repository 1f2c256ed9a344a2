#include "twinhub/net/hub_server.hpp"

#include "link_impl.hpp"

#include "twinhub/core/error.hpp"
#include "twinhub/protocol/clock_sync.hpp"

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <future>
#include <map>
#include <mutex>
#include <thread>

namespace twinhub::net
{
    namespace asio = boost::asio;
    using tcp = asio::ip::tcp;
    using namespace protocol;

    struct HubServer::Impl : std::enable_shared_from_this<HubServer::Impl>
    {
        struct Session
        {
            std::shared_ptr<Link> link;
            std::optional<RegisterPayload> reg;
            ClockOffsetEstimator clock;
            bool subscriber = false;
        };

        explicit Impl(HubServerConfig c)
            : cfg(std::move(c)), stream_acceptor(io), socket_acceptor(io), tick_timer(io), heartbeat_timer(io), core(cfg.hub)
        {
        }

        HubServerConfig cfg;
        asio::io_context io;
        tcp::acceptor stream_acceptor;
        tcp::acceptor socket_acceptor;
        asio::steady_timer tick_timer;
        asio::steady_timer heartbeat_timer;
        std::thread thread;
        hub::HubCore core;
        bool running = false;
        double epoch = 0.0;
        std::chrono::steady_clock::time_point next_tick;

        std::map<Link*, Session> sessions;
        std::map<std::string, Link*> entities;
        std::map<std::string, Link*> vehicles;
        std::map<std::string, Link*> source_owner;

        mutable std::mutex stats_mutex;
        std::vector<double> intervals;
        std::optional<double> last_broadcast;
        HubStats stats;

        double now() const { return monotonic_seconds() - epoch; }

        static void bind(tcp::acceptor& acc, const Endpoint& ep)
        {
            boost::system::error_code ec;
            const tcp::endpoint where(asio::ip::make_address(ep.host, ec), ep.port);
            if (ec)
            {
                throw Error(ErrorCode::IoFailure, "bad listen address " + ep.str() + ": " + ec.message());
            }
            acc.open(where.protocol(), ec);
            if (!ec)
            {
                acc.set_option(tcp::acceptor::reuse_address(true), ec);
            }
            if (!ec)
            {
                acc.bind(where, ec);
            }
            if (!ec)
            {
                acc.listen(asio::socket_base::max_listen_connections, ec);
            }
            if (ec)
            {
                throw Error(ErrorCode::IoFailure, "cannot listen on " + ep.str() + ": " + ec.message());
            }
        }

        void accept(tcp::acceptor& acc, bool websocket)
        {
            acc.async_accept([self = shared_from_this(), &acc, websocket](const boost::system::error_code& ec, tcp::socket socket) {
                if (ec)
                {
                    return; // acceptor closed
                }
                self->adopt(websocket ? detail::adopt_socket(std::move(socket)) : detail::adopt_stream(std::move(socket)));
                self->accept(acc, websocket);
            });
        }

        void adopt(std::shared_ptr<Link> link)
        {
            link->set_backlog_limit(cfg.max_backlog_bytes);
            Link* key = link.get();
            sessions[key].link = link;
            std::weak_ptr<Impl> weak = shared_from_this();
            link->start(
                [weak, key](const MessageEnvelope& env) {
                    if (auto self = weak.lock())
                    {
                        self->on_message(key, env);
                    }
                },
                [weak, key](const std::string& why) {
                    if (auto self = weak.lock())
                    {
                        // Deferred: a close can fire from inside a broadcast loop.
                        asio::post(self->io, [self, key, why] { self->on_close(key, why); });
                    }
                });
            refresh_counts();
        }

        void send(Session& s, Payload payload) { s.link->send(std::move(payload), now()); }

        void reply_error(Session& s, ErrorCode code, const std::string& message)
        {
            {
                std::lock_guard lock(stats_mutex);
                ++stats.protocol_errors;
            }
            send(s, ErrorPayload{std::string(to_string(code)), message});
        }

        void on_message(Link* key, const MessageEnvelope& env)
        {
            const auto it = sessions.find(key);
            if (it == sessions.end())
            {
                return;
            }
            Session& s = it->second;
            if (const auto* reg = std::get_if<RegisterPayload>(&env.payload))
            {
                handle_register(key, s, *reg);
                return;
            }
            if (!s.reg)
            {
                reply_error(s, ErrorCode::SchemaViolation, "register before sending " + std::string(to_string(env.type())));
                return;
            }
            try
            {
                std::visit([&](const auto& p) { handle(s, p); }, env.payload);
            }
            catch (const Error& e)
            {
                reply_error(s, e.code(), e.what());
            }
        }

        void handle(Session&, const RegisterPayload&) {}

        void handle(Session& s, const StateUpdatePayload& p)
        {
            if (s.reg->entity_kind != EntityKind::VehicleAgent || p.state.vehicle_id != s.reg->entity_id)
            {
                throw Error(ErrorCode::UnknownVehicle, "session '" + s.reg->entity_id + "' cannot publish for '" + p.state.vehicle_id + "'");
            }
            if (!s.clock.offset())
            {
                return; // not synchronized yet; the first heartbeat reply is in flight
            }
            core.ingest_state(p.state, now());
        }

        void handle(Session& s, const InstructionPayload& p)
        {
            const auto& owned = s.reg->sources;
            if (s.reg->entity_kind != EntityKind::Admin &&
                std::find(owned.begin(), owned.end(), p.instruction.source_id) == owned.end())
            {
                throw Error(ErrorCode::UnknownSource, "source '" + p.instruction.source_id + "' is not owned by '" + s.reg->entity_id + "'");
            }
            const double t = now();
            if (auto d = core.route_instruction(p.instruction, t))
            {
                forward(*d);
            }
        }

        void handle(Session& s, const AdminCommandPayload& p)
        {
            const AdminAckPayload ack = core.handle_admin(p);
            spdlog::info("admin {} {} -> {} ({}): {}", p.command, p.source_id, p.vehicle_id, to_string(p.channel), ack.ok ? "ok" : ack.message);
            send(s, ack);
        }

        void handle(Session& s, const HeartbeatPayload& p)
        {
            const double t = now();
            if (!p.reply_time)
            {
                send(s, HeartbeatPayload{p.origin_time, t});
                return;
            }
            s.clock.add_sample(p.origin_time, *p.reply_time, t);
            if (s.reg->entity_kind == EntityKind::VehicleAgent)
            {
                core.set_clock_offset(s.reg->entity_id, *s.clock.offset());
            }
        }

        void handle(Session&, const ErrorPayload& p) { spdlog::warn("peer reported {}: {}", p.code, p.message); }

        template <typename Other>
        void handle(Session&, const Other&)
        {
            throw Error(ErrorCode::SchemaViolation, "message type not accepted by the hub");
        }

        void forward(const hub::Dispatch& d)
        {
            const auto v = vehicles.find(d.instruction.target_vehicle_id);
            if (v == vehicles.end())
            {
                return;
            }
            sessions.at(v->second).link->send(InstructionDispatchPayload{d.instruction, d.tick}, now());
        }

        void handle_register(Link* key, Session& s, const RegisterPayload& p)
        {
            RegisterAckPayload ack;
            ack.entity_id = p.entity_id;
            ack.hub_time = now();
            const auto reject = [&](const std::string& why) {
                ack.reason = why;
                spdlog::warn("rejected registration of '{}': {}", p.entity_id, why);
                send(s, ack);
            };
            if (s.reg)
            {
                return reject(std::string(to_string(ErrorCode::DuplicateEntity)) + ": session already registered as '" + s.reg->entity_id + "'");
            }
            if (p.entity_id.empty())
            {
                return reject(std::string(to_string(ErrorCode::SchemaViolation)) + ": empty entity_id");
            }
            if (entities.contains(p.entity_id))
            {
                return reject(std::string(to_string(ErrorCode::DuplicateEntity)) + ": entity '" + p.entity_id + "' is already connected");
            }
            for (const auto& src : p.sources)
            {
                if (source_owner.contains(src))
                {
                    return reject(std::string(to_string(ErrorCode::DuplicateEntity)) + ": source '" + src + "' is owned by another session");
                }
            }
            if (p.entity_kind == EntityKind::VehicleAgent)
            {
                if (!p.vehicle || !p.frame || p.vehicle->vehicle_id != p.entity_id)
                {
                    return reject(std::string(to_string(ErrorCode::SchemaViolation)) + ": a vehicle agent must send its spec and frame");
                }
                try
                {
                    core.register_vehicle(*p.vehicle, *p.frame);
                }
                catch (const Error& e)
                {
                    return reject(e.what());
                }
                vehicles[p.entity_id] = key;
            }
            for (const auto& src : p.sources)
            {
                if (!core.has_source(src))
                {
                    core.register_source(src);
                }
                source_owner[src] = key;
            }
            s.reg = p;
            s.subscriber = p.entity_kind == EntityKind::Controller || p.entity_kind == EntityKind::DriverStation ||
                           p.entity_kind == EntityKind::Observer;
            entities[p.entity_id] = key;
            ack.accepted = true;
            send(s, ack);
            send(s, HeartbeatPayload{now(), std::nullopt});
            spdlog::info("registered {} '{}' from {}", to_string(p.entity_kind), p.entity_id, s.link->peer());
            refresh_counts();
        }

        void on_close(Link* key, const std::string& why)
        {
            const auto it = sessions.find(key);
            if (it == sessions.end())
            {
                return;
            }
            Session& s = it->second;
            if (s.reg)
            {
                spdlog::info("{} '{}' disconnected: {}", to_string(s.reg->entity_kind), s.reg->entity_id, why);
                if (s.reg->entity_kind == EntityKind::VehicleAgent)
                {
                    core.unregister_vehicle(s.reg->entity_id);
                    vehicles.erase(s.reg->entity_id);
                    if (running)
                    {
                        std::lock_guard lock(stats_mutex);
                        ++stats.vehicles_lost;
                    }
                }
                for (const auto& src : s.reg->sources)
                {
                    source_owner.erase(src); // the table keeps the binding; the watchdog covers the silence
                }
                entities.erase(s.reg->entity_id);
            }
            if (why.rfind("slow consumer", 0) == 0)
            {
                std::lock_guard lock(stats_mutex);
                ++stats.slow_consumers_dropped;
            }
            sessions.erase(it);
            refresh_counts();
        }

        void refresh_counts()
        {
            std::lock_guard lock(stats_mutex);
            stats.sessions = sessions.size();
            stats.vehicles = vehicles.size();
            stats.counters = core.counters();
        }

        std::vector<std::shared_ptr<Link>> subscriber_links() const
        {
            std::vector<std::shared_ptr<Link>> out;
            for (const auto& [key, s] : sessions)
            {
                if (s.subscriber)
                {
                    out.push_back(s.link);
                }
            }
            return out;
        }

        void broadcast(const StatePoolPayload& pool)
        {
            const double t = now();
            for (const auto& link : subscriber_links())
            {
                link->send(pool, t);
            }
        }

        void schedule_tick()
        {
            tick_timer.expires_at(next_tick);
            tick_timer.async_wait([self = shared_from_this()](const boost::system::error_code& ec) {
                if (!ec && self->running)
                {
                    self->on_tick();
                }
            });
        }

        void on_tick()
        {
            const double t = now();
            const StatePoolPayload pool = core.broadcast_pool(t);
            double stale = 0.0;
            for (const auto& [id, e] : core.pool())
            {
                const double ingest_ts = e.unified.timestamp - (cfg.hub.delay_compensation ? e.estimated_delay : 0.0);
                stale = std::max(stale, t - ingest_ts - e.estimated_delay);
            }
            {
                std::lock_guard lock(stats_mutex);
                if (last_broadcast)
                {
                    intervals.push_back(t - *last_broadcast);
                }
                last_broadcast = t;
                stats.ticks = pool.tick;
                stats.max_staleness = std::max(stats.max_staleness, stale);
                stats.counters = core.counters();
            }
            broadcast(pool);
            for (const auto& d : core.watchdog(t))
            {
                forward(d);
            }

            const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(cfg.hub.tick_period()));
            next_tick += period;
            const auto wall = std::chrono::steady_clock::now();
            if (next_tick + period < wall)
            {
                spdlog::warn("hub tick overran by {:.1f} ms; re-anchoring the schedule",
                             std::chrono::duration<double, std::milli>(wall - next_tick).count());
                next_tick = wall + period;
            }
            schedule_tick();
        }

        void schedule_heartbeat()
        {
            heartbeat_timer.expires_after(std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(cfg.heartbeat_interval)));
            heartbeat_timer.async_wait([self = shared_from_this()](const boost::system::error_code& ec) {
                if (ec || !self->running)
                {
                    return;
                }
                for (auto& [key, s] : self->sessions)
                {
                    if (s.reg && s.reg->entity_kind == EntityKind::VehicleAgent)
                    {
                        self->send(s, HeartbeatPayload{self->now(), std::nullopt});
                    }
                }
                self->schedule_heartbeat();
            });
        }

        void shutdown()
        {
            running = false;
            boost::system::error_code ignored;
            stream_acceptor.close(ignored);
            socket_acceptor.close(ignored);
            tick_timer.cancel();
            heartbeat_timer.cancel();
            std::vector<std::shared_ptr<Link>> links;
            for (const auto& [key, s] : sessions)
            {
                links.push_back(s.link);
            }
            for (const auto& l : links)
            {
                l->close();
            }
            if (cfg.hub.record && cfg.pool_log)
            {
                try
                {
                    const auto rows = core.export_pool_log(*cfg.pool_log);
                    spdlog::info("pool log: {} rows written to {}", rows, cfg.pool_log->string());
                }
                catch (const Error& e)
                {
                    spdlog::error("{}", e.what());
                }
            }
            refresh_counts();
        }
    };

    HubServer::HubServer(HubServerConfig config) : impl_(std::make_shared<Impl>(std::move(config))) {}

    HubServer::~HubServer() { stop(); }

    void HubServer::start()
    {
        if (impl_->thread.joinable())
        {
            return;
        }
        Impl::bind(impl_->stream_acceptor, impl_->cfg.stream);
        Impl::bind(impl_->socket_acceptor, impl_->cfg.socket);
        impl_->epoch = monotonic_seconds();
        impl_->running = true;
        impl_->accept(impl_->stream_acceptor, false);
        impl_->accept(impl_->socket_acceptor, true);
        if (impl_->cfg.tick_enabled)
        {
            impl_->next_tick = std::chrono::steady_clock::now() +
                               std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(impl_->cfg.hub.tick_period()));
            impl_->schedule_tick();
        }
        impl_->schedule_heartbeat();
        impl_->thread = std::thread([impl = impl_] { impl->io.run(); });
        spdlog::info("hub listening: stream {} socket {}", stream_endpoint().str(), socket_endpoint().str());
    }

    void HubServer::stop()
    {
        if (!impl_->thread.joinable())
        {
            return;
        }
        std::promise<void> done;
        asio::post(impl_->io, [&] {
            impl_->shutdown();
            done.set_value();
        });
        done.get_future().wait();
        // Give the closing sockets one pass to drain, then stop the loop.
        asio::post(impl_->io, [impl = impl_] { impl->io.stop(); });
        impl_->thread.join();
    }

    Endpoint HubServer::stream_endpoint() const
    {
        boost::system::error_code ec;
        const auto ep = impl_->stream_acceptor.local_endpoint(ec);
        return ec ? impl_->cfg.stream : Endpoint{ep.address().to_string(), ep.port()};
    }

    Endpoint HubServer::socket_endpoint() const
    {
        boost::system::error_code ec;
        const auto ep = impl_->socket_acceptor.local_endpoint(ec);
        return ec ? impl_->cfg.socket : Endpoint{ep.address().to_string(), ep.port()};
    }

    HubStats HubServer::stats() const
    {
        std::lock_guard lock(impl_->stats_mutex);
        HubStats s = impl_->stats;
        if (!impl_->intervals.empty())
        {
            std::vector<double> sorted = impl_->intervals;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t idx = std::min(sorted.size() - 1, static_cast<std::size_t>(std::ceil(0.99 * sorted.size())) - 1);
            s.p99_interval = sorted[idx];
            s.max_interval = sorted.back();
            double sum = 0.0;
            for (double v : sorted)
            {
                sum += v;
            }
            s.mean_interval = sum / static_cast<double>(sorted.size());
        }
        return s;
    }

    void HubServer::with_core(const std::function<void(hub::HubCore&)>& fn)
    {
        if (!impl_->thread.joinable())
        {
            fn(impl_->core);
            return;
        }
        std::promise<void> done;
        asio::post(impl_->io, [&] {
            try
            {
                fn(impl_->core);
                done.set_value();
            }
            catch (...)
            {
                done.set_exception(std::current_exception());
            }
        });
        done.get_future().get();
    }

    void HubServer::publish_pool(const StatePoolPayload& pool)
    {
        asio::post(impl_->io, [impl = impl_, pool] { impl->broadcast(pool); });
    }

    std::size_t HubServer::subscribers() const
    {
        std::promise<std::size_t> n;
        if (!impl_->thread.joinable())
        {
            return impl_->subscriber_links().size();
        }
        asio::post(impl_->io, [&] { n.set_value(impl_->subscriber_links().size()); });
        return n.get_future().get();
    }
} // namespace twinhub::net
