#pragma once

#include "twinhub/agents/vehicle_agent.hpp"
#include "twinhub/controllers/controller_host.hpp"
#include "twinhub/net/link.hpp"

#include <boost/asio/io_context.hpp>

#include <atomic>
#include <exception>
#include <future>
#include <mutex>

namespace twinhub::net
{
    /// Registration handshake and heartbeat replies shared by every client.
    /// All callbacks run on the io thread of the io_context passed in.
    class ClientBase
    {
    public:
        ClientBase(boost::asio::io_context& io, Endpoint hub, bool websocket = false);
        virtual ~ClientBase();

        ClientBase(const ClientBase&) = delete;
        ClientBase& operator=(const ClientBase&) = delete;

        /// Connects and registers; blocks until the ack. Must not be called
        /// from the io thread. Throws IoFailure, DuplicateEntity (rejected).
        void start(double timeout = 5.0);
        void stop();

        bool connected() const { return link_ && link_->open(); }
        /// The hub went away without stop() being called.
        bool lost() const noexcept { return lost_; }
        /// Seconds on this client's own clock.
        double local_time() const;

    protected:
        virtual protocol::RegisterPayload registration() const = 0;
        virtual void on_registered() {}
        virtual void on_message(const protocol::MessageEnvelope& env) = 0;

        void send(protocol::Payload payload);
        boost::asio::io_context& io() noexcept { return io_; }

        // Handlers on the io thread lock the guard and bail out once the
        // client is gone. Every derived destructor calls detach() first, so
        // no virtual runs against a half-destroyed object.
        struct Guard
        {
            std::mutex mutex;
            bool alive = true;
        };
        std::shared_ptr<Guard> guard() const noexcept { return guard_; }
        void detach();

    private:
        void dispatch(const protocol::MessageEnvelope& env);

        boost::asio::io_context& io_;
        Endpoint hub_;
        bool websocket_;
        std::shared_ptr<Link> link_;
        double epoch_;
        std::promise<protocol::RegisterAckPayload> ack_;
        std::atomic<bool> registered_{false};
        std::atomic<bool> stopping_{false};
        std::atomic<bool> lost_{false};
        std::shared_ptr<Guard> guard_ = std::make_shared<Guard>();
    };

    struct AgentOptions
    {
        VehicleSpec spec; // unified
        FrameId frame = FrameId::Virtual;
        FrameTable frames;
        Track track = Track::stadium(); // unified
        agents::ImperfectionModel imperfections;
        double initial_arc = 0.0;   // unified m
        double initial_speed = 0.0; // unified m/s
        double step_hz = 50.0;
    };

    /// A vehicle agent process: integrates its dynamics on a wall-clock
    /// timer, publishes StateUpdates and applies dispatched instructions.
    class AgentClient : public ClientBase
    {
    public:
        AgentClient(boost::asio::io_context& io, Endpoint hub, AgentOptions options);
        ~AgentClient() override;

        std::uint64_t published() const noexcept { return published_; }
        std::uint64_t commands() const noexcept { return commands_; }
        const std::string& id() const noexcept { return options_.spec.vehicle_id; }

    protected:
        protocol::RegisterPayload registration() const override;
        void on_registered() override;
        void on_message(const protocol::MessageEnvelope& env) override;

    private:
        void tick();

        AgentOptions options_;
        agents::VehicleAgent agent_;
        struct Timer;
        std::shared_ptr<Timer> timer_;
        double last_step_ = 0.0;
        std::atomic<std::uint64_t> published_{0};
        std::atomic<std::uint64_t> commands_{0};
    };

    /// Hosts any number of controller bindings and answers every pool with
    /// instructions.
    class ControllerClient : public ClientBase
    {
    public:
        ControllerClient(boost::asio::io_context& io, Endpoint hub, std::string entity_id, controllers::ControllerHostConfig config);
        ~ControllerClient() override { detach(); }

        /// First exception raised by a binding (SettlingTimeout), if any.
        std::exception_ptr failure() const;
        std::optional<double> trigger_time() const;
        std::optional<double> settled_at() const;
        std::uint64_t pools_seen() const noexcept { return pools_; }

    protected:
        protocol::RegisterPayload registration() const override;
        void on_message(const protocol::MessageEnvelope& env) override;

    private:
        std::string entity_id_;
        controllers::ControllerHost host_;
        mutable std::mutex mutex_;
        std::exception_ptr failure_;
        std::optional<double> trigger_time_;
        std::optional<double> settled_at_;
        std::atomic<std::uint64_t> pools_{0};
    };

    /// Receives pools; the callback runs on the io thread.
    class ObserverClient : public ClientBase
    {
    public:
        using PoolHandler = std::function<void(const protocol::StatePoolPayload&)>;

        ObserverClient(boost::asio::io_context& io, Endpoint hub, std::string entity_id, PoolHandler on_pool, bool websocket = false);
        ~ObserverClient() override { detach(); }

    protected:
        protocol::RegisterPayload registration() const override;
        void on_message(const protocol::MessageEnvelope& env) override;

    private:
        std::string entity_id_;
        PoolHandler on_pool_;
    };

    /// Sends AdminCommands and waits for the matching ack.
    class AdminClient : public ClientBase
    {
    public:
        AdminClient(boost::asio::io_context& io, Endpoint hub, std::string entity_id);
        ~AdminClient() override { detach(); }

        protocol::AdminAckPayload command(const protocol::AdminCommandPayload& cmd, double timeout = 5.0);

    protected:
        protocol::RegisterPayload registration() const override;
        void on_message(const protocol::MessageEnvelope& env) override;

    private:
        std::string entity_id_;
        std::mutex mutex_;
        std::optional<std::promise<protocol::AdminAckPayload>> pending_;
    };
} // namespace twinhub::net
