#pragma once

#include "twinhub/hub/hub_core.hpp"
#include "twinhub/net/endpoint.hpp"
#include "twinhub/protocol/messages.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>

namespace twinhub::net
{
    struct HubServerConfig
    {
        hub::HubConfig hub;
        Endpoint stream{"127.0.0.1", 0}; // agents and controllers; port 0 picks a free port
        Endpoint socket{"127.0.0.1", 0}; // WebSocket for driver stations and observers
        std::size_t max_backlog_bytes = 4u << 20; // per-session send queue before the session is dropped
        double heartbeat_interval = 0.5;
        bool tick_enabled = true; // false for replay: pools come from publish_pool()
        std::optional<std::filesystem::path> pool_log; // exported on stop() when recording
    };

    struct HubStats
    {
        std::uint64_t ticks = 0;
        double p99_interval = 0.0; // seconds between consecutive broadcasts
        double max_interval = 0.0;
        double mean_interval = 0.0;
        double max_staleness = 0.0; // seconds, over every entry of every broadcast
        std::uint64_t vehicles_lost = 0;
        std::uint64_t slow_consumers_dropped = 0;
        std::uint64_t protocol_errors = 0;
        std::size_t vehicles = 0;
        std::size_t sessions = 0;
        hub::HubCounters counters;
    };

    /// The networked hub: one io thread owns the HubCore, every session and
    /// the 50 Hz broadcast timer, so hub state is never touched concurrently.
    class HubServer
    {
    public:
        explicit HubServer(HubServerConfig config);
        ~HubServer();

        HubServer(const HubServer&) = delete;
        HubServer& operator=(const HubServer&) = delete;

        /// Binds both listeners and starts the io thread. Throws IoFailure.
        void start();
        void stop();

        Endpoint stream_endpoint() const;
        Endpoint socket_endpoint() const;

        HubStats stats() const;

        /// Runs `fn` on the hub thread and waits for it.
        void with_core(const std::function<void(hub::HubCore&)>& fn);

        /// Sends a pool to every subscriber (replay mode).
        void publish_pool(const protocol::StatePoolPayload& pool);
        std::size_t subscribers() const;

        struct Impl;

    private:
        std::shared_ptr<Impl> impl_;
    };
} // namespace twinhub::net
