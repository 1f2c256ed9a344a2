#pragma once

#include "twinhub/core/frame.hpp"
#include "twinhub/core/track.hpp"
#include "twinhub/core/types.hpp"
#include "twinhub/hub/correspondence.hpp"
#include "twinhub/hub/pool_log.hpp"
#include "twinhub/protocol/messages.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace twinhub::hub
{
    struct HubConfig
    {
        double tick_hz = 50.0;
        FrameTable frames;
        double max_front_wheel_angle = 0.52;
        double max_speed = 30.0 / 3.6;   // unified cap on top of each vehicle's own max_speed
        double watchdog_seconds = 2.0;   // hold-last window before desired speed drops to 0
        double max_compensation = 0.5;   // upper bound on estimated_delay used for dead reckoning
        bool delay_compensation = true;
        bool record = false;
        GapMode gap_mode = GapMode::Arc;
        std::vector<std::string> platoon_order; // gap_to_predecessor order; registration order when empty
        Track track = Track::stadium();

        double tick_period() const { return 1.0 / tick_hz; }
    };

    struct PoolEntry
    {
        VehicleState raw;
        VehicleState unified;
        double receive_time = 0.0;
        double estimated_delay = 0.0;
    };

    struct HubCounters
    {
        std::uint64_t states_ingested = 0;
        std::uint64_t stale_dropped = 0;
        std::uint64_t unmapped_dropped = 0;
        std::uint64_t unknown_target = 0;
        std::uint64_t dispatched = 0;
        std::uint64_t speed_clamped = 0;
        std::uint64_t angle_clamped = 0;
        std::uint64_t watchdog_fired = 0;
        std::uint64_t broadcasts = 0;

        friend bool operator==(const HubCounters&, const HubCounters&) = default;
    };

    struct Dispatch
    {
        ControlInstruction instruction; // target frame
        bool lateral = false;           // which channels of the source produced it
        bool longitudinal = false;
        std::uint64_t tick = 0;
    };

    /// The hub's authoritative state: vehicle registry, unified pool,
    /// correspondence table, and instruction pipeline. No I/O and no clock;
    /// every time value is passed in. Not thread-safe: the owning tick task
    /// serializes all calls (the network server and the lockstep runner both
    /// do).
    class HubCore
    {
    public:
        explicit HubCore(HubConfig config = {});

        const HubConfig& config() const noexcept { return config_; }

        /// Throws DuplicateEntity, SchemaViolation (invalid spec).
        void register_vehicle(const VehicleSpec& spec, FrameId frame);
        /// Removes the vehicle from the pool and table (agent gone).
        void unregister_vehicle(const std::string& vehicle_id);
        void register_source(const std::string& source_id);
        bool has_vehicle(const std::string& vehicle_id) const { return vehicles_.contains(vehicle_id); }
        bool has_source(const std::string& source_id) const { return table_.has_source(source_id); }
        std::vector<std::string> vehicle_ids() const { return order_; }
        const VehicleSpec& spec(const std::string& vehicle_id) const;
        FrameId frame_of(const std::string& vehicle_id) const;

        /// hub_time = sender_time + offset for states from this vehicle.
        void set_clock_offset(const std::string& vehicle_id, double offset);

        /// Aligns and delay-compensates one raw state. Returns nullopt when
        /// the seq is stale (counted). Throws UnknownVehicle, FrameMismatch.
        std::optional<PoolEntry> ingest_state(const VehicleState& raw, double receive_time);

        /// Next pool snapshot; the tick counter advances by exactly one.
        protocol::StatePoolPayload broadcast_pool(double now);

        /// Routes one instruction through the table, merging channels with the
        /// vehicle's last command, clamping in the unified frame, then
        /// converting to the target frame. Returns nullopt when the source has
        /// no binding (UnmappedSource, counted). Throws UnknownSource,
        /// UnknownTarget, FrameMismatch.
        std::optional<Dispatch> route_instruction(const ControlInstruction& unified, double now);

        /// Throws UnknownSource, UnknownVehicle, ConflictingSource.
        void remap(const std::string& source_id, const std::string& vehicle_id, Channel channel, bool force);
        const CorrespondenceTable& table() const noexcept { return table_; }

        /// Vehicles whose last command is older than the watchdog window get
        /// one zero-speed dispatch (angle held). Fires once per silence.
        std::vector<Dispatch> watchdog(double now);

        std::uint64_t tick() const noexcept { return tick_; }
        const std::map<std::string, PoolEntry>& pool() const noexcept { return pool_; }
        const HubCounters& counters() const noexcept { return counters_; }
        const std::vector<PoolLogRow>& log() const noexcept { return log_; }

        /// Throws IoFailure. Returns rows written.
        std::size_t export_pool_log(const std::filesystem::path& path) const;

        /// Maps an AdminCommand to its ack without throwing.
        protocol::AdminAckPayload handle_admin(const protocol::AdminCommandPayload& cmd);

    private:
        struct VehicleRecord
        {
            VehicleSpec spec;
            FrameId frame = FrameId::Unified;
            double clock_offset = 0.0;
            std::optional<std::uint64_t> last_seq;
            std::optional<ControlInstruction> last_command; // unified
            double last_command_time = 0.0;
            bool watchdog_tripped = false;
            std::uint64_t dispatch_seq = 0;
        };

        Dispatch finish(VehicleRecord& rec, ControlInstruction unified, bool lateral, bool longitudinal, double now);
        void record_pool(const protocol::StatePoolPayload& pool);

        HubConfig config_;
        std::map<std::string, VehicleRecord> vehicles_;
        std::vector<std::string> order_; // registration order
        std::map<std::string, PoolEntry> pool_;
        CorrespondenceTable table_;
        HubCounters counters_;
        std::vector<PoolLogRow> log_;
        std::uint64_t tick_ = 0;
    };
} // namespace twinhub::hub
