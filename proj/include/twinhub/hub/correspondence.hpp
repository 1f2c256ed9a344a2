#pragma once

#include "twinhub/protocol/messages.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>

namespace twinhub::hub
{
    using protocol::Channel;

    struct SourceBinding
    {
        std::string vehicle_id;
        bool lateral = false;
        bool longitudinal = false;

        friend bool operator==(const SourceBinding&, const SourceBinding&) = default;
    };

    struct VehicleSources
    {
        std::optional<std::string> lateral;
        std::optional<std::string> longitudinal;

        friend bool operator==(const VehicleSources&, const VehicleSources&) = default;
    };

    /// source -> vehicle routing with decoupled lateral/longitudinal channels.
    /// A source drives at most one vehicle; a vehicle has at most one source
    /// per channel. Every mutation validates first and then commits, so a
    /// failed call leaves the table untouched.
    class CorrespondenceTable
    {
    public:
        void add_source(const std::string& source_id);
        void add_vehicle(const std::string& vehicle_id);
        /// Drops the vehicle and every binding that pointed at it.
        void remove_vehicle(const std::string& vehicle_id);

        bool has_source(const std::string& source_id) const { return sources_.contains(source_id); }
        bool has_vehicle(const std::string& vehicle_id) const { return vehicles_.contains(vehicle_id); }

        /// Moves `source_id` onto `vehicle_id` for `channel`. Any channels the
        /// source held elsewhere are released; the vehicle it left keeps its
        /// last command. Throws UnknownSource, UnknownVehicle, or
        /// ConflictingSource when another source holds the channel and
        /// `force` is false (with force, that source loses the channel).
        void remap(const std::string& source_id, const std::string& vehicle_id, Channel channel, bool force);

        /// Removes the source's binding, if any.
        void unbind(const std::string& source_id);

        std::optional<SourceBinding> binding(const std::string& source_id) const;
        VehicleSources sources_of(const std::string& vehicle_id) const;

    private:
        std::map<std::string, std::optional<SourceBinding>> sources_;
        std::map<std::string, VehicleSources> vehicles_;
    };
} // namespace twinhub::hub
