#include "twinhub/hub/correspondence.hpp"

#include "twinhub/core/error.hpp"

namespace twinhub::hub
{
    void CorrespondenceTable::add_source(const std::string& source_id)
    {
        if (sources_.contains(source_id))
        {
            throw Error(ErrorCode::DuplicateEntity, "source '" + source_id + "' already registered");
        }
        sources_.emplace(source_id, std::nullopt);
    }

    void CorrespondenceTable::add_vehicle(const std::string& vehicle_id)
    {
        if (vehicles_.contains(vehicle_id))
        {
            throw Error(ErrorCode::DuplicateEntity, "vehicle '" + vehicle_id + "' already registered");
        }
        vehicles_.emplace(vehicle_id, VehicleSources{});
    }

    void CorrespondenceTable::remove_vehicle(const std::string& vehicle_id)
    {
        if (vehicles_.erase(vehicle_id) == 0)
        {
            return;
        }
        for (auto& [id, binding] : sources_)
        {
            if (binding && binding->vehicle_id == vehicle_id)
            {
                binding.reset();
            }
        }
    }

    void CorrespondenceTable::remap(const std::string& source_id, const std::string& vehicle_id, Channel channel, bool force)
    {
        const auto src = sources_.find(source_id);
        if (src == sources_.end())
        {
            throw Error(ErrorCode::UnknownSource, "source '" + source_id + "' is not registered");
        }
        const auto veh = vehicles_.find(vehicle_id);
        if (veh == vehicles_.end())
        {
            throw Error(ErrorCode::UnknownVehicle, "vehicle '" + vehicle_id + "' is not registered");
        }
        const bool want_lat = channel != Channel::Longitudinal;
        const bool want_lon = channel != Channel::Lateral;
        const VehicleSources& held = veh->second;
        const bool lat_taken = want_lat && held.lateral && *held.lateral != source_id;
        const bool lon_taken = want_lon && held.longitudinal && *held.longitudinal != source_id;
        if ((lat_taken || lon_taken) && !force)
        {
            const std::string& other = lat_taken ? *held.lateral : *held.longitudinal;
            throw Error(ErrorCode::ConflictingSource,
                        "vehicle '" + vehicle_id + "' already has " + std::string(lat_taken ? "lateral" : "longitudinal") + " source '" + other + "'");
        }

        // commit
        unbind(source_id);
        VehicleSources& slots = vehicles_.at(vehicle_id);
        auto evict = [&](std::optional<std::string>& slot, bool lateral) {
            if (!slot)
            {
                return;
            }
            auto& b = sources_.at(*slot);
            if (b)
            {
                (lateral ? b->lateral : b->longitudinal) = false;
                if (!b->lateral && !b->longitudinal)
                {
                    b.reset();
                }
            }
            slot.reset();
        };
        if (want_lat)
        {
            evict(slots.lateral, true);
            slots.lateral = source_id;
        }
        if (want_lon)
        {
            evict(slots.longitudinal, false);
            slots.longitudinal = source_id;
        }
        src->second = SourceBinding{vehicle_id, want_lat, want_lon};
    }

    void CorrespondenceTable::unbind(const std::string& source_id)
    {
        auto it = sources_.find(source_id);
        if (it == sources_.end() || !it->second)
        {
            return;
        }
        const SourceBinding b = *it->second;
        it->second.reset();
        auto veh = vehicles_.find(b.vehicle_id);
        if (veh == vehicles_.end())
        {
            return;
        }
        if (veh->second.lateral == source_id)
        {
            veh->second.lateral.reset();
        }
        if (veh->second.longitudinal == source_id)
        {
            veh->second.longitudinal.reset();
        }
    }

    std::optional<SourceBinding> CorrespondenceTable::binding(const std::string& source_id) const
    {
        const auto it = sources_.find(source_id);
        return it == sources_.end() ? std::nullopt : it->second;
    }

    VehicleSources CorrespondenceTable::sources_of(const std::string& vehicle_id) const
    {
        const auto it = vehicles_.find(vehicle_id);
        return it == vehicles_.end() ? VehicleSources{} : it->second;
    }
} // namespace twinhub::hub
