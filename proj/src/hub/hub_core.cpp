#include "twinhub/hub/hub_core.hpp"

#include "twinhub/core/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace twinhub::hub
{
    HubCore::HubCore(HubConfig config) : config_(std::move(config))
    {
        if (!(config_.tick_hz > 0.0) || !(config_.watchdog_seconds > 0.0) || !(config_.max_compensation >= 0.0) ||
            !(config_.max_front_wheel_angle > 0.0) || !(config_.max_speed > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "hub config: rates, limits and windows must be positive");
        }
        if (config_.track.empty())
        {
            throw Error(ErrorCode::EmptyTrack, "hub config has no track");
        }
    }

    void HubCore::register_vehicle(const VehicleSpec& spec, FrameId frame)
    {
        validate(spec);
        if (vehicles_.contains(spec.vehicle_id))
        {
            throw Error(ErrorCode::DuplicateEntity, "vehicle '" + spec.vehicle_id + "' already registered");
        }
        table_.add_vehicle(spec.vehicle_id);
        VehicleRecord rec;
        rec.spec = spec;
        rec.frame = frame;
        vehicles_.emplace(spec.vehicle_id, std::move(rec));
        order_.push_back(spec.vehicle_id);
    }

    void HubCore::unregister_vehicle(const std::string& vehicle_id)
    {
        if (vehicles_.erase(vehicle_id) == 0)
        {
            return;
        }
        pool_.erase(vehicle_id);
        table_.remove_vehicle(vehicle_id);
        order_.erase(std::remove(order_.begin(), order_.end(), vehicle_id), order_.end());
    }

    void HubCore::register_source(const std::string& source_id) { table_.add_source(source_id); }

    const VehicleSpec& HubCore::spec(const std::string& vehicle_id) const
    {
        const auto it = vehicles_.find(vehicle_id);
        if (it == vehicles_.end())
        {
            throw Error(ErrorCode::UnknownVehicle, "vehicle '" + vehicle_id + "' is not registered");
        }
        return it->second.spec;
    }

    FrameId HubCore::frame_of(const std::string& vehicle_id) const
    {
        const auto it = vehicles_.find(vehicle_id);
        if (it == vehicles_.end())
        {
            throw Error(ErrorCode::UnknownVehicle, "vehicle '" + vehicle_id + "' is not registered");
        }
        return it->second.frame;
    }

    void HubCore::set_clock_offset(const std::string& vehicle_id, double offset)
    {
        const auto it = vehicles_.find(vehicle_id);
        if (it == vehicles_.end())
        {
            throw Error(ErrorCode::UnknownVehicle, "vehicle '" + vehicle_id + "' is not registered");
        }
        it->second.clock_offset = offset;
    }

    std::optional<PoolEntry> HubCore::ingest_state(const VehicleState& raw, double receive_time)
    {
        const auto it = vehicles_.find(raw.vehicle_id);
        if (it == vehicles_.end())
        {
            throw Error(ErrorCode::UnknownVehicle, "state from unregistered vehicle '" + raw.vehicle_id + "'");
        }
        VehicleRecord& rec = it->second;
        if (raw.frame != rec.frame)
        {
            throw Error(ErrorCode::FrameMismatch,
                        "vehicle '" + raw.vehicle_id + "' registered in " + std::string(to_string(rec.frame)) + " but sent " + std::string(to_string(raw.frame)));
        }
        if (rec.last_seq && raw.seq <= *rec.last_seq)
        {
            ++counters_.stale_dropped;
            spdlog::warn("dropping stale state seq {} (last {}) from vehicle {}", raw.seq, *rec.last_seq, raw.vehicle_id);
            return std::nullopt;
        }
        rec.last_seq = raw.seq;

        PoolEntry entry;
        entry.raw = raw;
        entry.receive_time = receive_time;
        entry.unified = to_unified(raw, config_.frames.transform(raw.frame));
        entry.unified.timestamp = raw.timestamp + rec.clock_offset;
        entry.estimated_delay = std::clamp(receive_time - entry.unified.timestamp, 0.0, config_.max_compensation);
        if (config_.delay_compensation && entry.estimated_delay > 0.0)
        {
            // position only; speed is not extrapolated
            VehicleState& u = entry.unified;
            const double ds = u.speed * entry.estimated_delay;
            u.pose.x += ds * std::cos(u.pose.heading);
            u.pose.y += ds * std::sin(u.pose.heading);
            u.arc_position = config_.track.wrap(u.arc_position + ds);
            u.timestamp += entry.estimated_delay;
        }
        ++counters_.states_ingested;
        pool_[raw.vehicle_id] = entry;
        return entry;
    }

    protocol::StatePoolPayload HubCore::broadcast_pool(double now)
    {
        protocol::StatePoolPayload out;
        out.tick = ++tick_;
        out.pool_timestamp = now;
        out.states.reserve(pool_.size());
        for (const auto& id : order_)
        {
            const auto it = pool_.find(id);
            if (it != pool_.end())
            {
                out.states.push_back(it->second.unified);
            }
        }
        ++counters_.broadcasts;
        if (config_.record)
        {
            record_pool(out);
        }
        return out;
    }

    void HubCore::record_pool(const protocol::StatePoolPayload& pool)
    {
        const auto& order = config_.platoon_order.empty() ? order_ : config_.platoon_order;
        std::map<std::string, const VehicleState*> by_id;
        for (const auto& s : pool.states)
        {
            by_id[s.vehicle_id] = &s;
        }
        std::map<std::string, double> gaps;
        const VehicleState* prev = nullptr;
        for (const auto& id : order)
        {
            const auto it = by_id.find(id);
            if (it == by_id.end())
            {
                continue;
            }
            if (prev)
            {
                gaps[id] = gap_between(*it->second, *prev, config_.track, config_.gap_mode);
            }
            prev = it->second;
        }
        for (const auto& s : pool.states)
        {
            PoolLogRow row;
            row.tick = pool.tick;
            row.time = pool.pool_timestamp;
            row.vehicle_id = s.vehicle_id;
            row.arc_position = s.arc_position;
            row.speed = s.speed;
            row.frame = std::string(to_string(vehicles_.at(s.vehicle_id).frame));
            if (const auto g = gaps.find(s.vehicle_id); g != gaps.end())
            {
                row.gap_to_predecessor = g->second;
            }
            log_.push_back(std::move(row));
        }
    }

    std::optional<Dispatch> HubCore::route_instruction(const ControlInstruction& instr, double now)
    {
        if (!table_.has_source(instr.source_id))
        {
            throw Error(ErrorCode::UnknownSource, "instruction from unregistered source '" + instr.source_id + "'");
        }
        const auto binding = table_.binding(instr.source_id);
        if (!binding)
        {
            ++counters_.unmapped_dropped;
            spdlog::debug("dropping instruction from unmapped source {}", instr.source_id);
            return std::nullopt;
        }
        const auto it = vehicles_.find(binding->vehicle_id);
        if (it == vehicles_.end())
        {
            ++counters_.unknown_target;
            throw Error(ErrorCode::UnknownTarget, "source '" + instr.source_id + "' maps to unknown vehicle '" + binding->vehicle_id + "'");
        }
        const ControlInstruction unified =
            instr.source_frame == FrameId::Unified ? instr : to_unified(instr, config_.frames.transform(instr.source_frame));

        VehicleRecord& rec = it->second;
        ControlInstruction merged;
        if (rec.last_command)
        {
            merged = *rec.last_command;
        }
        else if (const auto p = pool_.find(binding->vehicle_id); p != pool_.end())
        {
            merged.desired_speed = p->second.unified.speed;
        }
        if (binding->lateral)
        {
            merged.desired_front_wheel_angle = unified.desired_front_wheel_angle;
        }
        if (binding->longitudinal)
        {
            merged.desired_speed = unified.desired_speed;
        }
        merged.source_id = instr.source_id;
        return finish(rec, merged, binding->lateral, binding->longitudinal, now);
    }

    Dispatch HubCore::finish(VehicleRecord& rec, ControlInstruction cmd, bool lateral, bool longitudinal, double now)
    {
        const double vmax = std::min(rec.spec.max_speed, config_.max_speed);
        const double amax = std::min(rec.spec.max_front_wheel_angle, config_.max_front_wheel_angle);
        if (!std::isfinite(cmd.desired_speed) || cmd.desired_speed < 0.0 || cmd.desired_speed > vmax)
        {
            cmd.desired_speed = std::isfinite(cmd.desired_speed) ? std::clamp(cmd.desired_speed, 0.0, vmax) : 0.0;
            ++counters_.speed_clamped;
        }
        if (!std::isfinite(cmd.desired_front_wheel_angle) || std::abs(cmd.desired_front_wheel_angle) > amax)
        {
            cmd.desired_front_wheel_angle = std::isfinite(cmd.desired_front_wheel_angle) ? std::clamp(cmd.desired_front_wheel_angle, -amax, amax) : 0.0;
            ++counters_.angle_clamped;
        }
        cmd.target_vehicle_id = rec.spec.vehicle_id;
        cmd.source_frame = FrameId::Unified;
        cmd.timestamp = now;
        rec.last_command = cmd;
        if (longitudinal)
        {
            rec.last_command_time = now;
            rec.watchdog_tripped = false;
        }

        Dispatch d;
        d.instruction = from_unified(cmd, config_.frames.transform(rec.frame));
        d.instruction.seq = ++rec.dispatch_seq;
        d.lateral = lateral;
        d.longitudinal = longitudinal;
        d.tick = tick_;
        ++counters_.dispatched;
        return d;
    }

    void HubCore::remap(const std::string& source_id, const std::string& vehicle_id, Channel channel, bool force)
    {
        table_.remap(source_id, vehicle_id, channel, force);
    }

    std::vector<Dispatch> HubCore::watchdog(double now)
    {
        std::vector<Dispatch> out;
        for (const auto& id : order_)
        {
            VehicleRecord& rec = vehicles_.at(id);
            if (!rec.last_command || rec.watchdog_tripped || now - rec.last_command_time <= config_.watchdog_seconds)
            {
                continue;
            }
            ControlInstruction cmd = *rec.last_command;
            cmd.desired_speed = 0.0;
            cmd.source_id = "hub/watchdog";
            spdlog::info("watchdog: vehicle {} silent for {:.2f} s, commanding stop", id, now - rec.last_command_time);
            out.push_back(finish(rec, cmd, false, false, now));
            rec.watchdog_tripped = true;
            ++counters_.watchdog_fired;
        }
        return out;
    }

    std::size_t HubCore::export_pool_log(const std::filesystem::path& path) const { return write_pool_log(path, log_); }

    protocol::AdminAckPayload HubCore::handle_admin(const protocol::AdminCommandPayload& cmd)
    {
        protocol::AdminAckPayload ack;
        ack.command = cmd.command;
        ack.source_id = cmd.source_id;
        ack.vehicle_id = cmd.vehicle_id;
        if (cmd.command != "remap")
        {
            ack.error_code = std::string(to_string(ErrorCode::SchemaViolation));
            ack.message = "unsupported admin command '" + cmd.command + "'";
            return ack;
        }
        try
        {
            remap(cmd.source_id, cmd.vehicle_id, cmd.channel, cmd.force);
            ack.ok = true;
        }
        catch (const Error& e)
        {
            ack.error_code = std::string(to_string(e.code()));
            ack.message = e.what();
        }
        return ack;
    }
} // namespace twinhub::hub
