#include "twinhub/controllers/controller_host.hpp"

#include "twinhub/core/error.hpp"

#include <spdlog/spdlog.h>

namespace twinhub::controllers
{
    std::string_view to_string(BindingKind kind) noexcept
    {
        switch (kind)
        {
        case BindingKind::Lateral: return "lateral";
        case BindingKind::Cacc: return "cacc";
        case BindingKind::Scripted: return "scripted";
        case BindingKind::Head: return "head";
        }
        return "unknown";
    }

    ControllerHost::ControllerHost(ControllerHostConfig config) : config_(std::move(config))
    {
        validate(config_.cacc);
        validate(config_.lateral);
        if (!(config_.dt > 0.0))
        {
            throw Error(ErrorCode::NonPositiveDt, "controller host needs dt > 0");
        }
        for (const auto& b : config_.bindings)
        {
            if (seq_.contains(b.source_id))
            {
                throw Error(ErrorCode::DuplicateEntity, "source '" + b.source_id + "' bound twice");
            }
            seq_[b.source_id] = 0;
            if (b.kind == BindingKind::Scripted)
            {
                drivers_.emplace(b.source_id, ScriptedDriver(b.driver));
            }
            if (b.kind == BindingKind::Head)
            {
                if (!config_.head)
                {
                    throw Error(ErrorCode::SchemaViolation, "head binding without head setup");
                }
                if (head_exec_)
                {
                    throw Error(ErrorCode::SchemaViolation, "more than one head binding");
                }
                head_exec_ = std::make_unique<HeadExecutor>(config_.head->profile, config_.track, config_.head->actuator_tau, config_.dt);
                settle_ = std::make_unique<SettleMonitor>(config_.head->settle, config_.head->d_des);
            }
        }
    }

    std::vector<std::string> ControllerHost::source_ids() const
    {
        std::vector<std::string> out;
        for (const auto& b : config_.bindings)
        {
            out.push_back(b.source_id);
        }
        return out;
    }

    std::optional<double> ControllerHost::trigger_time() const { return head_exec_ ? head_exec_->trigger_time() : std::nullopt; }

    std::optional<double> ControllerHost::settled_at() const { return settle_ ? settle_->settled_at() : std::nullopt; }

    std::vector<ControlInstruction> ControllerHost::on_pool(const protocol::StatePoolPayload& pool)
    {
        std::map<std::string, const VehicleState*> by_id;
        for (const auto& s : pool.states)
        {
            by_id[s.vehicle_id] = &s;
        }
        const auto find = [&](const std::string& id) -> const VehicleState* {
            const auto it = by_id.find(id);
            return it == by_id.end() ? nullptr : it->second;
        };
        const double t = pool.pool_timestamp;

        std::vector<ControlInstruction> out;
        for (const auto& b : config_.bindings)
        {
            const VehicleState* self = find(b.vehicle_id);
            if (!self)
            {
                ++skipped_;
                continue;
            }
            ControlInstruction c;
            c.target_vehicle_id = b.vehicle_id;
            c.source_id = b.source_id;
            c.source_frame = FrameId::Unified;
            c.timestamp = t;
            c.desired_speed = self->speed;
            try
            {
                switch (b.kind)
                {
                case BindingKind::Lateral:
                    c.desired_front_wheel_angle = lateral_angle(*self, config_.track, config_.lateral);
                    break;
                case BindingKind::Cacc:
                {
                    const double a = cacc_accel(*self, find(b.predecessor_id), find(b.head_id), config_.cacc, config_.track, config_.gap_mode);
                    c.desired_speed = accel_to_speed_cmd(a, self->speed, config_.dt);
                    break;
                }
                case BindingKind::Scripted:
                {
                    const VehicleState* pred = find(b.predecessor_id);
                    if (!pred)
                    {
                        throw Error(ErrorCode::MissingPredecessor, "no predecessor state for " + b.vehicle_id);
                    }
                    const double gap = gap_between(*self, *pred, config_.track, config_.gap_mode);
                    c.desired_speed = drivers_.at(b.source_id).speed_cmd(t, gap, self->speed, config_.dt);
                    break;
                }
                case BindingKind::Head:
                {
                    if (!head_exec_->armed())
                    {
                        std::vector<double> gaps;
                        const VehicleState* prev = nullptr;
                        for (const auto& id : config_.head->platoon_order)
                        {
                            const VehicleState* s = find(id);
                            if (!s)
                            {
                                throw Error(ErrorCode::MissingPredecessor, "vehicle " + id + " missing while settling");
                            }
                            if (prev)
                            {
                                gaps.push_back(gap_between(*s, *prev, config_.track, config_.gap_mode));
                            }
                            prev = s;
                        }
                        if (settle_->update(t, gaps))
                        {
                            spdlog::info("platoon settled at t={:.2f} s; trigger armed", t);
                            head_exec_->arm();
                        }
                    }
                    c.desired_speed = head_exec_->update(t, self->arc_position);
                    break;
                }
                }
            }
            catch (const Error& e)
            {
                if (e.code() != ErrorCode::MissingPredecessor)
                {
                    throw;
                }
                ++skipped_;
                continue;
            }
            c.seq = ++seq_[b.source_id];
            out.push_back(std::move(c));
        }
        return out;
    }
} // namespace twinhub::controllers
