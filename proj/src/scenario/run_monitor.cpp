#include "twinhub/scenario/run_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace twinhub::scenario
{
    namespace
    {
        // Signed shortest distance from a to b along a closed track.
        double wrapped_delta(double a, double b, double lap)
        {
            double d = std::fmod(b - a, lap);
            if (d > lap / 2.0)
            {
                d -= lap;
            }
            else if (d <= -lap / 2.0)
            {
                d += lap;
            }
            return d;
        }
    } // namespace

    RunMonitor::RunMonitor(const ScenarioSpec& spec, std::string mode) : spec_(&spec)
    {
        report_.scenario = spec.name;
        report_.mode = std::move(mode);
        report_.seed = spec.seed;
        report_.tick_hz = spec.tick_hz;
        report_.base_speed = spec.base_speed;
        report_.collision_threshold = spec.collision_threshold;
        report_.gap_mode = spec.gap_mode;
        if (spec.perturbation)
        {
            report_.perturbation = std::holds_alternative<agents::HalfSine>(spec.perturbation->shape) ? "HalfSine" : "Brake";
        }
        for (std::size_t i = 0; i < spec.platoon.size(); ++i)
        {
            const PlatoonEntry& e = spec.platoon[i];
            VehicleSeries v;
            v.vehicle_id = e.spec.vehicle_id;
            v.kind = e.spec.kind;
            v.role = e.spec.role;
            v.source = e.source;
            v.frame = e.frame;
            report_.vehicles.push_back(std::move(v));
            index_[e.spec.vehicle_id] = i;
        }
        error_sum_.assign(spec.platoon.size(), 0.0);
        error_n_.assign(spec.platoon.size(), 0);
    }

    void RunMonitor::on_pool(const protocol::StatePoolPayload& pool)
    {
        const std::size_t n = report_.vehicles.size();
        std::vector<const VehicleState*> states(n, nullptr);
        for (const auto& s : pool.states)
        {
            const auto it = index_.find(s.vehicle_id);
            if (it != index_.end())
            {
                states[it->second] = &s;
            }
        }
        report_.ticks.push_back(pool.tick);
        report_.time.push_back(pool.pool_timestamp);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        for (std::size_t i = 0; i < n; ++i)
        {
            VehicleSeries& v = report_.vehicles[i];
            v.arc.push_back(states[i] ? states[i]->arc_position : nan);
            v.speed.push_back(states[i] ? states[i]->speed : nan);
            if (i > 0 && states[i] && states[i - 1])
            {
                v.gap.emplace_back(gap_between(*states[i], *states[i - 1], spec_->track, spec_->gap_mode));
            }
            else
            {
                v.gap.emplace_back(std::nullopt);
            }
        }
        if (n > 0 && states[0])
        {
            const double arc = states[0]->arc_position;
            if (last_head_arc_)
            {
                head_odometer_ += wrapped_delta(*last_head_arc_, arc, spec_->track.lap_length());
            }
            last_head_arc_ = arc;
        }
    }

    void RunMonitor::on_truth(const std::string& vehicle_id, double unified_arc)
    {
        const auto it = index_.find(vehicle_id);
        if (it == index_.end())
        {
            return;
        }
        const VehicleSeries& v = report_.vehicles[it->second];
        if (v.arc.empty() || std::isnan(v.arc.back()))
        {
            return;
        }
        error_sum_[it->second] += std::abs(wrapped_delta(unified_arc, v.arc.back(), spec_->track.lap_length()));
        ++error_n_[it->second];
    }

    std::optional<double> RunMonitor::latest_gap(std::size_t index) const
    {
        if (index == 0 || index >= report_.vehicles.size() || report_.vehicles[index].gap.empty())
        {
            return std::nullopt;
        }
        return report_.vehicles[index].gap.back();
    }

    RunReport RunMonitor::finish(std::optional<double> settled_at, std::optional<double> trigger_time, const hub::HubCounters& counters,
                                 std::uint64_t interlock_engagements, bool truncated)
    {
        RunReport r = report_;
        r.settled_at = settled_at;
        r.trigger_time = trigger_time;
        r.hub = counters;
        r.interlock_engagements = interlock_engagements;
        r.truncated = truncated;
        for (std::size_t i = 0; i < r.vehicles.size(); ++i)
        {
            if (error_n_[i] > 0)
            {
                r.vehicles[i].mean_position_error = error_sum_[i] / static_cast<double>(error_n_[i]);
            }
            if (i == 0)
            {
                continue;
            }
            const bool virtual_involved = r.vehicles[i].kind == VehicleKind::Virtual || r.vehicles[i - 1].kind == VehicleKind::Virtual;
            auto events = detect_collisions(r.time, r.vehicles[i].gap, r.collision_threshold, r.vehicles[i].vehicle_id,
                                            r.vehicles[i - 1].vehicle_id, virtual_involved);
            r.collisions.insert(r.collisions.end(), events.begin(), events.end());
        }
        std::stable_sort(r.collisions.begin(), r.collisions.end(),
                         [](const CollisionEvent& a, const CollisionEvent& b) { return a.start_time < b.start_time; });
        return r;
    }
} // namespace twinhub::scenario
