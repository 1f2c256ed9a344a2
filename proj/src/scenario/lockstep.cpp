#include "twinhub/scenario/lockstep.hpp"

#include "twinhub/agents/vehicle_agent.hpp"
#include "twinhub/core/error.hpp"
#include "twinhub/scenario/assembly.hpp"
#include "twinhub/scenario/run_monitor.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <deque>

namespace twinhub::scenario
{
    namespace
    {
        constexpr double kTimeEps = 1e-9;

        struct InFlight
        {
            double deliver_at;
            VehicleState state;
        };

        // Emergency stop for an EmulatedPhysical follower directly behind
        // another EmulatedPhysical vehicle: engage when the gap, less the
        // distance needed to cancel the closing speed, would fall under
        // threshold + margin; release once clear and no longer closing.
        class Interlock
        {
        public:
            explicit Interlock(const ScenarioSpec& spec) : spec_(spec), engaged_(spec.platoon.size(), 0) {}

            bool guarded(std::size_t i) const
            {
                return spec_.interlock && i > 0 && spec_.platoon[i].spec.kind == VehicleKind::EmulatedPhysical &&
                       spec_.platoon[i - 1].spec.kind == VehicleKind::EmulatedPhysical;
            }

            /// Returns true on a rising edge.
            bool update(std::size_t i, double gap, double closing, double decel, double dt)
            {
                const double floor = spec_.collision_threshold + spec_.interlock_margin;
                const double c = std::max(0.0, closing);
                const double projected = gap - c * c / (2.0 * decel) - 2.0 * c * dt;
                char& on = engaged_[i];
                if (!on && projected < floor)
                {
                    on = 1;
                    return true;
                }
                if (on && gap > floor + 1.0 && closing <= 0.0)
                {
                    on = 0;
                }
                return false;
            }

            bool engaged(std::size_t i) const { return engaged_[i] != 0; }

        private:
            const ScenarioSpec& spec_;
            std::vector<char> engaged_;
        };
    } // namespace

    LockstepResult run_lockstep(const ScenarioSpec& spec, const LockstepHooks& hooks)
    {
        if (const auto problems = validate_scenario(spec); !problems.empty())
        {
            std::string all;
            for (const auto& p : problems)
            {
                all += (all.empty() ? "" : "; ") + p;
            }
            throw Error(ErrorCode::SchemaViolation, "invalid scenario: " + all);
        }

        hub::HubConfig hub_cfg = hub_config_for(spec);
        hub_cfg.record = true;
        hub::HubCore hub(hub_cfg);

        std::vector<agents::VehicleAgent> fleet;
        std::map<std::string, std::size_t> index;
        for (std::size_t i = 0; i < spec.platoon.size(); ++i)
        {
            const PlatoonEntry& e = spec.platoon[i];
            fleet.emplace_back(e.spec, spec.frames.transform(e.frame), spec.track, spec.imperfections_for(i));
            fleet.back().place(initial_arc(spec, i), spec.base_speed, 0.0);
            hub.register_vehicle(e.spec, e.frame);
            index[e.spec.vehicle_id] = i;
        }

        const auto host_cfg = host_config_for(spec);
        for (const auto& b : host_cfg.bindings)
        {
            hub.register_source(b.source_id);
            const auto channel = b.kind == controllers::BindingKind::Lateral ? hub::Channel::Lateral : hub::Channel::Longitudinal;
            hub.remap(b.source_id, b.vehicle_id, channel, false);
        }
        controllers::ControllerHost host(host_cfg);
        RunMonitor monitor(spec, "lockstep");
        Interlock interlock(spec);
        std::uint64_t engagements = 0;

        std::deque<InFlight> wire;
        const double dt = spec.dt();
        const double distance = spec.laps * spec.track.lap_length();
        bool truncated = false;

        const auto deliver = [&](const std::vector<hub::Dispatch>& ds) {
            for (const auto& d : ds)
            {
                fleet[index.at(d.instruction.target_vehicle_id)].receive(d.instruction);
            }
        };

        for (std::uint64_t k = 1;; ++k)
        {
            const double t = static_cast<double>(k) * dt;
            for (auto& a : fleet)
            {
                a.step(dt);
            }
            for (auto& a : fleet)
            {
                if (a.publish_due())
                {
                    wire.push_back({t + spec.network.state_delay, a.publish()});
                }
            }
            while (!wire.empty() && wire.front().deliver_at <= t + kTimeEps)
            {
                hub.ingest_state(wire.front().state, t);
                wire.pop_front();
            }

            const auto pool = hub.broadcast_pool(t);
            monitor.on_pool(pool);
            for (const auto& a : fleet)
            {
                monitor.on_truth(a.id(), a.truth_unified().arc_position);
            }

            for (std::size_t i = 1; i < fleet.size(); ++i)
            {
                if (!interlock.guarded(i))
                {
                    continue;
                }
                const auto gap = monitor.latest_gap(i);
                if (!gap)
                {
                    continue;
                }
                const auto& self = hub.pool().at(fleet[i].id()).unified;
                const auto& pred = hub.pool().at(fleet[i - 1].id()).unified;
                if (interlock.update(i, *gap, self.speed - pred.speed, fleet[i].spec().max_decel, dt))
                {
                    ++engagements;
                    spdlog::warn("interlock engaged on {} at t={:.2f} s (gap {:.2f} m)", fleet[i].id(), t, *gap);
                }
                fleet[i].set_interlock(interlock.engaged(i));
            }

            std::vector<hub::Dispatch> dispatched;
            for (const auto& instr : host.on_pool(pool))
            {
                if (auto d = hub.route_instruction(instr, t))
                {
                    dispatched.push_back(std::move(*d));
                }
            }
            auto held = hub.watchdog(t);
            dispatched.insert(dispatched.end(), held.begin(), held.end());
            deliver(dispatched);

            if (hooks.after_tick)
            {
                hooks.after_tick(hub, hub.tick(), dispatched);
            }

            if (monitor.head_odometer() >= distance - kTimeEps)
            {
                break;
            }
            if (t >= spec.max_sim_time - kTimeEps)
            {
                truncated = true;
                spdlog::warn("run truncated at max_sim_time {:.1f} s", spec.max_sim_time);
                break;
            }
        }

        LockstepResult out;
        out.report = monitor.finish(host.settled_at(), host.trigger_time(), hub.counters(), engagements, truncated);
        out.pool_log = hub.log();
        return out;
    }
} // namespace twinhub::scenario
