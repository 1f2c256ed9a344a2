#include "twinhub/scenario/assembly.hpp"

#include "twinhub/scenario/lockstep.hpp"

namespace twinhub::scenario
{
    hub::HubConfig hub_config_for(const ScenarioSpec& spec)
    {
        hub::HubConfig c;
        c.tick_hz = spec.tick_hz;
        c.frames = spec.frames;
        c.max_front_wheel_angle = spec.lateral.max_angle;
        c.delay_compensation = spec.network.delay_compensation;
        c.gap_mode = spec.gap_mode;
        c.platoon_order = spec.vehicle_ids();
        c.track = spec.track;
        return c;
    }

    double initial_arc(const ScenarioSpec& spec, std::size_t index)
    {
        double arc = spec.track.named_point("A");
        for (std::size_t i = 1; i <= index; ++i)
        {
            arc -= spec.initial_gap(i);
        }
        return spec.track.wrap(arc);
    }

    std::string lateral_source_id(const std::string& vehicle_id) { return "lane/" + vehicle_id; }

    std::string longitudinal_source_id(const PlatoonEntry& e)
    {
        switch (e.source)
        {
        case SourceKind::HeadProfile: return "head/" + e.spec.vehicle_id;
        case SourceKind::Cacc: return "cacc/" + e.spec.vehicle_id;
        case SourceKind::Scripted:
        case SourceKind::Human: return "driver/" + e.spec.vehicle_id;
        }
        return "unknown/" + e.spec.vehicle_id;
    }

    std::vector<controllers::Binding> bindings_for(const ScenarioSpec& spec)
    {
        using controllers::Binding;
        using controllers::BindingKind;
        std::vector<Binding> out;
        for (std::size_t i = 0; i < spec.platoon.size(); ++i)
        {
            const PlatoonEntry& e = spec.platoon[i];
            const std::string& id = e.spec.vehicle_id;
            out.push_back(Binding{BindingKind::Lateral, lateral_source_id(id), id, {}, {}, {}});

            Binding lon;
            lon.source_id = longitudinal_source_id(e);
            lon.vehicle_id = id;
            if (i > 0)
            {
                lon.predecessor_id = spec.platoon[i - 1].spec.vehicle_id;
                lon.head_id = spec.platoon.front().spec.vehicle_id;
            }
            switch (e.source)
            {
            case SourceKind::HeadProfile: lon.kind = BindingKind::Head; break;
            case SourceKind::Cacc: lon.kind = BindingKind::Cacc; break;
            case SourceKind::Scripted:
            case SourceKind::Human:
                lon.kind = BindingKind::Scripted;
                lon.driver = e.driver;
                break;
            }
            out.push_back(std::move(lon));
        }
        return out;
    }

    double head_actuator_tau(const ScenarioSpec& spec)
    {
        if (spec.platoon.empty())
        {
            return 0.0;
        }
        const PlatoonEntry& head = spec.platoon.front();
        return head.spec.kind == VehicleKind::EmulatedPhysical ? spec.imperfections_for(0).actuation_lag_tau : head.spec.actuator_tau;
    }

    controllers::ControllerHostConfig host_config_for(const ScenarioSpec& spec, const std::function<bool(const controllers::Binding&)>& keep)
    {
        controllers::ControllerHostConfig c;
        c.track = spec.track;
        c.gap_mode = spec.gap_mode;
        c.dt = spec.dt();
        c.cacc = spec.cacc;
        c.lateral = spec.lateral;
        for (auto& b : bindings_for(spec))
        {
            if (!keep || keep(b))
            {
                if (b.kind == controllers::BindingKind::Head)
                {
                    c.head = controllers::HeadSetup{spec.head_profile(), head_actuator_tau(spec), spec.settle, spec.cacc.d_des, spec.vehicle_ids()};
                }
                c.bindings.push_back(std::move(b));
            }
        }
        return c;
    }
} // namespace twinhub::scenario
