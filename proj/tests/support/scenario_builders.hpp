#pragma once

#include "twinhub/scenario/scenario_spec.hpp"

#include <fmt/format.h>

namespace twinhub::testkit
{
    inline agents::PerturbationSpec scenario_a() { return {agents::HalfSine{}, "C", 1}; }
    inline agents::PerturbationSpec scenario_b() { return {agents::Brake{}, "D", 1}; }

    inline scenario::PlatoonEntry head_entry(VehicleKind kind = VehicleKind::Virtual)
    {
        scenario::PlatoonEntry h;
        h.spec.vehicle_id = "h";
        h.spec.kind = kind;
        h.spec.role = VehicleRole::Head;
        h.source = scenario::SourceKind::HeadProfile;
        h.frame = default_frame(kind);
        if (kind == VehicleKind::EmulatedPhysical)
        {
            h.imperfections = agents::ImperfectionModel{};
        }
        return h;
    }

    /// Noise-free head plus n identical followers f1..fn.
    inline scenario::ScenarioSpec chain_spec(scenario::SourceKind source, int n, const controllers::ScriptedDriverParams& driver = {},
                                             std::optional<agents::PerturbationSpec> perturbation = scenario_a())
    {
        scenario::ScenarioSpec s;
        s.name = "chain";
        s.laps = 2;
        s.perturbation = std::move(perturbation);
        s.platoon.push_back(head_entry());
        for (int i = 1; i <= n; ++i)
        {
            scenario::PlatoonEntry e;
            e.spec.vehicle_id = fmt::format("f{}", i);
            e.spec.role = source == scenario::SourceKind::Cacc ? VehicleRole::CAV : VehicleRole::HDV;
            e.source = source;
            e.driver = driver;
            s.platoon.push_back(e);
        }
        return s;
    }

    /// Zero-imperfection head alone on the track.
    inline scenario::ScenarioSpec head_only(std::optional<agents::PerturbationSpec> perturbation, int laps = 1)
    {
        scenario::ScenarioSpec s;
        s.name = "head_only";
        s.laps = laps;
        s.perturbation = std::move(perturbation);
        s.platoon.push_back(head_entry(VehicleKind::EmulatedPhysical));
        return s;
    }
} // namespace twinhub::testkit
