#pragma once

#include "twinhub/controllers/controller_host.hpp"
#include "twinhub/hub/hub_core.hpp"
#include "twinhub/scenario/scenario_spec.hpp"

#include <functional>

namespace twinhub::scenario
{
    hub::HubConfig hub_config_for(const ScenarioSpec& spec);

    /// Unified arc where platoon member `index` starts: the head at point A,
    /// followers spaced by the initial gaps behind it.
    double initial_arc(const ScenarioSpec& spec, std::size_t index);

    /// Lateral plus longitudinal bindings for every vehicle.
    std::vector<controllers::Binding> bindings_for(const ScenarioSpec& spec);

    /// Host configuration for the bindings accepted by `keep`.
    controllers::ControllerHostConfig host_config_for(const ScenarioSpec& spec,
                                                      const std::function<bool(const controllers::Binding&)>& keep = {});

    /// Actuator lag of the head's speed loop, for the profile executor.
    double head_actuator_tau(const ScenarioSpec& spec);
} // namespace twinhub::scenario
