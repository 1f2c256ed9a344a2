#pragma once

#include "twinhub/net/hub_server.hpp"
#include "twinhub/scenario/report.hpp"
#include "twinhub/scenario/scenario_spec.hpp"

#include <optional>

namespace twinhub::net
{
    struct DistributedOptions
    {
        std::optional<Endpoint> hub; // external hub; an in-process one is started when absent
        double duration = 0.0;       // wall seconds; 0 runs the scenario's laps
        double connect_timeout = 5.0;
    };

    struct DistributedResult
    {
        scenario::RunReport report;
        std::optional<HubStats> hub; // in-process hub only
    };

    /// Runs a scenario over real sockets on the wall clock: every vehicle is
    /// an AgentClient, lateral+head bindings and the remaining longitudinal
    /// bindings run in two ControllerClients, and the runner assigns sources
    /// through AdminCommands. Throws SettlingTimeout, AgentLost, IoFailure.
    DistributedResult run_distributed(const scenario::ScenarioSpec& spec, const DistributedOptions& options = {});
} // namespace twinhub::net
