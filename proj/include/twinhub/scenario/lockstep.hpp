#pragma once

#include "twinhub/hub/hub_core.hpp"
#include "twinhub/scenario/report.hpp"
#include "twinhub/scenario/scenario_spec.hpp"

#include <functional>

namespace twinhub::scenario
{
    struct LockstepHooks
    {
        /// Called after dispatching each tick; tests use it to inject admin
        /// commands (hot-swap) or inspect dispatches.
        std::function<void(hub::HubCore&, std::uint64_t tick, const std::vector<hub::Dispatch>&)> after_tick;
    };

    struct LockstepResult
    {
        RunReport report;
        std::vector<hub::PoolLogRow> pool_log;
    };

    /// Single-threaded deterministic run on a virtual clock. Each tick:
    /// agents step -> hub ingest -> broadcast -> controllers -> dispatch ->
    /// watchdog. Ends when the head has covered `laps` laps. Throws
    /// SettlingTimeout and every configuration error.
    LockstepResult run_lockstep(const ScenarioSpec& spec, const LockstepHooks& hooks = {});

    /// Source ids used by the harness.
    std::string lateral_source_id(const std::string& vehicle_id);
    std::string longitudinal_source_id(const PlatoonEntry& entry);
} // namespace twinhub::scenario
