#pragma once

#include "twinhub/controllers/cacc.hpp"
#include "twinhub/controllers/head_executor.hpp"
#include "twinhub/controllers/lateral.hpp"
#include "twinhub/controllers/scripted_driver.hpp"
#include "twinhub/protocol/messages.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace twinhub::controllers
{
    enum class BindingKind
    {
        Lateral,
        Cacc,
        Scripted,
        Head,
    };

    std::string_view to_string(BindingKind kind) noexcept;

    /// One control source driving one vehicle.
    struct Binding
    {
        BindingKind kind = BindingKind::Lateral;
        std::string source_id;
        std::string vehicle_id;
        std::string predecessor_id; // Cacc, Scripted
        std::string head_id;        // Cacc
        ScriptedDriverParams driver;
    };

    struct HeadSetup
    {
        agents::HeadProfile profile;
        double actuator_tau = 0.0;
        SettleCriteria settle;
        double d_des = 20.0;
        std::vector<std::string> platoon_order; // head first
    };

    struct ControllerHostConfig
    {
        Track track = Track::stadium();
        GapMode gap_mode = GapMode::Arc;
        double dt = 0.02;
        CaccParams cacc;
        LateralParams lateral;
        std::vector<Binding> bindings;
        std::optional<HeadSetup> head; // required when a Head binding exists
    };

    /// Runs any number of bindings over pool snapshots. Each binding keeps
    /// its own history; nothing is shared between vehicles.
    class ControllerHost
    {
    public:
        explicit ControllerHost(ControllerHostConfig config);

        /// Instructions (unified frame) for this pool. Bindings whose vehicle
        /// or references are missing from the pool are skipped for the tick.
        /// Throws SettlingTimeout from the head binding.
        std::vector<ControlInstruction> on_pool(const protocol::StatePoolPayload& pool);

        std::vector<std::string> source_ids() const;
        const std::vector<Binding>& bindings() const noexcept { return config_.bindings; }

        std::optional<double> trigger_time() const;
        std::optional<double> settled_at() const;
        std::uint64_t skipped() const noexcept { return skipped_; }

    private:
        ControllerHostConfig config_;
        std::map<std::string, ScriptedDriver> drivers_;
        std::map<std::string, std::uint64_t> seq_;
        std::unique_ptr<HeadExecutor> head_exec_;
        std::unique_ptr<SettleMonitor> settle_;
        std::uint64_t skipped_ = 0;
    };
} // namespace twinhub::controllers
