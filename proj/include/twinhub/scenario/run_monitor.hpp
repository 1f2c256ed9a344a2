#pragma once

#include "twinhub/protocol/messages.hpp"
#include "twinhub/scenario/report.hpp"
#include "twinhub/scenario/scenario_spec.hpp"

#include <map>

namespace twinhub::scenario
{
    /// Accumulates the per-vehicle series of a run from pool snapshots. Used
    /// identically by the lockstep and distributed runners.
    class RunMonitor
    {
    public:
        RunMonitor(const ScenarioSpec& spec, std::string mode);

        void on_pool(const protocol::StatePoolPayload& pool);
        /// Ground-truth arc for position-error statistics (lockstep).
        void on_truth(const std::string& vehicle_id, double unified_arc);

        /// Distance the head has covered according to the pool.
        double head_odometer() const noexcept { return head_odometer_; }
        /// Latest gap of platoon index i (>= 1), if known.
        std::optional<double> latest_gap(std::size_t index) const;
        std::size_t samples() const noexcept { return report_.time.size(); }

        /// Finalizes collisions and statistics.
        RunReport finish(std::optional<double> settled_at, std::optional<double> trigger_time, const hub::HubCounters& counters,
                         std::uint64_t interlock_engagements, bool truncated);

    private:
        const ScenarioSpec* spec_;
        RunReport report_;
        std::map<std::string, std::size_t> index_;
        std::vector<double> error_sum_;
        std::vector<std::size_t> error_n_;
        std::optional<double> last_head_arc_;
        double head_odometer_ = 0.0;
    };
} // namespace twinhub::scenario
