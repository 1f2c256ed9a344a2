#pragma once

#include "twinhub/agents/head_profile.hpp"
#include "twinhub/agents/trigger.hpp"
#include "twinhub/core/track.hpp"

#include <optional>
#include <vector>

namespace twinhub::controllers
{
    struct SettleCriteria
    {
        double tolerance = 0.05; // fraction of d_des
        double hold = 10.0;      // s
        double timeout = 60.0;   // s

        friend bool operator==(const SettleCriteria&, const SettleCriteria&) = default;
    };

    /// Steady state: every follower gap within tolerance of d_des for `hold`
    /// seconds without interruption.
    class SettleMonitor
    {
    public:
        SettleMonitor(SettleCriteria criteria, double d_des);

        /// Returns true once settled (and stays true). Throws
        /// SettlingTimeout after `timeout` seconds from the first update.
        bool update(double t, const std::vector<double>& gaps);
        std::optional<double> settled_at() const noexcept { return settled_at_; }

    private:
        SettleCriteria criteria_;
        double d_des_;
        std::optional<double> start_;
        std::optional<double> in_band_since_;
        std::optional<double> settled_at_;
    };

    /// Longitudinal source of the head vehicle: base speed until the trigger
    /// fires, then the perturbation. The command leads the profile by the
    /// actuator time constant so a first-order lag lands on it.
    class HeadExecutor
    {
    public:
        HeadExecutor(agents::HeadProfile profile, const Track& track, double actuator_tau, double dt);

        void arm() noexcept { latch_.arm(); }
        bool armed() const noexcept { return latch_.armed(); }

        /// Feeds the head's pooled arc position at time t and returns the
        /// desired speed for the next tick.
        double update(double t, double head_arc);

        std::optional<double> trigger_time() const noexcept { return trigger_time_; }
        const agents::HeadProfile& profile() const noexcept { return profile_; }

    private:
        agents::HeadProfile profile_;
        agents::TriggerLatch latch_;
        double tau_;
        double dt_;
        std::optional<double> trigger_time_;
    };
} // namespace twinhub::controllers
