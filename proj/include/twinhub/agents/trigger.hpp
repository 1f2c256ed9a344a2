#pragma once

#include "twinhub/core/track.hpp"

#include <optional>
#include <string>

namespace twinhub::agents
{
    /// Fires exactly once, when the tracked arc position crosses a named
    /// point for the `lap`-th time after arming. Crossings are detected on the
    /// interval between consecutive updates, so a coarse step that jumps past
    /// the point still counts.
    class TriggerLatch
    {
    public:
        /// Throws UnknownNamedPoint.
        TriggerLatch(const Track& track, const std::string& point, int lap = 1);

        void arm() noexcept { armed_ = true; }
        bool armed() const noexcept { return armed_; }
        bool fired() const noexcept { return fired_; }

        /// True on the update that completes the designated crossing.
        bool update(double arc_position);

    private:
        double lap_length_;
        double point_arc_;
        int lap_;
        std::optional<double> last_arc_;
        int crossings_ = 0;
        bool armed_ = false;
        bool fired_ = false;
    };
} // namespace twinhub::agents
