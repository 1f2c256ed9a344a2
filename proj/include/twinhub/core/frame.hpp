#pragma once

#include "twinhub/core/types.hpp"

#include <map>

namespace twinhub
{
    inline constexpr double kDefaultPhysicalScale = 14.0;

    /// Maps lengths and speeds of one environment frame into the unified
    /// full-scale frame by a pure scale factor.
    struct FrameTransform
    {
        FrameId frame = FrameId::Unified;
        double scale_to_unified = 1.0;

        friend bool operator==(const FrameTransform&, const FrameTransform&) = default;
    };

    /// Scale factors for every frame. Unified is pinned to 1.0.
    class FrameTable
    {
    public:
        FrameTable();

        /// Throws SchemaViolation for a non-positive scale or for changing Unified.
        void set_scale(FrameId frame, double scale);
        double scale(FrameId frame) const;
        FrameTransform transform(FrameId frame) const { return {frame, scale(frame)}; }

    private:
        std::map<FrameId, double> scales_;
    };

    VehicleState to_unified(const VehicleState& state, const FrameTransform& transform);
    VehicleState from_unified(const VehicleState& state, const FrameTransform& transform);

    // Angles are scale-free; only desired_speed is rescaled.
    ControlInstruction from_unified(const ControlInstruction& instr, const FrameTransform& transform);
    ControlInstruction to_unified(const ControlInstruction& instr, const FrameTransform& transform);
} // namespace twinhub
