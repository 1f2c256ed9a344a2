#pragma once

#include "twinhub/core/track.hpp"
#include "twinhub/core/types.hpp"

namespace twinhub::controllers
{
    /// Pure pursuit with a speed-scheduled lookahead, standing in for a
    /// preview path tracker.
    struct LateralParams
    {
        double lookahead_base = 4.0; // m
        double lookahead_gain = 0.5; // s
        double wheelbase = 2.6;
        double max_angle = 0.52;

        friend bool operator==(const LateralParams&, const LateralParams&) = default;
    };

    /// Throws SchemaViolation.
    void validate(const LateralParams& params);

    double pure_pursuit_angle(double alpha, double wheelbase, double lookahead) noexcept;

    /// Steering angle toward the centerline point `lookahead` ahead of the
    /// vehicle's arc position, clamped to +-max_angle.
    double lateral_angle(const VehicleState& self, const Track& track, const LateralParams& params);
} // namespace twinhub::controllers
