#pragma once

#include "twinhub/core/track.hpp"
#include "twinhub/core/types.hpp"

namespace twinhub::controllers
{
    struct CaccParams
    {
        double k_p = 0.45; // 1/s^2
        double k_v1 = 1.0; // 1/s, head speed error
        double k_v2 = 2.0; // 1/s, predecessor speed error
        double d_des = 20.0;
        double a_min = -2.0;
        double a_max = 2.0;

        friend bool operator==(const CaccParams&, const CaccParams&) = default;
    };

    /// Throws SchemaViolation.
    void validate(const CaccParams& params);

    /// k_p (gap - d_des) + k_v1 (v_head - v_self) + k_v2 (v_pred - v_self), before clamping.
    double cacc_accel_unclamped(double gap, double v_self, double v_pred, double v_head, const CaccParams& params) noexcept;

    /// Desired acceleration for `self`, clamped to [a_min, a_max]. Gap is
    /// measured from self forward to the predecessor. Throws
    /// MissingPredecessor when either reference vehicle is absent.
    double cacc_accel(const VehicleState& self, const VehicleState* predecessor, const VehicleState* head, const CaccParams& params,
                      const Track& track, GapMode mode = GapMode::Arc);

    /// max(0, v_prev + a dt). Throws NonPositiveDt.
    double accel_to_speed_cmd(double accel, double v_prev, double dt);
} // namespace twinhub::controllers
