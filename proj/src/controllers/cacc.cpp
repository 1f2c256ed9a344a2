#include "twinhub/controllers/cacc.hpp"

#include "twinhub/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace twinhub::controllers
{
    void validate(const CaccParams& p)
    {
        if (!(p.k_p > 0.0 && p.k_v1 > 0.0 && p.k_v2 > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "CACC gains k_p, k_v1, k_v2 must be > 0");
        }
        if (!(p.a_min < 0.0 && p.a_max > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "CACC limits need a_min < 0 < a_max");
        }
        if (!(p.d_des > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "CACC d_des must be > 0");
        }
    }

    double cacc_accel_unclamped(double gap, double v_self, double v_pred, double v_head, const CaccParams& p) noexcept
    {
        return p.k_p * (gap - p.d_des) + p.k_v1 * (v_head - v_self) + p.k_v2 * (v_pred - v_self);
    }

    double cacc_accel(const VehicleState& self, const VehicleState* predecessor, const VehicleState* head, const CaccParams& params,
                      const Track& track, GapMode mode)
    {
        if (!predecessor || !head)
        {
            throw Error(ErrorCode::MissingPredecessor, "vehicle '" + self.vehicle_id + "' has no " + (predecessor ? "head" : "predecessor") + " state");
        }
        const double gap = gap_between(self, *predecessor, track, mode);
        const double a = cacc_accel_unclamped(gap, self.speed, predecessor->speed, head->speed, params);
        return std::clamp(a, params.a_min, params.a_max);
    }

    double accel_to_speed_cmd(double accel, double v_prev, double dt)
    {
        if (!(dt > 0.0))
        {
            throw Error(ErrorCode::NonPositiveDt, "accel_to_speed_cmd needs dt > 0");
        }
        return std::max(0.0, v_prev + accel * dt);
    }
} // namespace twinhub::controllers
