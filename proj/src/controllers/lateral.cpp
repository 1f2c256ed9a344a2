#include "twinhub/controllers/lateral.hpp"

#include "twinhub/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace twinhub::controllers
{
    void validate(const LateralParams& p)
    {
        if (!(p.lookahead_base > 0.0) || !(p.lookahead_gain >= 0.0) || !(p.wheelbase > 0.0) || !(p.max_angle > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "lateral params: lookahead_base, wheelbase, max_angle must be > 0 and lookahead_gain >= 0");
        }
    }

    double pure_pursuit_angle(double alpha, double wheelbase, double lookahead) noexcept
    {
        return std::atan(2.0 * wheelbase * std::sin(alpha) / lookahead);
    }

    double lateral_angle(const VehicleState& self, const Track& track, const LateralParams& p)
    {
        const double lookahead = p.lookahead_base + p.lookahead_gain * self.speed;
        const Point2 target = track.point_at(self.arc_position + lookahead);
        const double alpha = normalize_angle(std::atan2(target.y - self.pose.y, target.x - self.pose.x) - self.pose.heading);
        return std::clamp(pure_pursuit_angle(alpha, p.wheelbase, lookahead), -p.max_angle, p.max_angle);
    }
} // namespace twinhub::controllers
