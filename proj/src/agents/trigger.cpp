#include "twinhub/agents/trigger.hpp"

#include "twinhub/core/error.hpp"

#include <cmath>

namespace twinhub::agents
{
    TriggerLatch::TriggerLatch(const Track& track, const std::string& point, int lap)
        : lap_length_(track.lap_length()), point_arc_(track.named_point(point)), lap_(lap)
    {
        if (lap < 1)
        {
            throw Error(ErrorCode::SchemaViolation, "trigger lap must be >= 1");
        }
    }

    bool TriggerLatch::update(double arc)
    {
        const auto wrap = [this](double a) {
            const double r = std::fmod(a, lap_length_);
            return r < 0.0 ? r + lap_length_ : r;
        };
        if (!last_arc_)
        {
            last_arc_ = arc;
            return false;
        }
        const double moved = wrap(arc - *last_arc_);
        // Backward jitter shows up as a near-full-lap move. Keep the
        // high-water mark so noise around the point cannot count twice.
        if (moved >= 0.5 * lap_length_)
        {
            return false;
        }
        const double to_point = wrap(point_arc_ - *last_arc_);
        last_arc_ = arc;
        if (!armed_ || fired_ || !(to_point > 0.0 && to_point <= moved))
        {
            return false;
        }
        if (++crossings_ == lap_)
        {
            fired_ = true;
            return true;
        }
        return false;
    }
} // namespace twinhub::agents
