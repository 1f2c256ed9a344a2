#include "twinhub/protocol/clock_sync.hpp"

#include <algorithm>

namespace twinhub::protocol
{
    void ClockOffsetEstimator::add_sample(double local_send, double remote_time, double local_recv)
    {
        const double rtt = std::max(0.0, local_recv - local_send);
        samples_.push_back({0.5 * (local_send + local_recv) - remote_time, rtt});
        while (samples_.size() > window_)
        {
            samples_.pop_front();
        }
    }

    const ClockOffsetEstimator::Sample* ClockOffsetEstimator::best() const
    {
        if (samples_.empty())
        {
            return nullptr;
        }
        return &*std::min_element(samples_.begin(), samples_.end(), [](const Sample& a, const Sample& b) { return a.round_trip < b.round_trip; });
    }

    std::optional<double> ClockOffsetEstimator::offset() const
    {
        const Sample* s = best();
        return s ? std::optional<double>(s->offset) : std::nullopt;
    }

    std::optional<double> ClockOffsetEstimator::best_round_trip() const
    {
        const Sample* s = best();
        return s ? std::optional<double>(s->round_trip) : std::nullopt;
    }
} // namespace twinhub::protocol
