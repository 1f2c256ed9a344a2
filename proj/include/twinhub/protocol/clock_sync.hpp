#pragma once

#include <cstddef>
#include <deque>
#include <optional>

namespace twinhub::protocol
{
    /// Estimates remote_clock -> local_clock offset from Heartbeat round trips
    /// (request/response midpoint). Among the most recent samples, the one
    /// with the smallest round trip wins, since queuing only ever adds delay.
    class ClockOffsetEstimator
    {
    public:
        explicit ClockOffsetEstimator(std::size_t window = 8) : window_(window) {}

        /// local_send/local_recv bracket the probe on the local clock;
        /// remote_time is the responder's stamp.
        void add_sample(double local_send, double remote_time, double local_recv);

        /// local_time = remote_time + offset
        std::optional<double> offset() const;
        std::optional<double> best_round_trip() const;

    private:
        struct Sample
        {
            double offset;
            double round_trip;
        };

        const Sample* best() const;

        std::size_t window_;
        std::deque<Sample> samples_;
    };
} // namespace twinhub::protocol
