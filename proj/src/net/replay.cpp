#include "twinhub/net/replay.hpp"

#include "twinhub/core/error.hpp"

#include <chrono>
#include <thread>

namespace twinhub::net
{
    std::vector<protocol::StatePoolPayload> pools_from_log(const std::vector<hub::PoolLogRow>& rows, const Track& track)
    {
        std::vector<protocol::StatePoolPayload> pools;
        for (const auto& row : rows)
        {
            if (pools.empty() || pools.back().tick != row.tick)
            {
                if (!pools.empty() && row.tick < pools.back().tick)
                {
                    throw Error(ErrorCode::BadLog, "tick " + std::to_string(row.tick) + " follows tick " + std::to_string(pools.back().tick));
                }
                pools.push_back({row.time, {}, row.tick});
            }
            VehicleState s;
            s.vehicle_id = row.vehicle_id;
            s.frame = FrameId::Unified;
            const Point2 p = track.point_at(row.arc_position);
            s.pose = {p.x, p.y, track.tangent_at(row.arc_position)};
            s.speed = row.speed;
            s.arc_position = track.wrap(row.arc_position);
            s.timestamp = row.time;
            s.seq = row.tick;
            pools.back().states.push_back(std::move(s));
        }
        return pools;
    }

    std::size_t replay_pools(const std::vector<protocol::StatePoolPayload>& pools, double speed_factor,
                             const std::function<void(const protocol::StatePoolPayload&)>& emit)
    {
        if (speed_factor < 0.0)
        {
            throw Error(ErrorCode::ConfigParse, "replay speed factor must be >= 0");
        }
        if (pools.empty())
        {
            return 0;
        }
        if (speed_factor == 0.0)
        {
            emit(pools.back());
            return 1;
        }
        using clock = std::chrono::steady_clock;
        const auto start = clock::now();
        const double t0 = pools.front().pool_timestamp;
        for (const auto& pool : pools)
        {
            const auto due = start + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>((pool.pool_timestamp - t0) / speed_factor));
            std::this_thread::sleep_until(due);
            emit(pool);
        }
        return pools.size();
    }
} // namespace twinhub::net
