#pragma once

#include "twinhub/core/track.hpp"
#include "twinhub/hub/pool_log.hpp"
#include "twinhub/net/hub_server.hpp"
#include "twinhub/protocol/messages.hpp"

#include <functional>

namespace twinhub::net
{
    /// Rebuilds one pool per logged tick. Poses are placed on the track at
    /// the logged arc position. Throws BadLog on non-increasing ticks.
    std::vector<protocol::StatePoolPayload> pools_from_log(const std::vector<hub::PoolLogRow>& rows, const Track& track);

    /// Emits the pools at `speed_factor` x the logged pace through `emit`.
    /// Factor 0 emits only the final pool. Returns the number emitted.
    std::size_t replay_pools(const std::vector<protocol::StatePoolPayload>& pools, double speed_factor,
                             const std::function<void(const protocol::StatePoolPayload&)>& emit);
} // namespace twinhub::net
