#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace twinhub::hub
{
    /// One vehicle in one broadcast. gap_to_predecessor is empty for the
    /// first vehicle of the platoon order.
    struct PoolLogRow
    {
        std::uint64_t tick = 0;
        double time = 0.0;
        std::string vehicle_id;
        double arc_position = 0.0;
        double speed = 0.0;
        std::string frame;
        std::optional<double> gap_to_predecessor;

        friend bool operator==(const PoolLogRow&, const PoolLogRow&) = default;
    };

    inline constexpr const char* kPoolLogHeader = "tick,time,vehicle_id,arc_position,speed,frame,gap_to_predecessor";

    /// Throws IoFailure. Floats are written with 17 significant digits.
    std::size_t write_pool_log(const std::filesystem::path& path, const std::vector<PoolLogRow>& rows);
    /// Throws BadLog (wrong header, bad field, non-monotone tick) or IoFailure.
    std::vector<PoolLogRow> read_pool_log(const std::filesystem::path& path);
} // namespace twinhub::hub
