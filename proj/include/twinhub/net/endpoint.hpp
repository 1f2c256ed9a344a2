#pragma once

#include <cstdint>
#include <string>

namespace twinhub::net
{
    struct Endpoint
    {
        std::string host = "127.0.0.1";
        std::uint16_t port = 0;

        std::string str() const { return host + ":" + std::to_string(port); }
        friend bool operator==(const Endpoint&, const Endpoint&) = default;
    };

    /// "host:port" or ":port". Throws ConfigParse.
    Endpoint parse_endpoint(const std::string& text);

    /// Seconds on the process-wide monotonic clock.
    double monotonic_seconds();
} // namespace twinhub::net
