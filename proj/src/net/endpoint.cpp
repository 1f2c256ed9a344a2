#include "twinhub/net/endpoint.hpp"

#include "twinhub/core/error.hpp"

#include <charconv>
#include <chrono>

namespace twinhub::net
{
    Endpoint parse_endpoint(const std::string& text)
    {
        const auto colon = text.rfind(':');
        if (colon == std::string::npos)
        {
            throw Error(ErrorCode::ConfigParse, "endpoint '" + text + "' must look like host:port");
        }
        Endpoint e;
        if (colon > 0)
        {
            e.host = text.substr(0, colon);
        }
        unsigned port = 0;
        const char* first = text.data() + colon + 1;
        const char* last = text.data() + text.size();
        const auto [ptr, ec] = std::from_chars(first, last, port);
        if (ec != std::errc{} || ptr != last || first == last || port > 65535)
        {
            throw Error(ErrorCode::ConfigParse, "endpoint '" + text + "' has an invalid port");
        }
        e.port = static_cast<std::uint16_t>(port);
        return e;
    }

    double monotonic_seconds()
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
    }
} // namespace twinhub::net
