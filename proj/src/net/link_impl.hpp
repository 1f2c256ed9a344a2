#pragma once

#include "twinhub/net/link.hpp"

#include <boost/asio/ip/tcp.hpp>

namespace twinhub::net::detail
{
    // Server side: wrap an accepted socket. The WebSocket variant performs
    // the upgrade handshake inside start().
    std::shared_ptr<Link> adopt_stream(boost::asio::ip::tcp::socket socket);
    std::shared_ptr<Link> adopt_socket(boost::asio::ip::tcp::socket socket);
} // namespace twinhub::net::detail
