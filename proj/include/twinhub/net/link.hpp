#pragma once

#include "twinhub/net/endpoint.hpp"
#include "twinhub/protocol/messages.hpp"

#include <boost/asio/io_context.hpp>

#include <functional>
#include <memory>

namespace twinhub::net
{
    /// Client side of one stream connection. Handlers run on the io thread;
    /// send() and close() may be called from any thread.
    class Link
    {
    public:
        using MessageHandler = std::function<void(const protocol::MessageEnvelope&)>;
        using CloseHandler = std::function<void(const std::string& why)>;

        virtual ~Link() = default;

        virtual void start(MessageHandler on_message, CloseHandler on_close) = 0;
        virtual void send(protocol::Payload payload, double timestamp) = 0;
        virtual void close() = 0;
        virtual bool open() const = 0;

        /// Bytes queued but not yet written.
        virtual std::size_t backlog() const = 0;
        /// Sends that would push the backlog above `bytes` close the link
        /// instead (slow consumer). 0 disables the limit.
        virtual void set_backlog_limit(std::size_t bytes) = 0;
        virtual std::string peer() const = 0;
    };

    /// Length-prefixed frames over TCP. Throws IoFailure when the connection
    /// cannot be made.
    std::shared_ptr<Link> connect_stream(boost::asio::io_context& io, const Endpoint& endpoint);

    /// JSON text frames over a WebSocket (the browser carrier).
    std::shared_ptr<Link> connect_socket(boost::asio::io_context& io, const Endpoint& endpoint);
} // namespace twinhub::net
