#include "link_impl.hpp"

#include "twinhub/core/error.hpp"
#include "twinhub/protocol/codec.hpp"

#include <boost/asio/connect.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/write.hpp>
#include <boost/beast/core/buffers_to_string.hpp>
#include <boost/beast/core/flat_buffer.hpp>
#include <boost/beast/websocket.hpp>

#include <spdlog/spdlog.h>

#include <array>
#include <atomic>
#include <deque>

namespace twinhub::net
{
    namespace asio = boost::asio;
    namespace beast = boost::beast;
    namespace websocket = beast::websocket;
    using tcp = asio::ip::tcp;

    namespace
    {
        // Shared bookkeeping: outbound seq, inbound stale filter, handlers,
        // write queue. Derived classes supply the carrier.
        template <typename Derived>
        class LinkBase : public Link, public std::enable_shared_from_this<Derived>
        {
        public:
            void start(MessageHandler on_message, CloseHandler on_close) override
            {
                on_message_ = std::move(on_message);
                on_close_ = std::move(on_close);
                asio::post(self().executor(), [me = this->shared_from_this()] { me->begin(); });
            }

            void send(protocol::Payload payload, double timestamp) override
            {
                asio::post(self().executor(), [me = this->shared_from_this(), payload = std::move(payload), timestamp]() mutable {
                    me->enqueue(std::move(payload), timestamp);
                });
            }

            void close() override
            {
                asio::post(self().executor(), [me = this->shared_from_this()] { me->shutdown("closed locally"); });
            }

            bool open() const override { return open_; }
            std::size_t backlog() const override { return queued_bytes_; }
            void set_backlog_limit(std::size_t bytes) override { limit_ = bytes; }
            std::string peer() const override { return peer_; }

        protected:
            Derived& self() { return static_cast<Derived&>(*this); }

            void enqueue(protocol::Payload payload, double timestamp)
            {
                if (!open_)
                {
                    return;
                }
                protocol::MessageEnvelope env{seq_.next(), timestamp, std::move(payload)};
                std::string bytes;
                try
                {
                    bytes = self().encode(env);
                }
                catch (const Error& e)
                {
                    spdlog::error("{}: dropping unencodable {}: {}", peer_, protocol::to_string(env.type()), e.what());
                    return;
                }
                if (limit_ > 0 && queued_bytes_ + bytes.size() > limit_)
                {
                    shutdown("slow consumer: send backlog above " + std::to_string(limit_) + " bytes");
                    return;
                }
                queued_bytes_ += bytes.size();
                out_.push_back(std::move(bytes));
                if (out_.size() == 1)
                {
                    self().write_front();
                }
            }

            void written(const boost::system::error_code& ec)
            {
                if (ec)
                {
                    shutdown("write failed: " + ec.message());
                    return;
                }
                queued_bytes_ -= std::min<std::size_t>(queued_bytes_, out_.front().size());
                out_.pop_front();
                if (!out_.empty())
                {
                    self().write_front();
                }
            }

            void deliver(const protocol::MessageEnvelope& env)
            {
                if (!inbound_.accept(env.seq, peer_))
                {
                    return;
                }
                if (on_message_)
                {
                    on_message_(env);
                }
            }

            void shutdown(const std::string& why)
            {
                if (!open_.exchange(false))
                {
                    return;
                }
                self().close_carrier();
                queued_bytes_ = 0;
                if (auto cb = std::move(on_close_))
                {
                    cb(why);
                }
                on_message_ = nullptr;
            }

            std::atomic<bool> open_{true};
            std::string peer_;
            std::deque<std::string> out_;

        private:
            MessageHandler on_message_;
            CloseHandler on_close_;
            protocol::SeqCounter seq_;
            protocol::SeqTracker inbound_;
            std::atomic<std::size_t> queued_bytes_{0};
            std::size_t limit_ = 0;
        };

        std::string describe(const tcp::socket& s)
        {
            boost::system::error_code ec;
            const auto ep = s.remote_endpoint(ec);
            return ec ? std::string("unconnected") : ep.address().to_string() + ":" + std::to_string(ep.port());
        }

        class StreamLink final : public LinkBase<StreamLink>
        {
        public:
            explicit StreamLink(tcp::socket socket) : socket_(std::move(socket))
            {
                peer_ = describe(socket_);
                socket_.set_option(tcp::no_delay(true));
            }

            auto executor() { return socket_.get_executor(); }

            void begin() { read(); }

            std::string encode(const protocol::MessageEnvelope& env)
            {
                const auto bytes = protocol::encode(env);
                return std::string(bytes.begin(), bytes.end());
            }

            void write_front()
            {
                asio::async_write(socket_, asio::buffer(out_.front()),
                                  [me = shared_from_this()](const boost::system::error_code& ec, std::size_t) { me->written(ec); });
            }

            void close_carrier()
            {
                boost::system::error_code ignored;
                socket_.shutdown(tcp::socket::shutdown_both, ignored);
                socket_.close(ignored);
            }

        private:
            void read()
            {
                socket_.async_read_some(asio::buffer(buf_), [me = shared_from_this()](const boost::system::error_code& ec, std::size_t n) {
                    me->on_read(ec, n);
                });
            }

            void on_read(const boost::system::error_code& ec, std::size_t n)
            {
                if (ec)
                {
                    shutdown(ec == asio::error::eof ? "peer closed" : "read failed: " + ec.message());
                    return;
                }
                decoder_.feed(std::span<const std::uint8_t>(buf_.data(), n));
                try
                {
                    while (open_)
                    {
                        auto env = decoder_.next();
                        if (!env)
                        {
                            break;
                        }
                        deliver(*env);
                    }
                }
                catch (const Error& e)
                {
                    // The stream cannot be resynchronized after a bad frame.
                    spdlog::warn("{}: {}", peer_, e.what());
                    shutdown(std::string("protocol error: ") + e.what());
                    return;
                }
                if (open_)
                {
                    read();
                }
            }

            tcp::socket socket_;
            std::array<std::uint8_t, 16384> buf_{};
            protocol::FrameDecoder decoder_;
        };

        class SocketLink final : public LinkBase<SocketLink>
        {
        public:
            SocketLink(websocket::stream<tcp::socket> ws, bool accept) : ws_(std::move(ws)), accept_(accept)
            {
                peer_ = describe(ws_.next_layer());
                ws_.text(true);
                ws_.read_message_max(protocol::kMaxBodyBytes);
            }

            auto executor() { return ws_.get_executor(); }

            void begin()
            {
                if (!accept_)
                {
                    read();
                    return;
                }
                ws_.async_accept([me = shared_from_this()](const boost::system::error_code& ec) {
                    if (ec)
                    {
                        me->shutdown("websocket handshake failed: " + ec.message());
                        return;
                    }
                    me->read();
                });
            }

            std::string encode(const protocol::MessageEnvelope& env) { return protocol::encode_body(env); }

            void write_front()
            {
                ws_.async_write(asio::buffer(out_.front()),
                                [me = shared_from_this()](const boost::system::error_code& ec, std::size_t) { me->written(ec); });
            }

            void close_carrier()
            {
                boost::system::error_code ignored;
                ws_.next_layer().shutdown(tcp::socket::shutdown_both, ignored);
                ws_.next_layer().close(ignored);
            }

        private:
            void read()
            {
                ws_.async_read(buffer_, [me = shared_from_this()](const boost::system::error_code& ec, std::size_t) { me->on_read(ec); });
            }

            void on_read(const boost::system::error_code& ec)
            {
                if (ec)
                {
                    shutdown(ec == websocket::error::closed ? "peer closed" : "read failed: " + ec.message());
                    return;
                }
                const std::string body = beast::buffers_to_string(buffer_.data());
                buffer_.consume(buffer_.size());
                try
                {
                    deliver(protocol::decode_body(body));
                }
                catch (const Error& e)
                {
                    // Each text frame is self-contained, so one bad message
                    // does not poison the connection.
                    spdlog::warn("{}: {}", peer_, e.what());
                }
                if (open_)
                {
                    read();
                }
            }

            websocket::stream<tcp::socket> ws_;
            bool accept_;
            beast::flat_buffer buffer_;
        };

        tcp::socket dial(asio::io_context& io, const Endpoint& endpoint)
        {
            tcp::resolver resolver(io);
            tcp::socket socket(io);
            boost::system::error_code ec;
            const auto results = resolver.resolve(endpoint.host, std::to_string(endpoint.port), ec);
            if (!ec)
            {
                asio::connect(socket, results, ec);
            }
            if (ec)
            {
                throw Error(ErrorCode::IoFailure, "cannot connect to " + endpoint.str() + ": " + ec.message());
            }
            return socket;
        }
    } // namespace

    std::shared_ptr<Link> connect_stream(asio::io_context& io, const Endpoint& endpoint)
    {
        return std::make_shared<StreamLink>(dial(io, endpoint));
    }

    std::shared_ptr<Link> connect_socket(asio::io_context& io, const Endpoint& endpoint)
    {
        websocket::stream<tcp::socket> ws(dial(io, endpoint));
        boost::system::error_code ec;
        ws.handshake(endpoint.host, "/", ec);
        if (ec)
        {
            throw Error(ErrorCode::IoFailure, "websocket handshake with " + endpoint.str() + " failed: " + ec.message());
        }
        return std::make_shared<SocketLink>(std::move(ws), false);
    }

    namespace detail
    {
        std::shared_ptr<Link> adopt_stream(tcp::socket socket) { return std::make_shared<StreamLink>(std::move(socket)); }

        std::shared_ptr<Link> adopt_socket(tcp::socket socket)
        {
            return std::make_shared<SocketLink>(websocket::stream<tcp::socket>(std::move(socket)), true);
        }
    } // namespace detail
} // namespace twinhub::net
