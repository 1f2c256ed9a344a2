#pragma once

#include "twinhub/protocol/messages.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace twinhub::protocol
{
    inline constexpr std::size_t kLengthPrefixBytes = 4;
    inline constexpr std::size_t kMaxBodyBytes = 1u << 20; // 1 MiB

    /// Canonical JSON body: sorted keys, no insignificant whitespace, UTF-8.
    /// Throws SchemaViolation (non-finite numbers, invalid UTF-8).
    std::string encode_body(const MessageEnvelope& envelope);

    /// 4-byte big-endian body length followed by the canonical body.
    std::vector<std::uint8_t> encode(const MessageEnvelope& envelope);

    /// Parses one JSON body (as carried by the browser socket link).
    /// Throws MalformedFrame (not JSON) or SchemaViolation.
    MessageEnvelope decode_body(std::string_view body);

    struct DecodeResult
    {
        std::optional<MessageEnvelope> envelope;
        std::size_t consumed = 0; // 0 when the first frame is still incomplete
    };

    /// Decodes the first frame of `bytes`. A partial frame yields no envelope
    /// and zero consumed bytes. Throws OversizeFrame as soon as the prefix
    /// announces a body above 1 MiB, MalformedFrame, or SchemaViolation.
    DecodeResult decode(std::span<const std::uint8_t> bytes);

    /// Per-connection reassembly buffer for a byte stream.
    class FrameDecoder
    {
    public:
        void feed(std::span<const std::uint8_t> bytes);
        void feed(std::string_view bytes);

        /// Next complete envelope, if any. Errors propagate from decode();
        /// the offending bytes stay buffered, so the connection must be dropped.
        std::optional<MessageEnvelope> next();

        std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

    private:
        std::vector<std::uint8_t> buffer_;
        std::size_t offset_ = 0;
    };

    /// Drops envelopes whose seq does not strictly increase on a connection.
    class SeqTracker
    {
    public:
        /// True when `seq` is fresh; otherwise counts a drop and logs a warning.
        bool accept(std::uint64_t seq, std::string_view connection_name = {});
        std::uint64_t dropped() const noexcept { return dropped_; }
        std::optional<std::uint64_t> last() const noexcept { return last_; }

    private:
        std::optional<std::uint64_t> last_;
        std::uint64_t dropped_ = 0;
    };

    /// Monotone sequence source for one sender.
    class SeqCounter
    {
    public:
        std::uint64_t next() noexcept { return ++value_; }

    private:
        std::uint64_t value_ = 0;
    };
} // namespace twinhub::protocol
