#include "twinhub/protocol/codec.hpp"

#include "twinhub/core/error.hpp"
#include "twinhub/protocol/json_codec.hpp"

#include <spdlog/spdlog.h>

namespace twinhub::protocol
{
    std::string encode_body(const MessageEnvelope& envelope)
    {
        try
        {
            return to_json(envelope).dump();
        }
        catch (const nlohmann::json::type_error& e)
        {
            throw Error(ErrorCode::SchemaViolation, std::string("cannot serialize envelope: ") + e.what());
        }
    }

    std::vector<std::uint8_t> encode(const MessageEnvelope& envelope)
    {
        const std::string body = encode_body(envelope);
        if (body.size() > kMaxBodyBytes)
        {
            throw Error(ErrorCode::OversizeFrame, "encoded body exceeds 1 MiB");
        }
        const auto n = static_cast<std::uint32_t>(body.size());
        std::vector<std::uint8_t> frame;
        frame.reserve(kLengthPrefixBytes + body.size());
        frame.push_back(static_cast<std::uint8_t>(n >> 24));
        frame.push_back(static_cast<std::uint8_t>(n >> 16));
        frame.push_back(static_cast<std::uint8_t>(n >> 8));
        frame.push_back(static_cast<std::uint8_t>(n));
        frame.insert(frame.end(), body.begin(), body.end());
        return frame;
    }

    MessageEnvelope decode_body(std::string_view body)
    {
        if (body.empty())
        {
            throw Error(ErrorCode::MalformedFrame, "empty body");
        }
        Json doc;
        try
        {
            doc = Json::parse(body.begin(), body.end());
        }
        catch (const nlohmann::json::parse_error& e)
        {
            throw Error(ErrorCode::MalformedFrame, std::string("body is not valid JSON: ") + e.what());
        }
        return envelope_from_json(doc);
    }

    DecodeResult decode(std::span<const std::uint8_t> bytes)
    {
        if (bytes.size() < kLengthPrefixBytes)
        {
            return {};
        }
        const std::uint32_t n = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) | (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
        if (n > kMaxBodyBytes)
        {
            throw Error(ErrorCode::OversizeFrame, "announced body of " + std::to_string(n) + " bytes exceeds 1 MiB");
        }
        if (n == 0)
        {
            throw Error(ErrorCode::MalformedFrame, "zero-length body");
        }
        if (bytes.size() < kLengthPrefixBytes + n)
        {
            return {};
        }
        const auto* body = reinterpret_cast<const char*>(bytes.data() + kLengthPrefixBytes);
        return {decode_body(std::string_view(body, n)), kLengthPrefixBytes + n};
    }

    void FrameDecoder::feed(std::span<const std::uint8_t> bytes)
    {
        if (offset_ > 0 && offset_ >= buffer_.size() / 2)
        {
            buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
            offset_ = 0;
        }
        buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
    }

    void FrameDecoder::feed(std::string_view bytes)
    {
        feed(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    }

    std::optional<MessageEnvelope> FrameDecoder::next()
    {
        auto result = decode(std::span<const std::uint8_t>(buffer_).subspan(offset_));
        if (!result.envelope)
        {
            return std::nullopt;
        }
        offset_ += result.consumed;
        return std::move(result.envelope);
    }

    bool SeqTracker::accept(std::uint64_t seq, std::string_view connection_name)
    {
        if (last_ && seq <= *last_)
        {
            ++dropped_;
            spdlog::warn("dropping stale seq {} (last {}) on {}", seq, *last_, connection_name.empty() ? "connection" : connection_name);
            return false;
        }
        last_ = seq;
        return true;
    }
} // namespace twinhub::protocol
