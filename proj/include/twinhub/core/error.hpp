#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace twinhub
{
    enum class ErrorCode
    {
        FrameMismatch,
        NonPositiveDt,
        EmptyTrack,
        InvalidTrack,
        SchemaViolation,
        MalformedFrame,
        OversizeFrame,
        UnknownVehicle,
        UnknownSource,
        UnknownTarget,
        UnmappedSource,
        ConflictingSource,
        DuplicateEntity,
        StaleSeq,
        IoFailure,
        MissingPredecessor,
        UnknownNamedPoint,
        NoPerturbation,
        SettlingTimeout,
        AgentLost,
        ConfigParse,
        BadLog,
    };

    std::string_view to_string(ErrorCode code) noexcept;
    std::optional<ErrorCode> parse_error_code(std::string_view text) noexcept;

    // Single exception type for the library; the code identifies the contract
    // that was violated.
    class Error : public std::runtime_error
    {
    public:
        Error(ErrorCode code, const std::string& message)
            : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
        {
        }

        ErrorCode code() const noexcept { return code_; }

    private:
        ErrorCode code_;
    };
} // namespace twinhub
