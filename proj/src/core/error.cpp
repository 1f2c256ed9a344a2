#include "twinhub/core/error.hpp"

namespace twinhub
{
    std::string_view to_string(ErrorCode code) noexcept
    {
        switch (code)
        {
        case ErrorCode::FrameMismatch: return "FrameMismatch";
        case ErrorCode::NonPositiveDt: return "NonPositiveDt";
        case ErrorCode::EmptyTrack: return "EmptyTrack";
        case ErrorCode::InvalidTrack: return "InvalidTrack";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::MalformedFrame: return "MalformedFrame";
        case ErrorCode::OversizeFrame: return "OversizeFrame";
        case ErrorCode::UnknownVehicle: return "UnknownVehicle";
        case ErrorCode::UnknownSource: return "UnknownSource";
        case ErrorCode::UnknownTarget: return "UnknownTarget";
        case ErrorCode::UnmappedSource: return "UnmappedSource";
        case ErrorCode::ConflictingSource: return "ConflictingSource";
        case ErrorCode::DuplicateEntity: return "DuplicateEntity";
        case ErrorCode::StaleSeq: return "StaleSeq";
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::MissingPredecessor: return "MissingPredecessor";
        case ErrorCode::UnknownNamedPoint: return "UnknownNamedPoint";
        case ErrorCode::NoPerturbation: return "NoPerturbation";
        case ErrorCode::SettlingTimeout: return "SettlingTimeout";
        case ErrorCode::AgentLost: return "AgentLost";
        case ErrorCode::ConfigParse: return "ConfigParse";
        case ErrorCode::BadLog: return "BadLog";
        }
        return "Unknown";
    }

    std::optional<ErrorCode> parse_error_code(std::string_view text) noexcept
    {
        for (int i = 0; i <= static_cast<int>(ErrorCode::BadLog); ++i)
        {
            const auto code = static_cast<ErrorCode>(i);
            if (to_string(code) == text)
            {
                return code;
            }
        }
        return std::nullopt;
    }
} // namespace twinhub
