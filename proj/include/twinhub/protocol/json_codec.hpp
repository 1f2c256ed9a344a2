#pragma once

#include "twinhub/core/types.hpp"
#include "twinhub/protocol/messages.hpp"

#include <json.hpp>

#include <string>

namespace twinhub::protocol
{
    using Json = nlohmann::json;

    // Field-level (de)serialization shared by the wire codec and config loaders.
    // Readers throw Error(SchemaViolation) naming the offending field path;
    // unknown fields are ignored.

    Json to_json(const VehicleState& state);
    Json to_json(const ControlInstruction& instr);
    Json to_json(const VehicleSpec& spec);
    Json to_json(const MessageEnvelope& envelope);

    VehicleState state_from_json(const Json& j, const std::string& path);
    ControlInstruction instruction_from_json(const Json& j, const std::string& path);
    VehicleSpec spec_from_json(const Json& j, const std::string& path);
    MessageEnvelope envelope_from_json(const Json& j);
} // namespace twinhub::protocol
