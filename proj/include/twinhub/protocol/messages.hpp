#pragma once

#include "twinhub/core/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace twinhub::protocol
{
    // Order matches the alternatives of Payload below.
    enum class MsgType
    {
        Register,
        RegisterAck,
        StateUpdate,
        StatePool,
        Instruction,
        InstructionDispatch,
        AdminCommand,
        AdminAck,
        Heartbeat,
        Error,
    };

    enum class EntityKind
    {
        VehicleAgent,
        Controller,
        DriverStation,
        Observer,
        Admin,
    };

    enum class Channel
    {
        Lateral,
        Longitudinal,
        Both,
    };

    std::string_view to_string(MsgType type) noexcept;
    std::string_view to_string(EntityKind kind) noexcept;
    std::string_view to_string(Channel channel) noexcept;
    std::optional<MsgType> parse_msg_type(std::string_view text) noexcept;
    std::optional<EntityKind> parse_entity_kind(std::string_view text) noexcept;
    std::optional<Channel> parse_channel(std::string_view text) noexcept;

    struct RegisterPayload
    {
        EntityKind entity_kind = EntityKind::Observer;
        std::string entity_id;
        std::optional<FrameId> frame;          // VehicleAgent only
        std::vector<std::string> capabilities; // free-form flags
        std::optional<VehicleSpec> vehicle;    // VehicleAgent only
        std::vector<std::string> sources;      // control sources owned by a Controller/DriverStation

        friend bool operator==(const RegisterPayload&, const RegisterPayload&) = default;
    };

    struct RegisterAckPayload
    {
        std::string entity_id;
        bool accepted = false;
        std::string reason;
        double hub_time = 0.0;

        friend bool operator==(const RegisterAckPayload&, const RegisterAckPayload&) = default;
    };

    struct StateUpdatePayload
    {
        VehicleState state;

        friend bool operator==(const StateUpdatePayload&, const StateUpdatePayload&) = default;
    };

    struct StatePoolPayload
    {
        double pool_timestamp = 0.0;
        std::vector<VehicleState> states; // all in the Unified frame
        std::uint64_t tick = 0;

        friend bool operator==(const StatePoolPayload&, const StatePoolPayload&) = default;
    };

    struct InstructionPayload
    {
        ControlInstruction instruction;

        friend bool operator==(const InstructionPayload&, const InstructionPayload&) = default;
    };

    struct InstructionDispatchPayload
    {
        ControlInstruction instruction; // expressed in the target vehicle's frame
        std::uint64_t tick = 0;

        friend bool operator==(const InstructionDispatchPayload&, const InstructionDispatchPayload&) = default;
    };

    struct AdminCommandPayload
    {
        std::string command = "remap";
        std::string source_id;
        std::string vehicle_id;
        Channel channel = Channel::Both;
        bool force = false;

        friend bool operator==(const AdminCommandPayload&, const AdminCommandPayload&) = default;
    };

    struct AdminAckPayload
    {
        std::string command;
        bool ok = false;
        std::string error_code; // empty when ok
        std::string message;
        std::string source_id;
        std::string vehicle_id;

        friend bool operator==(const AdminAckPayload&, const AdminAckPayload&) = default;
    };

    /// Clock probe. The initiator stamps origin_time; the responder echoes it
    /// and adds its own reply_time.
    struct HeartbeatPayload
    {
        double origin_time = 0.0;
        std::optional<double> reply_time;

        friend bool operator==(const HeartbeatPayload&, const HeartbeatPayload&) = default;
    };

    struct ErrorPayload
    {
        std::string code;
        std::string message;

        friend bool operator==(const ErrorPayload&, const ErrorPayload&) = default;
    };

    using Payload = std::variant<RegisterPayload,
                                 RegisterAckPayload,
                                 StateUpdatePayload,
                                 StatePoolPayload,
                                 InstructionPayload,
                                 InstructionDispatchPayload,
                                 AdminCommandPayload,
                                 AdminAckPayload,
                                 HeartbeatPayload,
                                 ErrorPayload>;

    struct MessageEnvelope
    {
        std::uint64_t seq = 0;
        double timestamp = 0.0;
        Payload payload;

        MsgType type() const noexcept { return static_cast<MsgType>(payload.index()); }

        friend bool operator==(const MessageEnvelope&, const MessageEnvelope&) = default;
    };
} // namespace twinhub::protocol
