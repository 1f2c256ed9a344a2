#include "twinhub/protocol/messages.hpp"

#include <array>

namespace twinhub::protocol
{
    namespace
    {
        constexpr std::array<std::string_view, 10> kMsgTypeNames{
            "Register", "RegisterAck", "StateUpdate", "StatePool", "Instruction",
            "InstructionDispatch", "AdminCommand", "AdminAck", "Heartbeat", "Error"};
        constexpr std::array<std::string_view, 5> kEntityKindNames{"VehicleAgent", "Controller", "DriverStation", "Observer", "Admin"};
        constexpr std::array<std::string_view, 3> kChannelNames{"lateral", "longitudinal", "both"};

        template <typename Enum, std::size_t N>
        std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view text)
        {
            for (std::size_t i = 0; i < N; ++i)
            {
                if (names[i] == text)
                {
                    return static_cast<Enum>(i);
                }
            }
            return std::nullopt;
        }
    } // namespace

    std::string_view to_string(MsgType type) noexcept { return kMsgTypeNames[static_cast<std::size_t>(type)]; }
    std::string_view to_string(EntityKind kind) noexcept { return kEntityKindNames[static_cast<std::size_t>(kind)]; }
    std::string_view to_string(Channel channel) noexcept { return kChannelNames[static_cast<std::size_t>(channel)]; }

    std::optional<MsgType> parse_msg_type(std::string_view text) noexcept { return lookup<MsgType>(kMsgTypeNames, text); }
    std::optional<EntityKind> parse_entity_kind(std::string_view text) noexcept { return lookup<EntityKind>(kEntityKindNames, text); }
    std::optional<Channel> parse_channel(std::string_view text) noexcept { return lookup<Channel>(kChannelNames, text); }
} // namespace twinhub::protocol
