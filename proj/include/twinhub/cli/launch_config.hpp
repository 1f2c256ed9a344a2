#pragma once

#include "twinhub/net/endpoint.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace twinhub::cli
{
    enum class Role
    {
        Hub,
        Agent,
        Controller,
        Scenario,
    };

    std::string_view to_string(Role role) noexcept;

    /// Which bindings a controller process hosts.
    enum class BindingSet
    {
        All,
        Lateral,      // lateral plus the head profile
        Longitudinal, // everything else
    };

    /// One process's launch file. Relative paths resolve against the file.
    struct LaunchConfig
    {
        Role role = Role::Scenario;
        std::optional<net::Endpoint> hub;    // agent/controller: where to connect; hub: stream listen address
        std::optional<net::Endpoint> socket; // hub: WebSocket listen address
        std::optional<std::filesystem::path> scenario;
        std::string vehicle;  // agent
        BindingSet bindings = BindingSet::All;
        std::string entity_id; // controller; defaults from the binding set
        bool remap = true;     // controller: assign its own sources on start
        std::optional<std::uint64_t> seed;
        std::string mode = "lockstep"; // scenario
        double duration = 0.0;         // seconds; 0 = until the run (or the process) ends
        std::optional<std::filesystem::path> out;
        std::optional<std::filesystem::path> pool_log; // hub
    };

    /// Throws ConfigParse naming the offending key or value.
    LaunchConfig parse_launch_config(const std::string& text, const std::filesystem::path& base_dir = {});
    /// Throws ConfigParse, IoFailure.
    LaunchConfig load_launch_config(const std::filesystem::path& path);

    /// Documented process exit codes.
    inline constexpr int kExitOk = 0;
    inline constexpr int kExitConfig = 1;
    inline constexpr int kExitSettlingTimeout = 2;
    inline constexpr int kExitAgentLost = 3;
    inline constexpr int kExitIo = 4;
} // namespace twinhub::cli
