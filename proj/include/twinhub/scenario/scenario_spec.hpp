#pragma once

#include "twinhub/agents/head_profile.hpp"
#include "twinhub/agents/vehicle_agent.hpp"
#include "twinhub/controllers/cacc.hpp"
#include "twinhub/controllers/head_executor.hpp"
#include "twinhub/controllers/lateral.hpp"
#include "twinhub/controllers/scripted_driver.hpp"
#include "twinhub/core/frame.hpp"
#include "twinhub/core/track.hpp"
#include "twinhub/core/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace twinhub::scenario
{
    enum class SourceKind
    {
        Cacc,
        Scripted,
        Human, // scripted driver in automated runs, a live driver station otherwise
        HeadProfile,
    };

    std::string_view to_string(SourceKind kind) noexcept;
    std::optional<SourceKind> parse_source_kind(std::string_view text) noexcept;

    struct PlatoonEntry
    {
        VehicleSpec spec;
        SourceKind source = SourceKind::Cacc;
        FrameId frame = FrameId::Virtual;
        std::string driver_preset = "default";
        controllers::ScriptedDriverParams driver; // resolved from the preset unless given explicitly
        std::optional<agents::ImperfectionModel> imperfections; // EmulatedPhysical defaults when absent
    };

    struct NetworkSpec
    {
        double state_delay = 0.0; // injected agent -> hub latency, lockstep only
        bool delay_compensation = true;
    };

    struct ScenarioSpec
    {
        std::string name = "scenario";
        std::uint64_t seed = 1;
        std::string track_ref = "stadium";
        Track track = Track::stadium();
        double tick_hz = 50.0;
        double base_speed = 2.8;
        std::vector<double> initial_gaps; // one per follower; d_des when empty
        std::vector<PlatoonEntry> platoon;
        std::optional<agents::PerturbationSpec> perturbation;
        int laps = 4;
        double collision_threshold = 4.6;
        bool interlock = true;
        double interlock_margin = 0.5;
        GapMode gap_mode = GapMode::Arc;
        controllers::CaccParams cacc;
        controllers::LateralParams lateral;
        controllers::SettleCriteria settle;
        NetworkSpec network;
        FrameTable frames;
        double max_sim_time = 1200.0;

        double dt() const { return 1.0 / tick_hz; }
        agents::HeadProfile head_profile() const { return {base_speed, perturbation}; }
        /// Gap ahead of follower i (1-based platoon index).
        double initial_gap(std::size_t follower_index) const;
        agents::ImperfectionModel imperfections_for(std::size_t index) const;
        std::vector<std::string> vehicle_ids() const;
    };

    /// Parses a scenario document. Unknown keys, wrong types and syntax
    /// errors raise ConfigParse naming the field (and line/column for syntax).
    /// `base_dir` resolves relative track files.
    ScenarioSpec scenario_from_json_text(const std::string& text, const std::filesystem::path& base_dir = {});
    ScenarioSpec load_scenario(const std::filesystem::path& path);

    /// Every static invariant violation, one message each; empty when valid.
    std::vector<std::string> validate_scenario(const ScenarioSpec& spec);
} // namespace twinhub::scenario
