#pragma once

#include "twinhub/core/types.hpp"
#include "twinhub/hub/hub_core.hpp"
#include "twinhub/scenario/scenario_spec.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace twinhub::scenario
{
    struct CollisionEvent
    {
        std::string follower;
        std::string leader;
        double start_time = 0.0;
        std::optional<double> end_time; // open when the run ended below threshold
        double min_gap = 0.0;
        double min_gap_time = 0.0;
        bool virtual_involved = false;

        friend bool operator==(const CollisionEvent&, const CollisionEvent&) = default;
    };

    struct VehicleSeries
    {
        std::string vehicle_id;
        VehicleKind kind = VehicleKind::Virtual;
        VehicleRole role = VehicleRole::CAV;
        SourceKind source = SourceKind::Cacc;
        FrameId frame = FrameId::Virtual;
        std::vector<double> arc;
        std::vector<double> speed;
        std::vector<std::optional<double>> gap; // to predecessor; empty optional for the head
        std::optional<double> mean_position_error; // vs ground truth, lockstep only
    };

    struct RunReport
    {
        std::string scenario;
        std::string mode;
        std::uint64_t seed = 0;
        double tick_hz = 50.0;
        double base_speed = 0.0;
        double collision_threshold = 0.0;
        GapMode gap_mode = GapMode::Arc;
        std::optional<std::string> perturbation; // kind name
        std::vector<std::uint64_t> ticks;
        std::vector<double> time;
        std::vector<VehicleSeries> vehicles; // platoon order
        std::optional<double> settled_at;
        std::optional<double> trigger_time;
        std::vector<CollisionEvent> collisions;
        std::uint64_t interlock_engagements = 0;
        bool truncated = false;
        hub::HubCounters hub;

        std::uint64_t tick_count() const { return ticks.empty() ? 0 : ticks.back(); }
        const VehicleSeries& vehicle(const std::string& id) const;
    };

    /// One event per excursion below `threshold`; NaN/absent samples are skipped.
    std::vector<CollisionEvent> detect_collisions(const std::vector<double>& time, const std::vector<std::optional<double>>& gaps,
                                                  double threshold, const std::string& follower, const std::string& leader,
                                                  bool virtual_involved);

    /// Window over which peaks are taken: from the trigger to the end, or the
    /// whole run when nothing triggered.
    std::size_t analysis_start(const RunReport& report);

    double peak_speed(const RunReport& report, const VehicleSeries& v);
    /// peak |v - base| over the analysis window.
    double peak_deviation(const RunReport& report, const VehicleSeries& v);
    std::optional<double> min_gap(const VehicleSeries& v);

    /// peak |v_i - base| / peak |v_head - base| after the trigger. Throws
    /// NoPerturbation (no trigger, or the head never deviated) or
    /// UnknownVehicle.
    double amplification(const RunReport& report, const std::string& vehicle_id);

    /// Summary document; deterministic for identical reports.
    std::string report_json(const RunReport& report);

    /// Writes report.json, vehicle_<id>.csv per vehicle. Throws IoFailure.
    void write_report(const RunReport& report, const std::filesystem::path& out_dir);
} // namespace twinhub::scenario
