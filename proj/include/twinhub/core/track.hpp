#pragma once

#include "twinhub/core/types.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twinhub
{
    struct Point2
    {
        double x = 0.0;
        double y = 0.0;

        friend bool operator==(const Point2&, const Point2&) = default;
    };

    /// Closed single-lane loop described by a polyline. The segment from the
    /// last waypoint back to the first is implicit.
    class Track
    {
    public:
        Track() = default;

        /// Validates the loop; a trailing waypoint equal to the first one is
        /// treated as explicit closure and dropped. Throws InvalidTrack.
        Track(std::vector<Point2> waypoints, std::map<std::string, double> named_points);

        /// Stadium loop: two straights joined by semicircles discretized with
        /// `segments_per_arc` chords. The radius is solved so that the polyline
        /// perimeter equals `lap_length`. Named points A..F sit at sixths of the lap.
        static Track stadium(double straight_length = 80.0, double lap_length = 245.0, int segments_per_arc = 64);

        bool empty() const noexcept { return waypoints_.empty(); }
        const std::vector<Point2>& waypoints() const noexcept { return waypoints_; }
        const std::map<std::string, double>& named_points() const noexcept { return named_points_; }
        double lap_length() const noexcept { return lap_length_; }

        /// Arc length of a named point; throws UnknownNamedPoint.
        double named_point(const std::string& name) const;

        /// Wraps any arc length into [0, lap_length).
        double wrap(double arc) const;

        Point2 point_at(double arc) const;
        /// Direction of travel at `arc`, radians.
        double tangent_at(double arc) const;

        /// Same loop with every coordinate and arc length multiplied by `factor`.
        Track scaled(double factor) const;

        /// Cumulative arc length at waypoint `index`.
        double cumulative(std::size_t index) const { return cumulative_.at(index); }

    private:
        std::size_t segment_at(double wrapped_arc) const;

        std::vector<Point2> waypoints_;
        std::vector<double> cumulative_; // size n+1; back() == lap_length_
        std::map<std::string, double> named_points_;
        double lap_length_ = 0.0;
    };

    struct TrackProjection
    {
        double arc_position = 0.0;
        double lateral_offset = 0.0; // positive left of the travel direction
    };

    /// Nearest-segment projection with wraparound. Throws EmptyTrack.
    TrackProjection project_to_track(const Pose& pose, const Track& track);

    /// Centroid arc gap from follower forward to leader, in [0, lap_length).
    double signed_gap(const VehicleState& follower, const VehicleState& leader, const Track& track);

    /// Straight-line centroid distance, for reports that prefer it over arc gaps.
    double centroid_distance(const VehicleState& a, const VehicleState& b) noexcept;

    enum class GapMode
    {
        Arc,
        Centroid,
    };

    std::string_view to_string(GapMode mode) noexcept;
    std::optional<GapMode> parse_gap_mode(std::string_view text) noexcept;

    double gap_between(const VehicleState& follower, const VehicleState& leader, const Track& track, GapMode mode);

    Track load_track(const std::filesystem::path& path);
    Track track_from_json_text(const std::string& text);
    std::string track_to_json_text(const Track& track);
} // namespace twinhub
