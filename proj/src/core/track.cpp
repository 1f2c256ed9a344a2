#include "twinhub/core/track.hpp"

#include "twinhub/core/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace twinhub
{
    namespace
    {
        double distance(Point2 a, Point2 b) { return std::hypot(b.x - a.x, b.y - a.y); }
    } // namespace

    Track::Track(std::vector<Point2> waypoints, std::map<std::string, double> named_points)
        : waypoints_(std::move(waypoints)), named_points_(std::move(named_points))
    {
        if (waypoints_.size() >= 2 && distance(waypoints_.front(), waypoints_.back()) <= 1e-9)
        {
            waypoints_.pop_back();
        }
        if (waypoints_.size() < 3)
        {
            throw Error(ErrorCode::InvalidTrack, "a closed track needs at least 3 distinct waypoints");
        }
        cumulative_.reserve(waypoints_.size() + 1);
        cumulative_.push_back(0.0);
        for (std::size_t i = 0; i < waypoints_.size(); ++i)
        {
            const Point2 a = waypoints_[i];
            const Point2 b = waypoints_[(i + 1) % waypoints_.size()];
            if (!std::isfinite(a.x) || !std::isfinite(a.y))
            {
                throw Error(ErrorCode::InvalidTrack, "waypoint " + std::to_string(i) + " is not finite");
            }
            const double len = distance(a, b);
            if (!(len > 1e-9))
            {
                throw Error(ErrorCode::InvalidTrack, "zero-length segment at waypoint " + std::to_string(i));
            }
            cumulative_.push_back(cumulative_.back() + len);
        }
        lap_length_ = cumulative_.back();

        // std::map iterates keys in order, so arcs must increase with the key.
        double previous = -1.0;
        for (const auto& [name, arc] : named_points_)
        {
            if (!(arc >= 0.0 && arc < lap_length_))
            {
                throw Error(ErrorCode::InvalidTrack, "named point " + name + " lies outside [0, lap_length)");
            }
            if (!(arc > previous))
            {
                throw Error(ErrorCode::InvalidTrack, "named point arc lengths must strictly increase (at " + name + ")");
            }
            previous = arc;
        }
    }

    Track Track::stadium(double straight_length, double lap_length, int segments_per_arc)
    {
        if (!(straight_length > 0.0) || !(lap_length > 2.0 * straight_length) || segments_per_arc < 2)
        {
            throw Error(ErrorCode::InvalidTrack, "stadium needs straight > 0, lap > 2*straight and >= 2 arc segments");
        }
        const int n = segments_per_arc;
        const double chord_factor = 4.0 * n * std::sin(kPi / (2.0 * n));
        const double radius = (lap_length - 2.0 * straight_length) / chord_factor;
        const double half = straight_length / 2.0;

        std::vector<Point2> pts;
        pts.reserve(2 * n + 2);
        pts.push_back({-half, -radius});
        for (int k = 0; k <= n; ++k)
        {
            const double a = -kPi / 2.0 + kPi * k / n;
            pts.push_back({half + radius * std::cos(a), radius * std::sin(a)});
        }
        for (int k = 0; k < n; ++k)
        {
            const double a = kPi / 2.0 + kPi * k / n;
            pts.push_back({-half + radius * std::cos(a), radius * std::sin(a)});
        }

        // Perimeter is only known after construction; place named points after.
        Track loop(pts, {});
        std::map<std::string, double> named;
        const char* letters = "ABCDEF";
        for (int i = 0; i < 6; ++i)
        {
            named[std::string(1, letters[i])] = loop.lap_length() * i / 6.0;
        }
        return Track(std::move(pts), std::move(named));
    }

    double Track::named_point(const std::string& name) const
    {
        const auto it = named_points_.find(name);
        if (it == named_points_.end())
        {
            throw Error(ErrorCode::UnknownNamedPoint, "track has no named point '" + name + "'");
        }
        return it->second;
    }

    double Track::wrap(double arc) const
    {
        if (lap_length_ <= 0.0)
        {
            throw Error(ErrorCode::EmptyTrack, "track has no waypoints");
        }
        double w = std::fmod(arc, lap_length_);
        if (w < 0.0)
        {
            w += lap_length_;
        }
        if (w >= lap_length_)
        {
            w = 0.0;
        }
        return w;
    }

    std::size_t Track::segment_at(double wrapped_arc) const
    {
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), wrapped_arc);
        const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
        return std::min(idx == 0 ? 0 : idx - 1, waypoints_.size() - 1);
    }

    Point2 Track::point_at(double arc) const
    {
        const double s = wrap(arc);
        const std::size_t i = segment_at(s);
        const Point2 a = waypoints_[i];
        const Point2 b = waypoints_[(i + 1) % waypoints_.size()];
        const double len = cumulative_[i + 1] - cumulative_[i];
        const double t = (s - cumulative_[i]) / len;
        return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }

    double Track::tangent_at(double arc) const
    {
        const std::size_t i = segment_at(wrap(arc));
        const Point2 a = waypoints_[i];
        const Point2 b = waypoints_[(i + 1) % waypoints_.size()];
        return std::atan2(b.y - a.y, b.x - a.x);
    }

    Track Track::scaled(double factor) const
    {
        if (!(factor > 0.0))
        {
            throw Error(ErrorCode::InvalidTrack, "scale factor must be > 0");
        }
        std::vector<Point2> pts = waypoints_;
        for (auto& p : pts)
        {
            p.x *= factor;
            p.y *= factor;
        }
        std::map<std::string, double> named = named_points_;
        for (auto& [name, arc] : named)
        {
            arc *= factor;
        }
        Track out(std::move(pts), {});
        for (auto& [name, arc] : named)
        {
            arc = std::min(arc, std::nextafter(out.lap_length(), 0.0));
        }
        return Track(out.waypoints_, std::move(named));
    }

    TrackProjection project_to_track(const Pose& pose, const Track& track)
    {
        if (track.empty())
        {
            throw Error(ErrorCode::EmptyTrack, "cannot project onto an empty track");
        }
        const auto& wp = track.waypoints();
        const std::size_t n = wp.size();
        double best_d2 = std::numeric_limits<double>::infinity();
        double best_arc = 0.0;
        double best_cross = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            const Point2 a = wp[i];
            const Point2 b = wp[(i + 1) % n];
            const double dx = b.x - a.x;
            const double dy = b.y - a.y;
            const double len2 = dx * dx + dy * dy;
            const double px = pose.x - a.x;
            const double py = pose.y - a.y;
            const double t = std::clamp((px * dx + py * dy) / len2, 0.0, 1.0);
            const double ex = px - t * dx;
            const double ey = py - t * dy;
            const double d2 = ex * ex + ey * ey;
            if (d2 < best_d2)
            {
                best_d2 = d2;
                best_arc = track.cumulative(i) + t * std::sqrt(len2);
                best_cross = dx * py - dy * px;
            }
        }
        const double dist = std::sqrt(best_d2);
        return {track.wrap(best_arc), best_cross < 0.0 ? -dist : dist};
    }

    double signed_gap(const VehicleState& follower, const VehicleState& leader, const Track& track)
    {
        return track.wrap(leader.arc_position - follower.arc_position);
    }

    double centroid_distance(const VehicleState& a, const VehicleState& b) noexcept
    {
        return std::hypot(a.pose.x - b.pose.x, a.pose.y - b.pose.y);
    }

    Track track_from_json_text(const std::string& text)
    {
        nlohmann::json doc;
        try
        {
            doc = nlohmann::json::parse(text);
        }
        catch (const nlohmann::json::parse_error& e)
        {
            throw Error(ErrorCode::ConfigParse, std::string("track file: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("waypoints") || !doc["waypoints"].is_array())
        {
            throw Error(ErrorCode::ConfigParse, "track file: 'waypoints' array is required");
        }
        for (const auto& [key, value] : doc.items())
        {
            if (key != "waypoints" && key != "named_points")
            {
                throw Error(ErrorCode::ConfigParse, "track file: unknown key '" + key + "'");
            }
        }
        std::vector<Point2> pts;
        std::size_t index = 0;
        for (const auto& item : doc["waypoints"])
        {
            if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number())
            {
                throw Error(ErrorCode::ConfigParse, "track file: waypoints[" + std::to_string(index) + "] must be [x, y]");
            }
            pts.push_back({item[0].get<double>(), item[1].get<double>()});
            ++index;
        }
        std::map<std::string, double> named;
        if (doc.contains("named_points"))
        {
            if (!doc["named_points"].is_object())
            {
                throw Error(ErrorCode::ConfigParse, "track file: 'named_points' must be an object");
            }
            for (const auto& [name, arc] : doc["named_points"].items())
            {
                if (!arc.is_number())
                {
                    throw Error(ErrorCode::ConfigParse, "track file: named_points." + name + " must be a number");
                }
                named[name] = arc.get<double>();
            }
        }
        return Track(std::move(pts), std::move(named));
    }

    Track load_track(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in)
        {
            throw Error(ErrorCode::IoFailure, "cannot open track file " + path.string());
        }
        std::stringstream buffer;
        buffer << in.rdbuf();
        return track_from_json_text(buffer.str());
    }

    std::string track_to_json_text(const Track& track)
    {
        nlohmann::json doc;
        doc["waypoints"] = nlohmann::json::array();
        for (const auto& p : track.waypoints())
        {
            doc["waypoints"].push_back({p.x, p.y});
        }
        doc["named_points"] = track.named_points();
        return doc.dump(2);
    }

    std::string_view to_string(GapMode mode) noexcept
    {
        return mode == GapMode::Arc ? "arc" : "centroid";
    }

    std::optional<GapMode> parse_gap_mode(std::string_view text) noexcept
    {
        if (text == "arc")
        {
            return GapMode::Arc;
        }
        if (text == "centroid")
        {
            return GapMode::Centroid;
        }
        return std::nullopt;
    }

    double gap_between(const VehicleState& follower, const VehicleState& leader, const Track& track, GapMode mode)
    {
        return mode == GapMode::Arc ? signed_gap(follower, leader, track) : centroid_distance(follower, leader);
    }
} // namespace twinhub
