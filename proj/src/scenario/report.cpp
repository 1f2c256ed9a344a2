#include "twinhub/scenario/report.hpp"

#include "twinhub/core/error.hpp"

#include <json.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace twinhub::scenario
{
    using Json = nlohmann::json;

    const VehicleSeries& RunReport::vehicle(const std::string& id) const
    {
        for (const auto& v : vehicles)
        {
            if (v.vehicle_id == id)
            {
                return v;
            }
        }
        throw Error(ErrorCode::UnknownVehicle, "no series for vehicle '" + id + "'");
    }

    std::vector<CollisionEvent> detect_collisions(const std::vector<double>& time, const std::vector<std::optional<double>>& gaps,
                                                  double threshold, const std::string& follower, const std::string& leader,
                                                  bool virtual_involved)
    {
        std::vector<CollisionEvent> out;
        std::optional<CollisionEvent> open;
        const std::size_t n = std::min(time.size(), gaps.size());
        for (std::size_t i = 0; i < n; ++i)
        {
            if (!gaps[i] || std::isnan(*gaps[i]))
            {
                continue;
            }
            const double g = *gaps[i];
            if (g < threshold)
            {
                if (!open)
                {
                    open = CollisionEvent{follower, leader, time[i], std::nullopt, g, time[i], virtual_involved};
                }
                else if (g < open->min_gap)
                {
                    open->min_gap = g;
                    open->min_gap_time = time[i];
                }
            }
            else if (open)
            {
                open->end_time = time[i];
                out.push_back(*open);
                open.reset();
            }
        }
        if (open)
        {
            out.push_back(*open);
        }
        return out;
    }

    std::size_t analysis_start(const RunReport& report)
    {
        if (!report.trigger_time)
        {
            return 0;
        }
        const auto it = std::lower_bound(report.time.begin(), report.time.end(), *report.trigger_time);
        return static_cast<std::size_t>(it - report.time.begin());
    }

    double peak_speed(const RunReport& report, const VehicleSeries& v)
    {
        double peak = 0.0;
        for (std::size_t i = analysis_start(report); i < v.speed.size(); ++i)
        {
            peak = std::max(peak, v.speed[i]);
        }
        return peak;
    }

    double peak_deviation(const RunReport& report, const VehicleSeries& v)
    {
        double peak = 0.0;
        for (std::size_t i = analysis_start(report); i < v.speed.size(); ++i)
        {
            peak = std::max(peak, std::abs(v.speed[i] - report.base_speed));
        }
        return peak;
    }

    std::optional<double> min_gap(const VehicleSeries& v)
    {
        std::optional<double> m;
        for (const auto& g : v.gap)
        {
            if (g && (!m || *g < *m))
            {
                m = *g;
            }
        }
        return m;
    }

    double amplification(const RunReport& report, const std::string& vehicle_id)
    {
        const VehicleSeries& v = report.vehicle(vehicle_id);
        if (!report.trigger_time || report.vehicles.empty())
        {
            throw Error(ErrorCode::NoPerturbation, "the perturbation never triggered");
        }
        const double head = peak_deviation(report, report.vehicles.front());
        if (!(head > 0.0))
        {
            throw Error(ErrorCode::NoPerturbation, "head speed never deviated from base");
        }
        return peak_deviation(report, v) / head;
    }

    namespace
    {
        Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

        std::string num(double v) { return fmt::format("{:.17g}", v); }
    } // namespace

    std::string report_json(const RunReport& r)
    {
        Json doc;
        doc["scenario"] = r.scenario;
        doc["mode"] = r.mode;
        doc["seed"] = r.seed;
        doc["tick_hz"] = r.tick_hz;
        doc["base_speed"] = r.base_speed;
        doc["collision_threshold"] = r.collision_threshold;
        doc["gap_mode"] = std::string(to_string(r.gap_mode));
        doc["perturbation"] = r.perturbation ? Json(*r.perturbation) : Json(nullptr);
        doc["tick_count"] = r.tick_count();
        doc["duration"] = r.time.empty() ? 0.0 : r.time.back();
        doc["settled_at"] = opt(r.settled_at);
        doc["trigger_time"] = opt(r.trigger_time);
        doc["truncated"] = r.truncated;
        doc["interlock_engagements"] = r.interlock_engagements;
        doc["hub"] = {
            {"states_ingested", r.hub.states_ingested}, {"stale_dropped", r.hub.stale_dropped},
            {"unmapped_dropped", r.hub.unmapped_dropped}, {"unknown_target", r.hub.unknown_target},
            {"dispatched", r.hub.dispatched},           {"speed_clamped", r.hub.speed_clamped},
            {"angle_clamped", r.hub.angle_clamped},     {"watchdog_fired", r.hub.watchdog_fired},
            {"broadcasts", r.hub.broadcasts},
        };

        Json vehicles = Json::array();
        for (const auto& v : r.vehicles)
        {
            Json j;
            j["id"] = v.vehicle_id;
            j["kind"] = std::string(to_string(v.kind));
            j["role"] = std::string(to_string(v.role));
            j["source"] = std::string(to_string(v.source));
            j["frame"] = std::string(to_string(v.frame));
            j["peak_speed"] = peak_speed(r, v);
            j["peak_deviation"] = peak_deviation(r, v);
            j["min_gap"] = opt(min_gap(v));
            j["mean_position_error"] = opt(v.mean_position_error);
            try
            {
                j["amplification"] = amplification(r, v.vehicle_id);
            }
            catch (const Error&)
            {
                j["amplification"] = nullptr;
            }
            vehicles.push_back(std::move(j));
        }
        doc["vehicles"] = std::move(vehicles);

        Json collisions = Json::array();
        for (const auto& c : r.collisions)
        {
            collisions.push_back({{"follower", c.follower},
                                  {"leader", c.leader},
                                  {"start_time", c.start_time},
                                  {"end_time", opt(c.end_time)},
                                  {"min_gap", c.min_gap},
                                  {"min_gap_time", c.min_gap_time},
                                  {"virtual_involved", c.virtual_involved}});
        }
        doc["collisions"] = std::move(collisions);
        return doc.dump(2) + "\n";
    }

    void write_report(const RunReport& r, const std::filesystem::path& out_dir)
    {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
        {
            throw Error(ErrorCode::IoFailure, "cannot create '" + out_dir.string() + "': " + ec.message());
        }
        const auto open = [](const std::filesystem::path& p) {
            std::ofstream out(p, std::ios::binary | std::ios::trunc);
            if (!out)
            {
                throw Error(ErrorCode::IoFailure, "cannot write '" + p.string() + "'");
            }
            return out;
        };
        {
            auto out = open(out_dir / "report.json");
            out << report_json(r);
        }
        for (const auto& v : r.vehicles)
        {
            auto out = open(out_dir / ("vehicle_" + v.vehicle_id + ".csv"));
            out << "tick,time,arc_position,speed,gap_to_predecessor\n";
            for (std::size_t i = 0; i < r.time.size() && i < v.speed.size(); ++i)
            {
                out << r.ticks[i] << ',' << num(r.time[i]) << ',' << num(v.arc[i]) << ',' << num(v.speed[i]) << ',';
                if (i < v.gap.size() && v.gap[i])
                {
                    out << num(*v.gap[i]);
                }
                out << '\n';
            }
            if (!out)
            {
                throw Error(ErrorCode::IoFailure, "write failed for vehicle " + v.vehicle_id);
            }
        }
    }
} // namespace twinhub::scenario
