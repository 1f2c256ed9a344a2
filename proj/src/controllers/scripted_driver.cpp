#include "twinhub/controllers/scripted_driver.hpp"

#include "twinhub/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace twinhub::controllers
{
    namespace
    {
        constexpr double kTimeEps = 1e-9;
    }

    void validate(const ScriptedDriverParams& p)
    {
        if (!(p.v_free > 0.0) || !(p.gap_stop >= 0.0) || !(p.gap_stop < p.gap_free) || !(p.k_h > 0.0) || !(p.tau_h >= 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "scripted driver needs v_free > 0, 0 <= gap_stop < gap_free, k_h > 0, tau_h >= 0");
        }
    }

    std::optional<ScriptedDriverParams> driver_preset(std::string_view name)
    {
        if (name == "default")
        {
            return ScriptedDriverParams{};
        }
        if (name == "aggressive")
        {
            return ScriptedDriverParams{3.0, 2.0, 21.3, 8.0, 1.0};
        }
        if (name == "briefed")
        {
            return ScriptedDriverParams{3.64, 8.0, 23.4, 15.0, 0.4};
        }
        return std::nullopt;
    }

    std::vector<std::string> driver_preset_names() { return {"default", "aggressive", "briefed"}; }

    double optimal_velocity(double gap, const ScriptedDriverParams& p) noexcept
    {
        if (gap <= p.gap_stop)
        {
            return 0.0;
        }
        if (gap >= p.gap_free)
        {
            return p.v_free;
        }
        return p.v_free * (gap - p.gap_stop) / (p.gap_free - p.gap_stop);
    }

    ScriptedDriver::ScriptedDriver(ScriptedDriverParams params) : params_(params) { validate(params_); }

    ScriptedDriver::Sample ScriptedDriver::delayed(double t) const
    {
        if (t <= history_.front().t + kTimeEps)
        {
            return history_.front();
        }
        // first sample at or after t
        auto hi = std::lower_bound(history_.begin(), history_.end(), t - kTimeEps, [](const Sample& s, double x) { return s.t < x; });
        if (hi == history_.end())
        {
            return history_.back();
        }
        if (std::abs(hi->t - t) <= kTimeEps)
        {
            return *hi;
        }
        const Sample& b = *hi;
        const Sample& a = *(hi - 1);
        const double w = (t - a.t) / (b.t - a.t);
        return {t, a.gap + w * (b.gap - a.gap), a.v + w * (b.v - a.v)};
    }

    double ScriptedDriver::speed_cmd(double t, double gap, double v_self, double dt)
    {
        if (!(dt > 0.0))
        {
            throw Error(ErrorCode::NonPositiveDt, "scripted driver needs dt > 0");
        }
        if (!history_.empty() && t <= history_.back().t)
        {
            history_.clear(); // time went backwards: a new run
        }
        history_.push_back({t, gap, v_self});
        const Sample d = delayed(t - params_.tau_h);
        // keep one sample older than the delay window for interpolation
        while (history_.size() > 2 && history_[1].t <= t - params_.tau_h - kTimeEps)
        {
            history_.pop_front();
        }
        return std::max(0.0, v_self + params_.k_h * (optimal_velocity(d.gap, params_) - d.v) * dt);
    }
} // namespace twinhub::controllers
