#include "twinhub/controllers/head_executor.hpp"

#include "twinhub/core/error.hpp"

#include <cmath>
#include <fmt/format.h>

namespace twinhub::controllers
{
    SettleMonitor::SettleMonitor(SettleCriteria criteria, double d_des) : criteria_(criteria), d_des_(d_des)
    {
        if (!(criteria_.tolerance > 0.0) || !(criteria_.hold >= 0.0) || !(criteria_.timeout > 0.0) || !(d_des_ > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "settle criteria must be positive");
        }
    }

    bool SettleMonitor::update(double t, const std::vector<double>& gaps)
    {
        if (settled_at_)
        {
            return true;
        }
        if (!start_)
        {
            start_ = t;
        }
        bool in_band = true;
        for (double g : gaps)
        {
            in_band = in_band && std::abs(g - d_des_) <= criteria_.tolerance * d_des_;
        }
        if (!in_band)
        {
            in_band_since_.reset();
        }
        else if (!in_band_since_)
        {
            in_band_since_ = t;
        }
        if (in_band_since_ && t - *in_band_since_ >= criteria_.hold - 1e-9)
        {
            settled_at_ = t;
            return true;
        }
        if (t - *start_ > criteria_.timeout)
        {
            throw Error(ErrorCode::SettlingTimeout, fmt::format("platoon did not settle within {:g} s", criteria_.timeout));
        }
        return false;
    }

    HeadExecutor::HeadExecutor(agents::HeadProfile profile, const Track& track, double actuator_tau, double dt)
        : profile_(std::move(profile)),
          latch_(track, profile_.perturbation ? profile_.perturbation->trigger_point : std::string("A"),
                 profile_.perturbation ? profile_.perturbation->trigger_lap : 1),
          tau_(actuator_tau),
          dt_(dt)
    {
        agents::validate(profile_);
        if (!(dt_ > 0.0) || !(tau_ >= 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "head executor needs dt > 0 and tau >= 0");
        }
    }

    double HeadExecutor::update(double t, double head_arc)
    {
        if (latch_.update(head_arc) && profile_.perturbation)
        {
            trigger_time_ = t;
        }
        const double p1 = agents::head_speed(profile_, trigger_time_, t + dt_);
        if (tau_ == 0.0)
        {
            return p1;
        }
        const double p2 = agents::head_speed(profile_, trigger_time_, t + 2.0 * dt_);
        return std::max(0.0, p1 + tau_ * (p2 - p1) / dt_);
    }
} // namespace twinhub::controllers
