#include "twinhub/agents/head_profile.hpp"

#include "twinhub/core/error.hpp"
#include "twinhub/core/types.hpp"

#include <cmath>

namespace twinhub::agents
{
    namespace
    {
        void require(bool ok, const char* what)
        {
            if (!ok)
            {
                throw Error(ErrorCode::SchemaViolation, std::string("head profile: ") + what);
            }
        }

        double hump_length(const HalfSine& h) { return h.duration_is_full_period ? 0.5 * h.duration : h.duration; }
    } // namespace

    void validate(const HeadProfile& p)
    {
        require(std::isfinite(p.base_speed) && p.base_speed >= 0.0, "base_speed must be >= 0");
        if (!p.perturbation)
        {
            return;
        }
        require(p.perturbation->trigger_lap >= 1, "trigger_lap must be >= 1");
        if (const auto* h = std::get_if<HalfSine>(&p.perturbation->shape))
        {
            require(h->duration > 0.0, "half-sine duration must be > 0");
            require(std::isfinite(h->amplitude) && p.base_speed + std::min(0.0, h->amplitude) >= 0.0, "half-sine would drive speed below 0");
        }
        else
        {
            const auto& b = std::get<Brake>(p.perturbation->shape);
            require(b.rate > 0.0 && b.hold > 0.0 && b.recover > 0.0, "brake rate and durations must be > 0");
            require(b.target >= 0.0 && b.target < p.base_speed, "brake target must lie in [0, base_speed)");
        }
    }

    BrakePhases brake_phases(const Brake& b, double base_speed)
    {
        return {(base_speed - b.target) / b.rate, b.hold, b.recover};
    }

    double perturbation_duration(const HeadProfile& p)
    {
        if (!p.perturbation)
        {
            return 0.0;
        }
        if (const auto* h = std::get_if<HalfSine>(&p.perturbation->shape))
        {
            return hump_length(*h);
        }
        const BrakePhases ph = brake_phases(std::get<Brake>(p.perturbation->shape), p.base_speed);
        return ph.decel + ph.hold + ph.recover;
    }

    double head_speed(const HeadProfile& p, std::optional<double> trigger_time, double t)
    {
        const double base = p.base_speed;
        if (!p.perturbation || !trigger_time || t < *trigger_time)
        {
            return base;
        }
        const double s = t - *trigger_time;
        if (const auto* h = std::get_if<HalfSine>(&p.perturbation->shape))
        {
            const double len = hump_length(*h);
            return s < len ? base + h->amplitude * std::sin(kPi * s / len) : base;
        }
        const auto& b = std::get<Brake>(p.perturbation->shape);
        const BrakePhases ph = brake_phases(b, base);
        if (s < ph.decel)
        {
            return base - b.rate * s;
        }
        if (s < ph.decel + ph.hold)
        {
            return b.target;
        }
        if (s < ph.decel + ph.hold + ph.recover)
        {
            return b.target + (base - b.target) * (s - ph.decel - ph.hold) / ph.recover;
        }
        return base;
    }
} // namespace twinhub::agents
