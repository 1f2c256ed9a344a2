#include "twinhub/agents/rng.hpp"

#include "twinhub/core/types.hpp"

#include <cmath>

namespace twinhub::agents
{
    std::uint64_t splitmix64(std::uint64_t x) noexcept
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    DeterministicRng::DeterministicRng(std::uint64_t seed, std::uint64_t stream)
        : engine_(splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL)))
    {
    }

    double DeterministicRng::uniform()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double DeterministicRng::normal(double sigma)
    {
        if (sigma == 0.0)
        {
            return 0.0;
        }
        if (has_spare_)
        {
            has_spare_ = false;
            return sigma * spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
        {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        has_spare_ = true;
        return sigma * r * std::cos(2.0 * kPi * u2);
    }
} // namespace twinhub::agents
