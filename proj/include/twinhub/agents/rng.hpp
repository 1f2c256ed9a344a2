#pragma once

#include <cstdint>
#include <random>

namespace twinhub::agents
{
    /// Seeded generator whose output is identical on every platform: the
    /// engine is fully specified by the standard, and the distributions are
    /// implemented here rather than taken from <random>.
    class DeterministicRng
    {
    public:
        DeterministicRng(std::uint64_t seed, std::uint64_t stream);

        /// [0, 1)
        double uniform();
        double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
        /// N(0, sigma) via Box-Muller; sigma = 0 returns 0 without consuming.
        double normal(double sigma);

    private:
        std::mt19937_64 engine_;
        double spare_ = 0.0;
        bool has_spare_ = false;
    };

    std::uint64_t splitmix64(std::uint64_t x) noexcept;
} // namespace twinhub::agents
