#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace twinhub::controllers
{
    /// Optimal-velocity car follower acting on delayed observations; a
    /// stand-in for a human driver in automated runs.
    struct ScriptedDriverParams
    {
        double v_free = 3.64;  // m/s
        double gap_stop = 5.0; // m
        double gap_free = 25.0;
        double k_h = 15.0;  // 1/s
        double tau_h = 0.8; // s

        friend bool operator==(const ScriptedDriverParams&, const ScriptedDriverParams&) = default;
    };

    /// Throws SchemaViolation.
    void validate(const ScriptedDriverParams& params);

    /// Named parameter sets: "default" (wave-amplifying), "aggressive"
    /// (short standstill gap, slow to react), "briefed" (told to drive
    /// conservatively).
    std::optional<ScriptedDriverParams> driver_preset(std::string_view name);
    std::vector<std::string> driver_preset_names();

    /// 0 below gap_stop, v_free above gap_free, linear in between.
    double optimal_velocity(double gap, const ScriptedDriverParams& params) noexcept;

    class ScriptedDriver
    {
    public:
        explicit ScriptedDriver(ScriptedDriverParams params);

        const ScriptedDriverParams& params() const noexcept { return params_; }

        /// Records the observation at time t, then returns
        /// max(0, v_self + k_h (V(gap(t - tau_h)) - v_self(t - tau_h)) dt).
        /// Delayed values are interpolated linearly in the history; before
        /// tau_h of history exists the oldest sample is used.
        double speed_cmd(double t, double gap, double v_self, double dt);

    private:
        struct Sample
        {
            double t;
            double gap;
            double v;
        };

        Sample delayed(double t) const;

        ScriptedDriverParams params_;
        std::deque<Sample> history_;
    };
} // namespace twinhub::controllers
