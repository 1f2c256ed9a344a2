#pragma once

#include <optional>
#include <string>
#include <variant>

namespace twinhub::agents
{
    /// One positive half-wave added to the base speed.
    struct HalfSine
    {
        double duration = 3.5;     // s
        double amplitude = 0.8389; // m/s
        // When set, `duration` is read as a full sine period, so the hump lasts duration/2.
        bool duration_is_full_period = false;

        friend bool operator==(const HalfSine&, const HalfSine&) = default;
    };

    /// Decelerate at `rate` to `target`, hold, then ramp back linearly.
    struct Brake
    {
        double target = 0.28056; // m/s
        double rate = 0.28;      // m/s^2
        double hold = 20.0;      // s
        double recover = 12.0;   // s

        friend bool operator==(const Brake&, const Brake&) = default;
    };

    struct PerturbationSpec
    {
        std::variant<HalfSine, Brake> shape;
        std::string trigger_point = "C";
        int trigger_lap = 1;

        friend bool operator==(const PerturbationSpec&, const PerturbationSpec&) = default;
    };

    struct HeadProfile
    {
        double base_speed = 2.8; // 10.08 km/h
        std::optional<PerturbationSpec> perturbation;

        friend bool operator==(const HeadProfile&, const HeadProfile&) = default;
    };

    /// Throws SchemaViolation (non-positive durations or rates, brake target
    /// not below base, negative speeds).
    void validate(const HeadProfile& profile);

    /// Speed at time t. `trigger_time` is when the perturbation started;
    /// nullopt means not yet triggered.
    double head_speed(const HeadProfile& profile, std::optional<double> trigger_time, double t);

    /// Total time the profile deviates from base speed after the trigger.
    double perturbation_duration(const HeadProfile& profile);

    /// Brake phase lengths: decel, hold, recover.
    struct BrakePhases
    {
        double decel = 0.0;
        double hold = 0.0;
        double recover = 0.0;
    };
    BrakePhases brake_phases(const Brake& brake, double base_speed);
} // namespace twinhub::agents
