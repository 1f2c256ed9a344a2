#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace twinhub
{
    inline constexpr double kPi = 3.14159265358979323846;

    /// Wraps an angle into (-pi, pi].
    double normalize_angle(double radians) noexcept;

    inline constexpr double kmh_to_ms(double kmh) noexcept { return kmh / 3.6; }
    inline constexpr double ms_to_kmh(double ms) noexcept { return ms * 3.6; }

    enum class FrameId
    {
        Physical,
        Virtual,
        InnoLike,
        Unified,
    };

    enum class VehicleKind
    {
        EmulatedPhysical,
        Virtual,
    };

    enum class VehicleRole
    {
        CAV,
        HDV,
        Head,
    };

    std::string_view to_string(FrameId frame) noexcept;
    std::string_view to_string(VehicleKind kind) noexcept;
    std::string_view to_string(VehicleRole role) noexcept;
    std::optional<FrameId> parse_frame(std::string_view text) noexcept;
    std::optional<VehicleKind> parse_vehicle_kind(std::string_view text) noexcept;
    std::optional<VehicleRole> parse_vehicle_role(std::string_view text) noexcept;

    /// The frame a vehicle of this kind publishes in unless configured otherwise.
    FrameId default_frame(VehicleKind kind) noexcept;

    struct Pose
    {
        double x = 0.0;
        double y = 0.0;
        double heading = 0.0; // radians, kept in (-pi, pi]

        friend bool operator==(const Pose&, const Pose&) = default;
    };

    struct VehicleState
    {
        std::string vehicle_id;
        FrameId frame = FrameId::Unified;
        Pose pose;
        double speed = 0.0;        // m/s, >= 0
        double acceleration = 0.0; // m/s^2
        double front_wheel_angle = 0.0;
        double arc_position = 0.0; // along-track position, same length unit as pose
        double timestamp = 0.0;    // sender clock, seconds
        std::uint64_t seq = 0;

        friend bool operator==(const VehicleState&, const VehicleState&) = default;
    };

    /// Physical description of a vehicle. Lengths, speeds and accelerations
    /// are expressed in the unified (full-scale) frame.
    struct VehicleSpec
    {
        std::string vehicle_id;
        VehicleKind kind = VehicleKind::Virtual;
        VehicleRole role = VehicleRole::CAV;
        double body_length = 4.6;
        double wheelbase = 2.6;
        double max_speed = 30.0 / 3.6;
        double max_accel = 2.0;
        double max_decel = 3.0;
        double max_front_wheel_angle = 0.52;
        // Time constant of the speed-tracking actuator; 0 means an ideal
        // (rate-limited only) actuator.
        double actuator_tau = 0.15;

        friend bool operator==(const VehicleSpec&, const VehicleSpec&) = default;
    };

    /// Throws Error(SchemaViolation) naming the first broken invariant.
    void validate(const VehicleSpec& spec);

    struct ControlInstruction
    {
        std::string target_vehicle_id;
        double desired_front_wheel_angle = 0.0;
        double desired_speed = 0.0;
        std::string source_id;
        FrameId source_frame = FrameId::Unified;
        double timestamp = 0.0;
        std::uint64_t seq = 0;

        friend bool operator==(const ControlInstruction&, const ControlInstruction&) = default;
    };
} // namespace twinhub
