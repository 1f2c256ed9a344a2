#include "twinhub/core/types.hpp"

#include "twinhub/core/error.hpp"

#include <cmath>

namespace twinhub
{
    double normalize_angle(double radians) noexcept
    {
        if (radians > -kPi && radians <= kPi)
        {
            return radians;
        }
        double wrapped = std::remainder(radians, 2.0 * kPi);
        if (wrapped <= -kPi)
        {
            wrapped += 2.0 * kPi;
        }
        return wrapped;
    }

    std::string_view to_string(FrameId frame) noexcept
    {
        switch (frame)
        {
        case FrameId::Physical: return "Physical";
        case FrameId::Virtual: return "Virtual";
        case FrameId::InnoLike: return "InnoLike";
        case FrameId::Unified: return "Unified";
        }
        return "Unified";
    }

    std::string_view to_string(VehicleKind kind) noexcept
    {
        return kind == VehicleKind::EmulatedPhysical ? "EmulatedPhysical" : "Virtual";
    }

    std::string_view to_string(VehicleRole role) noexcept
    {
        switch (role)
        {
        case VehicleRole::CAV: return "CAV";
        case VehicleRole::HDV: return "HDV";
        case VehicleRole::Head: return "Head";
        }
        return "CAV";
    }

    std::optional<FrameId> parse_frame(std::string_view text) noexcept
    {
        for (auto f : {FrameId::Physical, FrameId::Virtual, FrameId::InnoLike, FrameId::Unified})
        {
            if (to_string(f) == text)
            {
                return f;
            }
        }
        return std::nullopt;
    }

    std::optional<VehicleKind> parse_vehicle_kind(std::string_view text) noexcept
    {
        if (text == "EmulatedPhysical")
        {
            return VehicleKind::EmulatedPhysical;
        }
        if (text == "Virtual")
        {
            return VehicleKind::Virtual;
        }
        return std::nullopt;
    }

    std::optional<VehicleRole> parse_vehicle_role(std::string_view text) noexcept
    {
        for (auto r : {VehicleRole::CAV, VehicleRole::HDV, VehicleRole::Head})
        {
            if (to_string(r) == text)
            {
                return r;
            }
        }
        return std::nullopt;
    }

    FrameId default_frame(VehicleKind kind) noexcept
    {
        return kind == VehicleKind::EmulatedPhysical ? FrameId::Physical : FrameId::Virtual;
    }

    void validate(const VehicleSpec& spec)
    {
        auto fail = [&](const std::string& what) {
            throw Error(ErrorCode::SchemaViolation, "vehicle '" + spec.vehicle_id + "': " + what);
        };
        if (spec.vehicle_id.empty())
        {
            fail("vehicle_id must not be empty");
        }
        if (!(spec.body_length > 0.0))
        {
            fail("body_length must be > 0");
        }
        if (!(spec.wheelbase > 0.0) || !(spec.wheelbase < spec.body_length))
        {
            fail("wheelbase must be in (0, body_length)");
        }
        if (!(spec.max_speed > 0.0) || !(spec.max_accel > 0.0) || !(spec.max_decel > 0.0))
        {
            fail("max_speed, max_accel and max_decel must be > 0");
        }
        if (!(spec.max_front_wheel_angle > 0.0) || !(spec.max_front_wheel_angle < kPi / 2.0))
        {
            fail("max_front_wheel_angle must be in (0, pi/2)");
        }
        if (!(spec.actuator_tau >= 0.0))
        {
            fail("actuator_tau must be >= 0");
        }
    }
} // namespace twinhub
