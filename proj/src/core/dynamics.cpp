#include "twinhub/core/dynamics.hpp"

#include "twinhub/core/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace twinhub
{
    VehicleState bicycle_step(const VehicleState& state, const VehicleSpec& spec, const ControlInstruction& cmd, double dt)
    {
        if (!(dt > 0.0) || dt > kMaxStepDt)
        {
            throw Error(ErrorCode::NonPositiveDt, "dt must be in (0, 0.1], got " + std::to_string(dt));
        }
        if (cmd.source_frame != state.frame)
        {
            throw Error(ErrorCode::FrameMismatch, "command frame differs from state frame");
        }

        const double v = state.speed;
        const double target = std::clamp(cmd.desired_speed, 0.0, spec.max_speed);
        double v_next = target;
        if (spec.actuator_tau > 0.0)
        {
            v_next = target + (v - target) * std::exp(-dt / spec.actuator_tau);
        }
        const double accel = std::clamp((v_next - v) / dt, -spec.max_decel, spec.max_accel);
        v_next = std::clamp(v + accel * dt, 0.0, spec.max_speed);

        const double delta = std::clamp(cmd.desired_front_wheel_angle, -spec.max_front_wheel_angle, spec.max_front_wheel_angle);

        VehicleState next = state;
        next.pose.x = state.pose.x + v * std::cos(state.pose.heading) * dt;
        next.pose.y = state.pose.y + v * std::sin(state.pose.heading) * dt;
        next.pose.heading = normalize_angle(state.pose.heading + (v / spec.wheelbase) * std::tan(delta) * dt);
        next.speed = v_next;
        next.acceleration = (v_next - v) / dt;
        next.front_wheel_angle = delta;
        next.timestamp = state.timestamp + dt;
        next.seq = state.seq + 1;
        return next;
    }

    VehicleSpec spec_in_frame(const VehicleSpec& unified, const FrameTransform& transform)
    {
        const double k = transform.scale_to_unified;
        VehicleSpec out = unified;
        out.body_length /= k;
        out.wheelbase /= k;
        out.max_speed /= k;
        out.max_accel /= k;
        out.max_decel /= k;
        return out;
    }
} // namespace twinhub
