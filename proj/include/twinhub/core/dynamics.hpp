#pragma once

#include "twinhub/core/frame.hpp"
#include "twinhub/core/types.hpp"

namespace twinhub
{
    inline constexpr double kMaxStepDt = 0.1;

    /// Kinematic bicycle model, rear-axle reference, no tire slip.
    ///
    /// Speed follows desired_speed through a first-order lag with time
    /// constant `spec.actuator_tau` (exact exponential discretization),
    /// rate-limited by max_accel / max_decel and clamped to [0, max_speed].
    /// Pose advances with the speed and heading held at the start of the step:
    ///   x' = x + v cos(theta) dt,  y' = y + v sin(theta) dt,
    ///   theta' = theta + (v / wheelbase) tan(delta) dt.
    /// The steering angle is applied immediately, clamped to the spec limit.
    ///
    /// `spec` must be expressed in the state's frame (see spec_in_frame).
    /// arc_position is left untouched; the caller re-projects onto its track.
    /// Throws NonPositiveDt for dt outside (0, 0.1] and FrameMismatch when the
    /// command frame differs from the state frame.
    VehicleState bicycle_step(const VehicleState& state, const VehicleSpec& spec, const ControlInstruction& cmd, double dt);

    /// Converts a unified-frame spec into an environment frame (lengths,
    /// speeds and accelerations divided by the frame scale).
    VehicleSpec spec_in_frame(const VehicleSpec& unified, const FrameTransform& transform);
} // namespace twinhub
