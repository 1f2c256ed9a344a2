#pragma once

#include "twinhub/agents/rng.hpp"
#include "twinhub/core/frame.hpp"
#include "twinhub/core/track.hpp"
#include "twinhub/core/types.hpp"

#include <cstdint>
#include <deque>

namespace twinhub::agents
{
    struct ImperfectionModel
    {
        double position_noise_sigma = 0.0; // m, frame-local
        double speed_noise_sigma = 0.0;    // m/s, frame-local
        double actuation_lag_tau = 0.0;    // s; EmulatedPhysical only, 0 = ideal actuator
        double command_jitter = 0.0;       // s; commands land after jitter + U(-jitter, jitter)
        double state_publish_hz = 50.0;
        double position_quantum = 0.0; // m, frame-local; 0 disables
        std::uint64_t rng_seed = 0;

        static ImperfectionModel emulated_physical_defaults(std::uint64_t seed);

        friend bool operator==(const ImperfectionModel&, const ImperfectionModel&) = default;
    };

    /// Throws SchemaViolation.
    void validate(const ImperfectionModel& model);

    /// One vehicle integrating bicycle dynamics in its own frame. Virtual
    /// agents use the spec's actuator lag and publish clean states;
    /// EmulatedPhysical agents use the imperfection model's lag and add
    /// noise, quantization, and command jitter.
    class VehicleAgent
    {
    public:
        /// `spec` and `track` are in unified units.
        VehicleAgent(const VehicleSpec& spec, FrameTransform transform, const Track& track, ImperfectionModel imperfections);

        const std::string& id() const noexcept { return spec_.vehicle_id; }
        FrameId frame() const noexcept { return transform_.frame; }
        const VehicleSpec& spec() const noexcept { return unified_spec_; }
        const ImperfectionModel& imperfections() const noexcept { return imperfections_; }

        /// Puts the vehicle on the centerline at `arc` (unified m) heading
        /// along the track, already moving at `speed` (unified m/s) with that
        /// speed as its held command.
        void place(double arc, double speed, double clock);

        /// Queues a dispatched command (own frame). Ignored if older than the
        /// command already applied.
        void receive(const ControlInstruction& cmd);

        void step(double dt);

        bool publish_due() const noexcept;
        /// Observation as sent on the wire: own frame, noise applied.
        VehicleState publish();

        const VehicleState& truth() const noexcept { return state_; }
        VehicleState truth_unified() const;
        /// Distance travelled, unified meters.
        double odometer() const noexcept { return odometer_ * transform_.scale_to_unified; }
        double clock() const noexcept { return state_.timestamp; }

        /// Safety interlock: while engaged the vehicle brakes at max_decel
        /// with no actuator lag and ignores its desired speed.
        void set_interlock(bool engaged) noexcept { interlock_ = engaged; }
        bool interlock() const noexcept { return interlock_; }

    private:
        struct Pending
        {
            double apply_time;
            ControlInstruction cmd;
        };

        void integrate(double dt);
        void apply(const ControlInstruction& cmd);

        VehicleSpec unified_spec_;
        VehicleSpec spec_; // own frame, lag resolved
        FrameTransform transform_;
        Track track_;      // own frame
        ImperfectionModel imperfections_;
        DeterministicRng noise_rng_;
        DeterministicRng jitter_rng_;
        VehicleState state_;
        ControlInstruction command_;
        std::uint64_t applied_seq_ = 0;
        std::deque<Pending> pending_;
        std::uint64_t publish_seq_ = 0;
        double next_publish_ = 0.0;
        double odometer_ = 0.0;
        bool interlock_ = false;
    };
} // namespace twinhub::agents
