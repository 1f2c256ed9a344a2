#include "twinhub/agents/vehicle_agent.hpp"

#include "twinhub/core/dynamics.hpp"
#include "twinhub/core/error.hpp"

#include <algorithm>
#include <cmath>

namespace twinhub::agents
{
    namespace
    {
        constexpr double kTimeEps = 1e-9;

        // Noise and jitter draw from separate streams so that changing one
        // never shifts the other.
        constexpr std::uint64_t kNoiseStream = 1;
        constexpr std::uint64_t kJitterStream = 2;
    } // namespace

    ImperfectionModel ImperfectionModel::emulated_physical_defaults(std::uint64_t seed)
    {
        ImperfectionModel m;
        m.position_noise_sigma = 0.002;
        m.speed_noise_sigma = 0.01;
        m.actuation_lag_tau = 0.35;
        m.command_jitter = 0.005;
        m.state_publish_hz = 50.0;
        m.rng_seed = seed;
        return m;
    }

    void validate(const ImperfectionModel& m)
    {
        const bool ok = m.position_noise_sigma >= 0.0 && m.speed_noise_sigma >= 0.0 && m.actuation_lag_tau >= 0.0 && m.command_jitter >= 0.0 &&
                        m.state_publish_hz > 0.0 && std::isfinite(m.state_publish_hz) && m.position_quantum >= 0.0;
        if (!ok)
        {
            throw Error(ErrorCode::SchemaViolation, "imperfection model: sigmas, lag, jitter and quantum must be >= 0 and publish rate > 0");
        }
    }

    VehicleAgent::VehicleAgent(const VehicleSpec& spec, FrameTransform transform, const Track& track, ImperfectionModel imperfections)
        : unified_spec_(spec),
          spec_(spec_in_frame(spec, transform)),
          transform_(transform),
          track_(track.scaled(1.0 / transform.scale_to_unified)),
          imperfections_(imperfections),
          noise_rng_(imperfections.rng_seed, kNoiseStream),
          jitter_rng_(imperfections.rng_seed, kJitterStream)
    {
        validate(spec);
        validate(imperfections_);
        if (spec.kind == VehicleKind::EmulatedPhysical)
        {
            spec_.actuator_tau = imperfections_.actuation_lag_tau;
        }
        state_.vehicle_id = spec.vehicle_id;
        state_.frame = transform.frame;
        command_.target_vehicle_id = spec.vehicle_id;
        command_.source_frame = transform.frame;
    }

    void VehicleAgent::place(double arc, double speed, double clock)
    {
        const double k = transform_.scale_to_unified;
        const double local_arc = track_.wrap(arc / k);
        const Point2 p = track_.point_at(local_arc);
        state_.pose = {p.x, p.y, normalize_angle(track_.tangent_at(local_arc))};
        state_.speed = std::clamp(speed / k, 0.0, spec_.max_speed);
        state_.acceleration = 0.0;
        state_.front_wheel_angle = 0.0;
        state_.arc_position = local_arc;
        state_.timestamp = clock;
        command_.desired_speed = state_.speed;
        command_.desired_front_wheel_angle = 0.0;
        next_publish_ = clock;
    }

    void VehicleAgent::receive(const ControlInstruction& cmd)
    {
        if (cmd.source_frame != transform_.frame)
        {
            throw Error(ErrorCode::FrameMismatch, "agent " + spec_.vehicle_id + " received a command in the wrong frame");
        }
        double at = state_.timestamp;
        if (imperfections_.command_jitter > 0.0)
        {
            const double j = imperfections_.command_jitter;
            at += j + jitter_rng_.uniform(-j, j);
        }
        const auto pos = std::upper_bound(pending_.begin(), pending_.end(), at, [](double t, const Pending& p) { return t < p.apply_time; });
        pending_.insert(pos, Pending{at, cmd});
    }

    void VehicleAgent::apply(const ControlInstruction& cmd)
    {
        if (cmd.seq != 0 && cmd.seq <= applied_seq_)
        {
            return; // overtaken by a newer command
        }
        applied_seq_ = cmd.seq;
        command_ = cmd;
    }

    void VehicleAgent::integrate(double dt)
    {
        while (dt > kTimeEps)
        {
            const double h = std::min(dt, kMaxStepDt);
            ControlInstruction cmd = command_;
            VehicleSpec spec = spec_;
            if (interlock_)
            {
                cmd.desired_speed = 0.0;
                spec.actuator_tau = 0.0;
            }
            const double v0 = state_.speed;
            state_ = bicycle_step(state_, spec, cmd, h);
            odometer_ += v0 * h;
            dt -= h;
        }
    }

    void VehicleAgent::step(double dt)
    {
        if (!(dt > 0.0))
        {
            throw Error(ErrorCode::NonPositiveDt, "agent step needs dt > 0");
        }
        const double start = state_.timestamp;
        const double end = start + dt;
        while (!pending_.empty() && pending_.front().apply_time <= end + kTimeEps)
        {
            const Pending p = pending_.front();
            pending_.pop_front();
            const double gap = p.apply_time - state_.timestamp;
            if (gap > kTimeEps)
            {
                integrate(gap);
            }
            apply(p.cmd);
        }
        integrate(end - state_.timestamp);
        state_.timestamp = end; // avoid drift from sub-step sums
        state_.arc_position = project_to_track(state_.pose, track_).arc_position;
    }

    bool VehicleAgent::publish_due() const noexcept { return state_.timestamp + kTimeEps >= next_publish_; }

    VehicleState VehicleAgent::publish()
    {
        const double period = 1.0 / imperfections_.state_publish_hz;
        while (next_publish_ <= state_.timestamp + kTimeEps)
        {
            next_publish_ += period;
        }
        VehicleState out = state_;
        out.pose.x += noise_rng_.normal(imperfections_.position_noise_sigma);
        out.pose.y += noise_rng_.normal(imperfections_.position_noise_sigma);
        out.speed = std::max(0.0, out.speed + noise_rng_.normal(imperfections_.speed_noise_sigma));
        if (const double q = imperfections_.position_quantum; q > 0.0)
        {
            out.pose.x = std::round(out.pose.x / q) * q;
            out.pose.y = std::round(out.pose.y / q) * q;
        }
        if (out.pose != state_.pose)
        {
            out.arc_position = project_to_track(out.pose, track_).arc_position;
        }
        out.seq = ++publish_seq_;
        return out;
    }

    VehicleState VehicleAgent::truth_unified() const { return to_unified(state_, transform_); }
} // namespace twinhub::agents
