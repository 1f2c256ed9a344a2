#include "twinhub/core/frame.hpp"

#include "twinhub/core/error.hpp"

#include <string>

namespace twinhub
{
    FrameTable::FrameTable()
        : scales_{{FrameId::Physical, kDefaultPhysicalScale},
                  {FrameId::Virtual, 1.0},
                  {FrameId::InnoLike, 1.0},
                  {FrameId::Unified, 1.0}}
    {
    }

    void FrameTable::set_scale(FrameId frame, double scale)
    {
        if (!(scale > 0.0))
        {
            throw Error(ErrorCode::SchemaViolation, "scale for frame " + std::string(to_string(frame)) + " must be > 0");
        }
        if (frame == FrameId::Unified && scale != 1.0)
        {
            throw Error(ErrorCode::SchemaViolation, "the Unified frame scale is fixed at 1.0");
        }
        scales_[frame] = scale;
    }

    double FrameTable::scale(FrameId frame) const { return scales_.at(frame); }

    namespace
    {
        void require_frame(FrameId actual, FrameId expected)
        {
            if (actual != expected)
            {
                throw Error(ErrorCode::FrameMismatch,
                            "expected frame " + std::string(to_string(expected)) + ", got " + std::string(to_string(actual)));
            }
        }

        template <typename Op>
        VehicleState rescaled(VehicleState s, FrameId frame, Op op)
        {
            s.frame = frame;
            s.pose.x = op(s.pose.x);
            s.pose.y = op(s.pose.y);
            s.speed = op(s.speed);
            s.acceleration = op(s.acceleration);
            s.arc_position = op(s.arc_position);
            return s;
        }
    } // namespace

    VehicleState to_unified(const VehicleState& state, const FrameTransform& transform)
    {
        require_frame(state.frame, transform.frame);
        const double k = transform.scale_to_unified;
        return rescaled(state, FrameId::Unified, [k](double v) { return v * k; });
    }

    VehicleState from_unified(const VehicleState& state, const FrameTransform& transform)
    {
        require_frame(state.frame, FrameId::Unified);
        const double k = transform.scale_to_unified;
        return rescaled(state, transform.frame, [k](double v) { return v / k; });
    }

    ControlInstruction from_unified(const ControlInstruction& instr, const FrameTransform& transform)
    {
        require_frame(instr.source_frame, FrameId::Unified);
        ControlInstruction out = instr;
        out.desired_speed = instr.desired_speed / transform.scale_to_unified;
        out.source_frame = transform.frame;
        return out;
    }

    ControlInstruction to_unified(const ControlInstruction& instr, const FrameTransform& transform)
    {
        require_frame(instr.source_frame, transform.frame);
        ControlInstruction out = instr;
        out.desired_speed = instr.desired_speed * transform.scale_to_unified;
        out.source_frame = FrameId::Unified;
        return out;
    }
} // namespace twinhub
