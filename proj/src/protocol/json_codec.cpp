#include "twinhub/protocol/json_codec.hpp"

#include "twinhub/core/error.hpp"

#include <cmath>

namespace twinhub::protocol
{
    namespace
    {
        [[noreturn]] void schema_error(const std::string& what) { throw Error(ErrorCode::SchemaViolation, what); }

        const Json& field(const Json& obj, const char* key, const std::string& path)
        {
            if (!obj.is_object())
            {
                schema_error("'" + path + "' must be an object");
            }
            const auto it = obj.find(key);
            if (it == obj.end())
            {
                schema_error("missing required field '" + path + "." + key + "'");
            }
            return *it;
        }

        double get_number(const Json& obj, const char* key, const std::string& path)
        {
            const Json& v = field(obj, key, path);
            if (!v.is_number())
            {
                schema_error("'" + path + "." + key + "' must be a number");
            }
            return v.get<double>();
        }

        double get_number_or(const Json& obj, const char* key, const std::string& path, double fallback)
        {
            return obj.contains(key) ? get_number(obj, key, path) : fallback;
        }

        std::uint64_t get_u64(const Json& obj, const char* key, const std::string& path)
        {
            const Json& v = field(obj, key, path);
            if (v.is_number_unsigned())
            {
                return v.get<std::uint64_t>();
            }
            if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
            {
                return static_cast<std::uint64_t>(v.get<std::int64_t>());
            }
            schema_error("'" + path + "." + key + "' must be a non-negative integer");
        }

        std::string get_string(const Json& obj, const char* key, const std::string& path)
        {
            const Json& v = field(obj, key, path);
            if (!v.is_string())
            {
                schema_error("'" + path + "." + key + "' must be a string");
            }
            return v.get<std::string>();
        }

        bool get_bool(const Json& obj, const char* key, const std::string& path)
        {
            const Json& v = field(obj, key, path);
            if (!v.is_boolean())
            {
                schema_error("'" + path + "." + key + "' must be a boolean");
            }
            return v.get<bool>();
        }

        std::vector<std::string> get_string_list(const Json& obj, const char* key, const std::string& path)
        {
            std::vector<std::string> out;
            if (!obj.contains(key))
            {
                return out;
            }
            const Json& v = obj.at(key);
            if (!v.is_array())
            {
                schema_error("'" + path + "." + key + "' must be an array of strings");
            }
            for (const auto& item : v)
            {
                if (!item.is_string())
                {
                    schema_error("'" + path + "." + key + "' must be an array of strings");
                }
                out.push_back(item.get<std::string>());
            }
            return out;
        }

        template <typename Enum, typename Parser>
        Enum get_enum(const Json& obj, const char* key, const std::string& path, Parser parse)
        {
            const std::string text = get_string(obj, key, path);
            const auto parsed = parse(text);
            if (!parsed)
            {
                schema_error("'" + path + "." + key + "' has unknown value '" + text + "'");
            }
            return *parsed;
        }

        Json finite(double v, const char* what)
        {
            if (!std::isfinite(v))
            {
                schema_error(std::string("non-finite value in '") + what + "'");
            }
            return Json(v);
        }
    } // namespace

    Json to_json(const VehicleState& s)
    {
        return Json{{"vehicle_id", s.vehicle_id},
                    {"frame", std::string(to_string(s.frame))},
                    {"pose", {{"x", finite(s.pose.x, "pose.x")}, {"y", finite(s.pose.y, "pose.y")}, {"heading", finite(s.pose.heading, "pose.heading")}}},
                    {"speed", finite(s.speed, "speed")},
                    {"acceleration", finite(s.acceleration, "acceleration")},
                    {"front_wheel_angle", finite(s.front_wheel_angle, "front_wheel_angle")},
                    {"arc_position", finite(s.arc_position, "arc_position")},
                    {"timestamp", finite(s.timestamp, "timestamp")},
                    {"seq", s.seq}};
    }

    VehicleState state_from_json(const Json& j, const std::string& path)
    {
        VehicleState s;
        s.vehicle_id = get_string(j, "vehicle_id", path);
        s.frame = get_enum<FrameId>(j, "frame", path, parse_frame);
        const Json& pose = field(j, "pose", path);
        s.pose.x = get_number(pose, "x", path + ".pose");
        s.pose.y = get_number(pose, "y", path + ".pose");
        s.pose.heading = get_number(pose, "heading", path + ".pose");
        s.speed = get_number(j, "speed", path);
        s.acceleration = get_number(j, "acceleration", path);
        s.front_wheel_angle = get_number(j, "front_wheel_angle", path);
        s.arc_position = get_number(j, "arc_position", path);
        s.timestamp = get_number(j, "timestamp", path);
        s.seq = get_u64(j, "seq", path);
        return s;
    }

    Json to_json(const ControlInstruction& c)
    {
        return Json{{"target_vehicle_id", c.target_vehicle_id},
                    {"desired_front_wheel_angle", finite(c.desired_front_wheel_angle, "desired_front_wheel_angle")},
                    {"desired_speed", finite(c.desired_speed, "desired_speed")},
                    {"source_id", c.source_id},
                    {"source_frame", std::string(to_string(c.source_frame))},
                    {"timestamp", finite(c.timestamp, "timestamp")},
                    {"seq", c.seq}};
    }

    ControlInstruction instruction_from_json(const Json& j, const std::string& path)
    {
        ControlInstruction c;
        c.target_vehicle_id = get_string(j, "target_vehicle_id", path);
        c.desired_front_wheel_angle = get_number(j, "desired_front_wheel_angle", path);
        c.desired_speed = get_number(j, "desired_speed", path);
        c.source_id = get_string(j, "source_id", path);
        c.source_frame = get_enum<FrameId>(j, "source_frame", path, parse_frame);
        c.timestamp = get_number(j, "timestamp", path);
        c.seq = get_u64(j, "seq", path);
        return c;
    }

    Json to_json(const VehicleSpec& s)
    {
        return Json{{"vehicle_id", s.vehicle_id},
                    {"kind", std::string(to_string(s.kind))},
                    {"role", std::string(to_string(s.role))},
                    {"body_length", finite(s.body_length, "body_length")},
                    {"wheelbase", finite(s.wheelbase, "wheelbase")},
                    {"max_speed", finite(s.max_speed, "max_speed")},
                    {"max_accel", finite(s.max_accel, "max_accel")},
                    {"max_decel", finite(s.max_decel, "max_decel")},
                    {"max_front_wheel_angle", finite(s.max_front_wheel_angle, "max_front_wheel_angle")},
                    {"actuator_tau", finite(s.actuator_tau, "actuator_tau")}};
    }

    VehicleSpec spec_from_json(const Json& j, const std::string& path)
    {
        VehicleSpec s;
        s.vehicle_id = get_string(j, "vehicle_id", path);
        s.kind = get_enum<VehicleKind>(j, "kind", path, parse_vehicle_kind);
        s.role = get_enum<VehicleRole>(j, "role", path, parse_vehicle_role);
        s.body_length = get_number_or(j, "body_length", path, s.body_length);
        s.wheelbase = get_number_or(j, "wheelbase", path, s.wheelbase);
        s.max_speed = get_number_or(j, "max_speed", path, s.max_speed);
        s.max_accel = get_number_or(j, "max_accel", path, s.max_accel);
        s.max_decel = get_number_or(j, "max_decel", path, s.max_decel);
        s.max_front_wheel_angle = get_number_or(j, "max_front_wheel_angle", path, s.max_front_wheel_angle);
        s.actuator_tau = get_number_or(j, "actuator_tau", path, s.actuator_tau);
        return s;
    }

    namespace
    {
        struct PayloadWriter
        {
            Json operator()(const RegisterPayload& p) const
            {
                Json j{{"entity_kind", std::string(to_string(p.entity_kind))},
                       {"entity_id", p.entity_id},
                       {"capabilities", p.capabilities},
                       {"sources", p.sources}};
                if (p.frame)
                {
                    j["frame"] = std::string(to_string(*p.frame));
                }
                if (p.vehicle)
                {
                    j["vehicle"] = to_json(*p.vehicle);
                }
                return j;
            }
            Json operator()(const RegisterAckPayload& p) const
            {
                return Json{{"entity_id", p.entity_id}, {"accepted", p.accepted}, {"reason", p.reason}, {"hub_time", finite(p.hub_time, "hub_time")}};
            }
            Json operator()(const StateUpdatePayload& p) const { return Json{{"state", to_json(p.state)}}; }
            Json operator()(const StatePoolPayload& p) const
            {
                Json states = Json::array();
                for (const auto& s : p.states)
                {
                    states.push_back(to_json(s));
                }
                return Json{{"pool_timestamp", finite(p.pool_timestamp, "pool_timestamp")}, {"states", std::move(states)}, {"tick", p.tick}};
            }
            Json operator()(const InstructionPayload& p) const { return Json{{"instruction", to_json(p.instruction)}}; }
            Json operator()(const InstructionDispatchPayload& p) const
            {
                return Json{{"instruction", to_json(p.instruction)}, {"tick", p.tick}};
            }
            Json operator()(const AdminCommandPayload& p) const
            {
                return Json{{"command", p.command},
                            {"source_id", p.source_id},
                            {"vehicle_id", p.vehicle_id},
                            {"channel", std::string(to_string(p.channel))},
                            {"force", p.force}};
            }
            Json operator()(const AdminAckPayload& p) const
            {
                return Json{{"command", p.command},
                            {"ok", p.ok},
                            {"error_code", p.error_code},
                            {"message", p.message},
                            {"source_id", p.source_id},
                            {"vehicle_id", p.vehicle_id}};
            }
            Json operator()(const HeartbeatPayload& p) const
            {
                Json j{{"origin_time", finite(p.origin_time, "origin_time")}};
                if (p.reply_time)
                {
                    j["reply_time"] = finite(*p.reply_time, "reply_time");
                }
                return j;
            }
            Json operator()(const ErrorPayload& p) const { return Json{{"code", p.code}, {"message", p.message}}; }
        };

        Payload payload_from_json(MsgType type, const Json& j)
        {
            const std::string path = "payload";
            if (!j.is_object())
            {
                schema_error("'payload' must be an object");
            }
            switch (type)
            {
            case MsgType::Register:
            {
                RegisterPayload p;
                p.entity_kind = get_enum<EntityKind>(j, "entity_kind", path, parse_entity_kind);
                p.entity_id = get_string(j, "entity_id", path);
                if (j.contains("frame"))
                {
                    p.frame = get_enum<FrameId>(j, "frame", path, parse_frame);
                }
                p.capabilities = get_string_list(j, "capabilities", path);
                if (j.contains("vehicle"))
                {
                    p.vehicle = spec_from_json(j.at("vehicle"), path + ".vehicle");
                }
                p.sources = get_string_list(j, "sources", path);
                return p;
            }
            case MsgType::RegisterAck:
                return RegisterAckPayload{get_string(j, "entity_id", path), get_bool(j, "accepted", path), get_string(j, "reason", path),
                                          get_number(j, "hub_time", path)};
            case MsgType::StateUpdate:
                return StateUpdatePayload{state_from_json(field(j, "state", path), path + ".state")};
            case MsgType::StatePool:
            {
                StatePoolPayload p;
                p.pool_timestamp = get_number(j, "pool_timestamp", path);
                p.tick = get_u64(j, "tick", path);
                const Json& states = field(j, "states", path);
                if (!states.is_array())
                {
                    schema_error("'payload.states' must be an array");
                }
                for (std::size_t i = 0; i < states.size(); ++i)
                {
                    p.states.push_back(state_from_json(states[i], path + ".states[" + std::to_string(i) + "]"));
                }
                return p;
            }
            case MsgType::Instruction:
                return InstructionPayload{instruction_from_json(field(j, "instruction", path), path + ".instruction")};
            case MsgType::InstructionDispatch:
                return InstructionDispatchPayload{instruction_from_json(field(j, "instruction", path), path + ".instruction"), get_u64(j, "tick", path)};
            case MsgType::AdminCommand:
                return AdminCommandPayload{get_string(j, "command", path), get_string(j, "source_id", path), get_string(j, "vehicle_id", path),
                                           get_enum<Channel>(j, "channel", path, parse_channel), get_bool(j, "force", path)};
            case MsgType::AdminAck:
                return AdminAckPayload{get_string(j, "command", path),    get_bool(j, "ok", path),          get_string(j, "error_code", path),
                                       get_string(j, "message", path),    get_string(j, "source_id", path), get_string(j, "vehicle_id", path)};
            case MsgType::Heartbeat:
            {
                HeartbeatPayload p;
                p.origin_time = get_number(j, "origin_time", path);
                if (j.contains("reply_time"))
                {
                    p.reply_time = get_number(j, "reply_time", path);
                }
                return p;
            }
            case MsgType::Error:
                return ErrorPayload{get_string(j, "code", path), get_string(j, "message", path)};
            }
            schema_error("unhandled msg_type");
        }
    } // namespace

    Json to_json(const MessageEnvelope& e)
    {
        return Json{{"msg_type", std::string(to_string(e.type()))},
                    {"seq", e.seq},
                    {"timestamp", finite(e.timestamp, "timestamp")},
                    {"payload", std::visit(PayloadWriter{}, e.payload)}};
    }

    MessageEnvelope envelope_from_json(const Json& j)
    {
        if (!j.is_object())
        {
            schema_error("envelope must be a JSON object");
        }
        MessageEnvelope e;
        const MsgType type = get_enum<MsgType>(j, "msg_type", "envelope", parse_msg_type);
        e.seq = get_u64(j, "seq", "envelope");
        e.timestamp = get_number(j, "timestamp", "envelope");
        e.payload = payload_from_json(type, field(j, "payload", "envelope"));
        return e;
    }
} // namespace twinhub::protocol
