#include "twinhub/cli/launch_config.hpp"

#include "twinhub/core/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace twinhub::cli
{
    using nlohmann::json;

    std::string_view to_string(Role role) noexcept
    {
        switch (role)
        {
        case Role::Hub: return "hub";
        case Role::Agent: return "agent";
        case Role::Controller: return "controller";
        case Role::Scenario: return "scenario";
        }
        return "?";
    }

    namespace
    {
        [[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::ConfigParse, msg); }

        const json& typed(const json& doc, const char* key, json::value_t type, const char* what)
        {
            const json& v = doc.at(key);
            const bool number = type == json::value_t::number_float &&
                                (v.is_number_float() || v.is_number_integer() || v.is_number_unsigned());
            if (!number && v.type() != type && !(type == json::value_t::number_unsigned && v.is_number_unsigned()))
            {
                fail(std::string("field '") + key + "': expected " + what);
            }
            return v;
        }

        std::string text(const json& doc, const char* key) { return typed(doc, key, json::value_t::string, "a string").get<std::string>(); }

        net::Endpoint endpoint(const json& doc, const char* key)
        {
            try
            {
                return net::parse_endpoint(text(doc, key));
            }
            catch (const Error& e)
            {
                fail(std::string("field '") + key + "': " + e.what());
            }
        }

        std::filesystem::path path(const json& doc, const char* key, const std::filesystem::path& base)
        {
            std::filesystem::path p = text(doc, key);
            return p.is_relative() && !base.empty() ? base / p : p;
        }
    } // namespace

    LaunchConfig parse_launch_config(const std::string& body, const std::filesystem::path& base_dir)
    {
        json doc;
        try
        {
            doc = json::parse(body);
        }
        catch (const json::parse_error& e)
        {
            fail(std::string("syntax error: ") + e.what());
        }
        if (!doc.is_object())
        {
            fail("launch config must be a JSON object");
        }
        static const std::set<std::string> known{"role", "hub", "socket", "scenario", "vehicle", "bindings", "entity_id",
                                                 "remap", "seed", "mode", "duration", "out", "pool_log"};
        for (const auto& [key, value] : doc.items())
        {
            if (!known.contains(key))
            {
                fail("field '" + key + "': unknown key");
            }
        }
        if (!doc.contains("role"))
        {
            fail("field 'role': required");
        }

        LaunchConfig c;
        const std::string role = text(doc, "role");
        if (role == "hub") c.role = Role::Hub;
        else if (role == "agent") c.role = Role::Agent;
        else if (role == "controller") c.role = Role::Controller;
        else if (role == "scenario") c.role = Role::Scenario;
        else fail("field 'role': expected hub, agent, controller or scenario, got '" + role + "'");

        if (doc.contains("hub")) c.hub = endpoint(doc, "hub");
        if (doc.contains("socket")) c.socket = endpoint(doc, "socket");
        if (doc.contains("scenario")) c.scenario = path(doc, "scenario", base_dir);
        if (doc.contains("vehicle")) c.vehicle = text(doc, "vehicle");
        if (doc.contains("entity_id")) c.entity_id = text(doc, "entity_id");
        if (doc.contains("remap")) c.remap = typed(doc, "remap", json::value_t::boolean, "true or false").get<bool>();
        if (doc.contains("seed")) c.seed = typed(doc, "seed", json::value_t::number_unsigned, "a non-negative integer").get<std::uint64_t>();
        if (doc.contains("duration"))
        {
            c.duration = typed(doc, "duration", json::value_t::number_float, "a number").get<double>();
            if (!(c.duration >= 0.0))
            {
                fail("field 'duration': must be >= 0");
            }
        }
        if (doc.contains("out")) c.out = path(doc, "out", base_dir);
        if (doc.contains("pool_log")) c.pool_log = path(doc, "pool_log", base_dir);
        if (doc.contains("mode"))
        {
            c.mode = text(doc, "mode");
            if (c.mode != "lockstep" && c.mode != "distributed")
            {
                fail("field 'mode': expected lockstep or distributed, got '" + c.mode + "'");
            }
        }
        if (doc.contains("bindings"))
        {
            const std::string b = text(doc, "bindings");
            if (b == "all") c.bindings = BindingSet::All;
            else if (b == "lateral") c.bindings = BindingSet::Lateral;
            else if (b == "longitudinal") c.bindings = BindingSet::Longitudinal;
            else fail("field 'bindings': expected all, lateral or longitudinal, got '" + b + "'");
        }

        const auto need = [&](bool ok, const char* key) {
            if (!ok)
            {
                fail(std::string("field '") + key + "': required for role " + std::string(to_string(c.role)));
            }
        };
        switch (c.role)
        {
        case Role::Agent:
            need(c.hub.has_value(), "hub");
            need(c.scenario.has_value(), "scenario");
            need(!c.vehicle.empty(), "vehicle");
            break;
        case Role::Controller:
            need(c.hub.has_value(), "hub");
            need(c.scenario.has_value(), "scenario");
            break;
        case Role::Scenario:
            need(c.scenario.has_value(), "scenario");
            break;
        case Role::Hub:
            break;
        }
        return c;
    }

    LaunchConfig load_launch_config(const std::filesystem::path& file)
    {
        std::ifstream in(file);
        if (!in)
        {
            throw Error(ErrorCode::IoFailure, "cannot open " + file.string());
        }
        std::ostringstream body;
        body << in.rdbuf();
        try
        {
            return parse_launch_config(body.str(), file.parent_path());
        }
        catch (const Error& e)
        {
            fail(file.string() + ": " + std::string(e.what()).substr(std::string(to_string(e.code())).size() + 2));
        }
    }
} // namespace twinhub::cli
