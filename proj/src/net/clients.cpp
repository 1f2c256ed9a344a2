#include "twinhub/net/clients.hpp"

#include "twinhub/core/error.hpp"

#include <boost/asio/post.hpp>
#include <boost/asio/steady_timer.hpp>

#include <spdlog/spdlog.h>

#include <chrono>

namespace twinhub::net
{
    namespace asio = boost::asio;
    using namespace protocol;

    ClientBase::ClientBase(asio::io_context& io, Endpoint hub, bool websocket)
        : io_(io), hub_(std::move(hub)), websocket_(websocket), epoch_(monotonic_seconds())
    {
    }

    ClientBase::~ClientBase() { detach(); }

    void ClientBase::detach()
    {
        stop();
        std::lock_guard lock(guard_->mutex);
        guard_->alive = false;
    }

    double ClientBase::local_time() const { return monotonic_seconds() - epoch_; }

    void ClientBase::start(double timeout)
    {
        link_ = websocket_ ? connect_socket(io_, hub_) : connect_stream(io_, hub_);
        auto ack = ack_.get_future();
        link_->start(
            [this, g = guard_](const MessageEnvelope& env) {
                std::lock_guard lock(g->mutex);
                if (g->alive)
                {
                    dispatch(env);
                }
            },
            [this, g = guard_](const std::string& why) {
                         std::lock_guard lock(g->mutex);
                         if (!g->alive)
                         {
                             return;
                         }
                         if (!stopping_)
                         {
                             lost_ = true;
                             spdlog::warn("connection to hub {} lost: {}", hub_.str(), why);
                         }
                         if (!registered_.exchange(true))
                         {
                             ack_.set_value(RegisterAckPayload{"", false, "connection closed: " + why, 0.0});
                         }
                     });
        const RegisterPayload reg = registration();
        send(reg);
        if (ack.wait_for(std::chrono::duration<double>(timeout)) != std::future_status::ready)
        {
            link_->close();
            throw Error(ErrorCode::IoFailure, "no registration ack from " + hub_.str() + " within " + std::to_string(timeout) + " s");
        }
        const RegisterAckPayload got = ack.get();
        if (!got.accepted)
        {
            link_->close();
            throw Error(ErrorCode::DuplicateEntity, "registration of '" + reg.entity_id + "' rejected: " + got.reason);
        }
        asio::post(io_, [this, g = guard_] {
            std::lock_guard lock(g->mutex);
            if (g->alive)
            {
                on_registered();
            }
        });
    }

    void ClientBase::stop()
    {
        stopping_ = true;
        if (link_)
        {
            link_->close();
        }
    }

    void ClientBase::send(Payload payload)
    {
        if (link_)
        {
            link_->send(std::move(payload), local_time());
        }
    }

    void ClientBase::dispatch(const MessageEnvelope& env)
    {
        if (const auto* ack = std::get_if<RegisterAckPayload>(&env.payload))
        {
            if (!registered_.exchange(true))
            {
                ack_.set_value(*ack);
            }
            return;
        }
        if (const auto* hb = std::get_if<HeartbeatPayload>(&env.payload); hb && !hb->reply_time)
        {
            send(HeartbeatPayload{hb->origin_time, local_time()});
            return;
        }
        if (const auto* err = std::get_if<ErrorPayload>(&env.payload))
        {
            spdlog::warn("hub error: {}: {}", err->code, err->message);
            return;
        }
        on_message(env);
    }

    // AgentClient

    struct AgentClient::Timer
    {
        explicit Timer(asio::io_context& io) : timer(io) {}
        asio::steady_timer timer;
        std::chrono::steady_clock::time_point next;
    };

    AgentClient::AgentClient(asio::io_context& io, Endpoint hub, AgentOptions options)
        : ClientBase(io, std::move(hub)),
          options_(std::move(options)),
          agent_(options_.spec, options_.frames.transform(options_.frame), options_.track, options_.imperfections),
          timer_(std::make_shared<Timer>(io))
    {
    }

    AgentClient::~AgentClient() { detach(); }

    RegisterPayload AgentClient::registration() const
    {
        RegisterPayload r;
        r.entity_kind = EntityKind::VehicleAgent;
        r.entity_id = options_.spec.vehicle_id;
        r.frame = options_.frame;
        r.vehicle = options_.spec;
        r.capabilities = {std::string(to_string(options_.spec.kind))};
        return r;
    }

    void AgentClient::on_registered()
    {
        agent_.place(options_.initial_arc, options_.initial_speed, local_time());
        timer_->next = std::chrono::steady_clock::now();
        tick();
    }

    void AgentClient::tick()
    {
        const double now = local_time();
        const double dt = now - agent_.clock();
        if (dt > 0.0)
        {
            agent_.step(dt);
        }
        if (agent_.publish_due() && connected())
        {
            send(StateUpdatePayload{agent_.publish()});
            ++published_;
        }
        const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(1.0 / options_.step_hz));
        timer_->next += period;
        if (timer_->next < std::chrono::steady_clock::now())
        {
            timer_->next = std::chrono::steady_clock::now() + period;
        }
        timer_->timer.expires_at(timer_->next);
        timer_->timer.async_wait([this, t = timer_, g = guard()](const boost::system::error_code& ec) {
            std::lock_guard lock(g->mutex);
            if (!ec && g->alive && connected())
            {
                tick();
            }
        });
    }

    void AgentClient::on_message(const MessageEnvelope& env)
    {
        if (const auto* d = std::get_if<InstructionDispatchPayload>(&env.payload))
        {
            agent_.receive(d->instruction);
            ++commands_;
        }
    }

    // ControllerClient

    ControllerClient::ControllerClient(asio::io_context& io, Endpoint hub, std::string entity_id, controllers::ControllerHostConfig config)
        : ClientBase(io, std::move(hub)), entity_id_(std::move(entity_id)), host_(std::move(config))
    {
    }

    RegisterPayload ControllerClient::registration() const
    {
        RegisterPayload r;
        r.entity_kind = EntityKind::Controller;
        r.entity_id = entity_id_;
        r.sources = host_.source_ids();
        return r;
    }

    void ControllerClient::on_message(const MessageEnvelope& env)
    {
        const auto* pool = std::get_if<StatePoolPayload>(&env.payload);
        if (!pool)
        {
            return;
        }
        ++pools_;
        {
            std::lock_guard lock(mutex_);
            if (failure_)
            {
                return;
            }
        }
        try
        {
            for (auto& instr : host_.on_pool(*pool))
            {
                send(InstructionPayload{std::move(instr)});
            }
        }
        catch (const Error& e)
        {
            spdlog::error("controller '{}': {}", entity_id_, e.what());
            std::lock_guard lock(mutex_);
            failure_ = std::current_exception();
        }
        std::lock_guard lock(mutex_);
        trigger_time_ = host_.trigger_time();
        settled_at_ = host_.settled_at();
    }

    std::exception_ptr ControllerClient::failure() const
    {
        std::lock_guard lock(mutex_);
        return failure_;
    }

    std::optional<double> ControllerClient::trigger_time() const
    {
        std::lock_guard lock(mutex_);
        return trigger_time_;
    }

    std::optional<double> ControllerClient::settled_at() const
    {
        std::lock_guard lock(mutex_);
        return settled_at_;
    }

    // ObserverClient

    ObserverClient::ObserverClient(asio::io_context& io, Endpoint hub, std::string entity_id, PoolHandler on_pool, bool websocket)
        : ClientBase(io, std::move(hub), websocket), entity_id_(std::move(entity_id)), on_pool_(std::move(on_pool))
    {
    }

    RegisterPayload ObserverClient::registration() const
    {
        RegisterPayload r;
        r.entity_kind = EntityKind::Observer;
        r.entity_id = entity_id_;
        return r;
    }

    void ObserverClient::on_message(const MessageEnvelope& env)
    {
        if (const auto* pool = std::get_if<StatePoolPayload>(&env.payload); pool && on_pool_)
        {
            on_pool_(*pool);
        }
    }

    // AdminClient

    AdminClient::AdminClient(asio::io_context& io, Endpoint hub, std::string entity_id)
        : ClientBase(io, std::move(hub)), entity_id_(std::move(entity_id))
    {
    }

    RegisterPayload AdminClient::registration() const
    {
        RegisterPayload r;
        r.entity_kind = EntityKind::Admin;
        r.entity_id = entity_id_;
        return r;
    }

    AdminAckPayload AdminClient::command(const AdminCommandPayload& cmd, double timeout)
    {
        std::future<AdminAckPayload> ack;
        {
            std::lock_guard lock(mutex_);
            pending_.emplace();
            ack = pending_->get_future();
        }
        send(cmd);
        if (ack.wait_for(std::chrono::duration<double>(timeout)) != std::future_status::ready)
        {
            std::lock_guard lock(mutex_);
            pending_.reset();
            throw Error(ErrorCode::IoFailure, "no ack for admin command '" + cmd.command + "'");
        }
        return ack.get();
    }

    void AdminClient::on_message(const MessageEnvelope& env)
    {
        if (const auto* ack = std::get_if<AdminAckPayload>(&env.payload))
        {
            std::lock_guard lock(mutex_);
            if (pending_)
            {
                pending_->set_value(*ack);
                pending_.reset();
            }
        }
    }
} // namespace twinhub::net
