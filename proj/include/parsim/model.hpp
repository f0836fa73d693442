#pragma once

#include "parsim/bytes.hpp"
#include "parsim/types.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace parsim
{
    // What an entity handler may emit: model events (to an entity or a
    // group) and group membership changes. Everything takes effect at
    // now + delay with delay >= 1; instantaneous effects would break the
    // causal order every engine relies on.
    struct Emission
    {
        enum class Op : std::uint8_t
        {
            event = 0,
            subscribe = 1,
            unsubscribe = 2,
        };

        Op op = Op::event;
        EventTarget target;
        SimTime delay = 1;
        std::uint32_t kind = 0;
        Payload payload;
    };

    // Reserved event kinds for membership changes. Model kinds must stay
    // below this range.
    namespace reserved_kind
    {
        inline constexpr std::uint32_t subscribe = 0xffff0001;
        inline constexpr std::uint32_t unsubscribe = 0xffff0002;
    } // namespace reserved_kind

    // Handler-side view of the world. Deliberately narrow: an entity sees its
    // own id, the current time and its emission buffer — no LP identity, no
    // wall clock, no global state. That shape is what makes placement and
    // engine choice invisible to models.
    class HandlerContext
    {
    public:
        HandlerContext(EntityId self, SimTime now) : self_(self), now_(now) {}

        EntityId self() const { return self_; }
        SimTime now() const { return now_; }

        void send(EntityId to, SimTime delay, std::uint32_t kind, Payload payload = {})
        {
            push(Emission{Emission::Op::event, EventTarget::entity(to), delay, kind, std::move(payload)});
        }

        void send_group(GroupId g, SimTime delay, std::uint32_t kind, Payload payload = {})
        {
            push(Emission{Emission::Op::event, EventTarget::group(g), delay, kind, std::move(payload)});
        }

        void subscribe(GroupId g, SimTime delay)
        {
            push(Emission{Emission::Op::subscribe, EventTarget::group(g), delay, reserved_kind::subscribe, {}});
        }

        void unsubscribe(GroupId g, SimTime delay)
        {
            push(Emission{Emission::Op::unsubscribe, EventTarget::group(g), delay, reserved_kind::unsubscribe, {}});
        }

        std::vector<Emission> take() { return std::move(emissions_); }

    private:
        void push(Emission e)
        {
            if (e.delay == 0)
            {
                throw ContractViolation("entity " + std::to_string(self_) +
                                        " emitted an event with recv_time <= now");
            }
            emissions_.push_back(std::move(e));
        }

        EntityId self_;
        SimTime now_;
        std::vector<Emission> emissions_;
    };

    // A simulated entity: a deterministic state machine over delivered
    // events. State (including the rng position) must round-trip through
    // save/load exactly — migration and replication depend on it.
    class Entity
    {
    public:
        virtual ~Entity() = default;

        virtual void handle(const Event &e, HandlerContext &ctx) = 0;
        virtual void save(ByteWriter &w) const = 0;
        virtual void load(ByteReader &r) = 0;
    };

    struct BootstrapEvent
    {
        EntityId sender = 0;
        EventTarget target;
        SimTime recv_time = 1;
        std::uint32_t kind = 0;
        Payload payload;
    };

    struct Bootstrap
    {
        std::vector<BootstrapEvent> events;
        std::vector<std::pair<GroupId, EntityId>> memberships;
    };

    // Model factory: topology plus initial conditions. Instances are
    // immutable after construction and shared by every LP, so nothing in
    // here may mutate during a run.
    class Model
    {
    public:
        virtual ~Model() = default;

        virtual std::string name() const = 0;
        virtual std::uint32_t entity_count() const = 0;
        virtual std::uint32_t group_count() const = 0;
        virtual std::unique_ptr<Entity> create_entity(EntityId id) const = 0;
        virtual Bootstrap bootstrap() const = 0;

        // Minimum emission delay the model guarantees, in ticks. The
        // conservative engine uses it as lookahead.
        virtual SimTime min_delay() const { return 1; }
    };
} // namespace parsim
