#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsim
{
    // Model time is an integer tick count. Comparisons stay exact across
    // engines and hosts; models map real units to ticks.
    using SimTime = std::uint64_t;

    // Emulated wall-clock time, in microseconds.
    using WallClock = std::uint64_t;

    using EntityId = std::uint32_t;
    using GroupId = std::uint32_t;
    using LpId = std::uint32_t;

    inline constexpr SimTime kSimTimeMax = UINT64_MAX;

    // Unique per send within a run: send_seq comes from a per-sender counter
    // that is saved and restored with entity state, so a rolled-back send is
    // re-issued with the same id.
    struct EventId
    {
        EntityId sender = 0;
        std::uint64_t send_seq = 0;

        friend auto operator<=>(const EventId &, const EventId &) = default;
    };

    enum class Sign : std::uint8_t
    {
        positive = 0,
        anti = 1,
    };

    struct EventTarget
    {
        enum class Kind : std::uint8_t
        {
            entity = 0,
            group = 1,
        };

        Kind kind = Kind::entity;
        std::uint32_t id = 0;

        static EventTarget entity(EntityId e) { return EventTarget{Kind::entity, e}; }
        static EventTarget group(GroupId g) { return EventTarget{Kind::group, g}; }

        bool is_entity() const { return kind == Kind::entity; }
        bool is_group() const { return kind == Kind::group; }

        friend auto operator<=>(const EventTarget &, const EventTarget &) = default;
    };

    using Payload = std::vector<std::byte>;

    struct Event
    {
        EventId id;
        EntityId source = 0;
        EventTarget target;
        SimTime send_time = 0;
        SimTime recv_time = 0;
        std::uint32_t kind = 0;
        Payload payload;
        Sign sign = Sign::positive;
        // Routing annotation, set by the runtime: true when the delivery
        // crossed LPs. Feeds locality metrics only; never serialized.
        bool routed_remote = false;

        bool well_formed() const { return recv_time > send_time; }
    };

    // Canonical total order on deliveries: (recv_time, target id, sender,
    // send_seq). Independent of arrival order, LP placement and engine, which
    // is what makes parallel committed traces comparable to the sequential
    // one. Group-addressed events are expanded into per-entity deliveries
    // before they ever enter a pending list, so the target here is always a
    // concrete entity.
    struct EventKey
    {
        SimTime recv_time = 0;
        std::uint32_t target = 0;
        EntityId sender = 0;
        std::uint64_t send_seq = 0;

        friend auto operator<=>(const EventKey &, const EventKey &) = default;
    };

    inline EventKey key_of(const Event &e)
    {
        return EventKey{e.recv_time, e.target.id, e.id.sender, e.id.send_seq};
    }

    enum class Ordering
    {
        less,
        equal,
        greater,
    };

    inline Ordering event_order(const Event &a, const Event &b)
    {
        const auto c = key_of(a) <=> key_of(b);
        if (c < 0)
        {
            return Ordering::less;
        }
        return c > 0 ? Ordering::greater : Ordering::equal;
    }

    // Error taxonomy. Config and decode problems are user-facing; contract
    // and routing violations indicate model or engine bugs and abort the run.
    struct ConfigError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct DecodeError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct RoutingError : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct ContractViolation : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    // A run that cannot complete (LP crash without replication, unrecoverable
    // entity, ...). The CLI maps this to exit status 2.
    struct RunFailure : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };
} // namespace parsim
