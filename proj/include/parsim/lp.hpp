#pragma once

#include "parsim/bytes.hpp"
#include "parsim/event_list.hpp"
#include "parsim/model.hpp"
#include "parsim/types.hpp"

#include <map>
#include <memory>
#include <set>
#include <vector>

namespace parsim
{
    // Group membership as seen by one LP. Membership changes arrive as
    // broadcast events and are applied at their canonical slot, so at any
    // virtual-time point every LP (and the sequential engine) holds the same
    // table.
    class GroupTable
    {
    public:
        GroupTable() = default;
        explicit GroupTable(std::uint32_t n_groups) : members_(n_groups) {}

        void subscribe(GroupId g, EntityId e) { members_.at(g).insert(e); }
        void unsubscribe(GroupId g, EntityId e) { members_.at(g).erase(e); }

        const std::set<EntityId> &members(GroupId g) const
        {
            if (g >= members_.size())
            {
                throw RoutingError("unknown group " + std::to_string(g));
            }
            return members_[g];
        }

        std::uint32_t group_count() const { return static_cast<std::uint32_t>(members_.size()); }

        void save(ByteWriter &w) const
        {
            w.u32(group_count());
            for (const auto &m : members_)
            {
                w.u32(static_cast<std::uint32_t>(m.size()));
                for (auto e : m)
                {
                    w.u32(e);
                }
            }
        }

        void load(ByteReader &r)
        {
            const auto n = r.u32();
            members_.assign(n, {});
            for (std::uint32_t g = 0; g < n; ++g)
            {
                const auto k = r.u32();
                for (std::uint32_t i = 0; i < k; ++i)
                {
                    members_[g].insert(r.u32());
                }
            }
        }

    private:
        std::vector<std::set<EntityId>> members_;
    };

    // A hosted entity replica plus the runtime bookkeeping that has to
    // migrate and roll back with it: the send-sequence counter.
    struct EntityRecord
    {
        std::unique_ptr<Entity> entity;
        std::uint64_t next_send_seq = 0;
    };

    inline Payload save_entity_envelope(const EntityRecord &rec)
    {
        ByteWriter w;
        w.u64(rec.next_send_seq);
        rec.entity->save(w);
        return w.take();
    }

    inline void load_entity_envelope(EntityRecord &rec, const Payload &bytes)
    {
        ByteReader r(bytes);
        rec.next_send_seq = r.u64();
        rec.entity->load(r);
        r.expect_end();
    }

    struct WindowCounters
    {
        std::uint64_t events_processed = 0;
        std::uint64_t remote_sent = 0;
        std::uint64_t remote_received = 0;
        WallClock busy_us = 0;
    };

    // Logical process: the container for entity replicas, its pending-event
    // list and its instrumentation. Engine-specific state (channel clocks,
    // snapshots, logs) lives in the engines.
    struct Lp
    {
        LpId id = 0;
        bool alive = true;
        WallClock crashed_at = 0;

        EventList pending;
        std::map<EntityId, EntityRecord> entities;
        GroupTable groups;

        // Emulated wall clock of this LP's own activity. Never runs behind
        // the global clock; work pushes it forward.
        WallClock cursor_wct = 0;
        WallClock busy_us = 0;
        WindowCounters window;

        bool hosts(EntityId e) const { return entities.count(e) != 0; }

        EntityRecord &record(EntityId e)
        {
            const auto it = entities.find(e);
            if (it == entities.end())
            {
                throw RoutingError("lp " + std::to_string(id) + " does not host entity " +
                                   std::to_string(e));
            }
            return it->second;
        }
    };
} // namespace parsim
