#pragma once

#include "parsim/rng.hpp"
#include "parsim/types.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace parsim
{
    enum class Placement
    {
        round_robin,
        block,
        random,
    };

    inline Placement parse_placement(const std::string &s)
    {
        if (s == "round_robin")
        {
            return Placement::round_robin;
        }
        if (s == "block")
        {
            return Placement::block;
        }
        if (s == "random")
        {
            return Placement::random;
        }
        throw ConfigError("unknown placement: " + s);
    }

    // Replica group of one entity. With replication factor 1 this is just
    // the entity's home LP; with r > 1 each replica runs on a distinct LP.
    struct VseGroup
    {
        EntityId entity = 0;
        std::vector<LpId> replicas; // index = replica number
        std::vector<char> live;     // parallel to replicas

        std::uint32_t live_count() const
        {
            return static_cast<std::uint32_t>(std::count(live.begin(), live.end(), 1));
        }

        bool replica_live(std::size_t idx) const { return live[idx] != 0; }

        // Home of the entity for single-replica semantics: the first live
        // replica's LP.
        LpId primary_lp() const
        {
            for (std::size_t i = 0; i < replicas.size(); ++i)
            {
                if (live[i])
                {
                    return replicas[i];
                }
            }
            throw RunFailure("entity " + std::to_string(entity) + " has no live replica");
        }

        bool hosted_on(LpId lp) const
        {
            for (std::size_t i = 0; i < replicas.size(); ++i)
            {
                if (live[i] && replicas[i] == lp)
                {
                    return true;
                }
            }
            return false;
        }
    };

    // Entity -> replica group map. The coordinator owns the master copy and
    // only rewrites it at globally safe points, so every LP routes against a
    // consistent view.
    class Directory
    {
    public:
        Directory() = default;

        Directory(std::uint32_t n_entities, std::uint32_t n_replicas, std::uint32_t n_lps,
                  Placement placement, std::uint64_t seed)
        {
            if (n_lps == 0)
            {
                throw ConfigError("directory: need at least one LP");
            }
            if (n_replicas == 0 || n_replicas > n_lps)
            {
                throw ConfigError("directory: replicas must satisfy 1 <= r <= n_lps (r=" +
                                  std::to_string(n_replicas) + ", n_lps=" + std::to_string(n_lps) + ")");
            }
            n_lps_ = n_lps;
            groups_.resize(n_entities);

            std::vector<LpId> base(n_entities);
            switch (placement)
            {
            case Placement::round_robin:
                for (EntityId i = 0; i < n_entities; ++i)
                {
                    base[i] = i % n_lps;
                }
                break;
            case Placement::block:
            {
                const std::uint32_t per = (n_entities + n_lps - 1) / n_lps;
                for (EntityId i = 0; i < n_entities; ++i)
                {
                    base[i] = std::min(i / std::max(per, 1u), n_lps - 1);
                }
                break;
            }
            case Placement::random:
            {
                RngStream rng(derive_key(seed, rng_domain::placement));
                for (EntityId i = 0; i < n_entities; ++i)
                {
                    base[i] = static_cast<LpId>(rng.next_below(n_lps));
                }
                break;
            }
            }

            for (EntityId i = 0; i < n_entities; ++i)
            {
                auto &g = groups_[i];
                g.entity = i;
                for (std::uint32_t r = 0; r < n_replicas; ++r)
                {
                    g.replicas.push_back((base[i] + r) % n_lps);
                }
                g.live.assign(n_replicas, 1);
            }
        }

        std::uint32_t entity_count() const { return static_cast<std::uint32_t>(groups_.size()); }
        std::uint32_t lp_count() const { return n_lps_; }

        const VseGroup &group(EntityId e) const
        {
            if (e >= groups_.size())
            {
                throw RoutingError("unknown entity " + std::to_string(e));
            }
            return groups_[e];
        }

        VseGroup &group_mut(EntityId e)
        {
            if (e >= groups_.size())
            {
                throw RoutingError("unknown entity " + std::to_string(e));
            }
            return groups_[e];
        }

        LpId primary_lp(EntityId e) const { return group(e).primary_lp(); }

        void move_replica(EntityId e, std::size_t replica_idx, LpId to)
        {
            auto &g = group_mut(e);
            for (std::size_t i = 0; i < g.replicas.size(); ++i)
            {
                if (i != replica_idx && g.live[i] && g.replicas[i] == to)
                {
                    throw RoutingError("replica collision while migrating entity " + std::to_string(e));
                }
            }
            g.replicas[replica_idx] = to;
            g.live[replica_idx] = 1;
        }

        // Brings a dead replica slot back on a fresh LP (re-replication).
        void revive_replica(EntityId e, std::size_t replica_idx, LpId to)
        {
            auto &g = group_mut(e);
            if (g.live[replica_idx])
            {
                throw RoutingError("revive_replica: slot is live");
            }
            for (std::size_t i = 0; i < g.replicas.size(); ++i)
            {
                if (i != replica_idx && g.live[i] && g.replicas[i] == to)
                {
                    throw RoutingError("revive_replica: collision on lp " + std::to_string(to));
                }
            }
            g.replicas[replica_idx] = to;
            g.live[replica_idx] = 1;
        }

        // Marks every replica hosted on a crashed LP dead. Returns the first
        // entity that lost its last replica, if any.
        std::vector<EntityId> mark_lp_dead(LpId lp)
        {
            std::vector<EntityId> unrecoverable;
            for (auto &g : groups_)
            {
                bool changed = false;
                for (std::size_t i = 0; i < g.replicas.size(); ++i)
                {
                    if (g.live[i] && g.replicas[i] == lp)
                    {
                        g.live[i] = 0;
                        changed = true;
                    }
                }
                if (changed && g.live_count() == 0)
                {
                    unrecoverable.push_back(g.entity);
                }
            }
            return unrecoverable;
        }

        std::vector<std::uint32_t> replica_counts() const
        {
            std::vector<std::uint32_t> counts(n_lps_, 0);
            for (const auto &g : groups_)
            {
                for (std::size_t i = 0; i < g.replicas.size(); ++i)
                {
                    if (g.live[i])
                    {
                        ++counts[g.replicas[i]];
                    }
                }
            }
            return counts;
        }

    private:
        std::uint32_t n_lps_ = 0;
        std::vector<VseGroup> groups_;
    };
} // namespace parsim
