#pragma once

#include "parsim/directory.hpp"
#include "parsim/rng.hpp"
#include "parsim/run_config.hpp"
#include "parsim/types.hpp"

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace parsim
{
    enum class MigrationReason
    {
        clustering,
        load,
        forced,
    };

    inline std::string to_string(MigrationReason r)
    {
        switch (r)
        {
        case MigrationReason::clustering: return "clustering";
        case MigrationReason::load: return "load";
        case MigrationReason::forced: return "forced";
        }
        return "?";
    }

    struct PlanEntry
    {
        EntityId entity = 0;
        std::uint32_t replica_idx = 0;
        LpId from = 0;
        LpId to = 0;
        MigrationReason reason = MigrationReason::clustering;
    };

    // The adaptive layer: sliding-window communication patterns per VSE,
    // clustering and load heuristics, and per-round migration plans. Runs in
    // the coordinator at safe points only; it reads immutable snapshots and
    // emits a plan for the engine to execute.
    class GaiaController
    {
    public:
        GaiaController(const RunConfig &cfg)
            : cfg_(cfg.gaia), cap_(cfg.migration_cap()), n_lps_(cfg.n_lps),
              forced_rng_(derive_key(cfg.seed, rng_domain::forced_migration))
        {
        }

        // Records one committed send of a VSE toward a destination LP.
        // Engines with irrevocable sends call this at emission; Time Warp
        // replays its send log when the send commits.
        void record(EntityId source, LpId source_lp, LpId dest_lp, const Directory &dir)
        {
            const auto idx = replica_index(dir, source, source_lp);
            if (!idx)
            {
                return; // source replica no longer on that LP (stale feed)
            }
            auto &w = patterns_[vse_key(source, *idx)];
            if (w.rounds.empty())
            {
                w.rounds.emplace_back();
            }
            ++w.rounds.back()[dest_lp];
        }

        // One evaluation round. `loads` is the busy fraction of the last
        // window per LP, `alive` the liveness mask, `state_size` yields the
        // serialized size of a hosted replica. Returns a bounded plan.
        std::vector<PlanEntry> round(std::uint32_t round_no, const Directory &dir,
                                     const std::vector<double> &loads,
                                     const std::vector<bool> &alive,
                                     const std::function<std::size_t(EntityId, LpId)> &state_size)
        {
            rotate();
            if (cfg_.mode == GaiaConfig::Mode::forced_random)
            {
                return forced_plan(round_no, dir, alive);
            }

            std::vector<PlanEntry> plan;
            std::map<EntityId, bool> planned;

            // Load balancing first: when an LP is overloaded, shedding work
            // beats clustering.
            evaluate_load(round_no, dir, loads, alive, plan, planned);

            // Then clustering proposals fill the remaining budget.
            for (EntityId e = 0; e < dir.entity_count() && plan.size() < cap_; ++e)
            {
                if (planned.count(e))
                {
                    continue;
                }
                const auto &g = dir.group(e);
                for (std::uint32_t idx = 0; idx < g.replicas.size(); ++idx)
                {
                    if (!g.live[idx])
                    {
                        continue;
                    }
                    auto entry =
                        evaluate_clustering(round_no, dir, e, idx, g.replicas[idx], state_size);
                    if (entry)
                    {
                        plan.push_back(*entry);
                        planned[e] = true;
                        if (plan.size() >= cap_)
                        {
                            break;
                        }
                    }
                }
            }
            return plan;
        }

        void on_executed(const PlanEntry &entry, std::uint32_t round_no)
        {
            last_migration_[vse_key(entry.entity, entry.replica_idx)] = round_no;
            log_.push_back(std::to_string(round_no) + "," + std::to_string(entry.entity) + "," +
                           std::to_string(entry.from) + "," + std::to_string(entry.to) + "," +
                           to_string(entry.reason));
        }

        const std::vector<std::string> &log() const { return log_; }

        // Windowed destination counts of one VSE (exposed for tests).
        std::map<LpId, std::uint64_t> windowed_counts(EntityId e, std::uint32_t replica_idx) const
        {
            std::map<LpId, std::uint64_t> c;
            const auto it = patterns_.find(vse_key(e, replica_idx));
            if (it == patterns_.end())
            {
                return c;
            }
            for (const auto &round : it->second.rounds)
            {
                for (const auto &[lp, n] : round)
                {
                    c[lp] += n;
                }
            }
            return c;
        }

    private:
        struct PatternWindow
        {
            std::deque<std::map<LpId, std::uint64_t>> rounds; // back = current round
        };

        static std::uint64_t vse_key(EntityId e, std::uint32_t idx)
        {
            return (static_cast<std::uint64_t>(e) << 8) | idx;
        }

        static std::optional<std::uint32_t> replica_index(const Directory &dir, EntityId e, LpId lp)
        {
            const auto &g = dir.group(e);
            for (std::uint32_t i = 0; i < g.replicas.size(); ++i)
            {
                if (g.live[i] && g.replicas[i] == lp)
                {
                    return i;
                }
            }
            return std::nullopt;
        }

        void rotate()
        {
            for (auto &[key, w] : patterns_)
            {
                w.rounds.emplace_back();
                while (w.rounds.size() > cfg_.window + 1)
                {
                    w.rounds.pop_front();
                }
            }
        }

        // Sums over the completed rounds of the window (everything but the
        // freshly opened current round).
        std::map<LpId, std::uint64_t> window_sums(std::uint64_t key) const
        {
            std::map<LpId, std::uint64_t> c;
            const auto it = patterns_.find(key);
            if (it == patterns_.end())
            {
                return c;
            }
            const auto &rounds = it->second.rounds;
            for (std::size_t i = 0; i + 1 < rounds.size(); ++i)
            {
                for (const auto &[lp, n] : rounds[i])
                {
                    c[lp] += n;
                }
            }
            return c;
        }

        bool residency_ok(std::uint64_t key, std::uint32_t round_no) const
        {
            const auto it = last_migration_.find(key);
            if (it == last_migration_.end())
            {
                return true;
            }
            return round_no >= it->second + cfg_.residency;
        }

        std::optional<PlanEntry>
        evaluate_clustering(std::uint32_t round_no, const Directory &dir, EntityId e,
                            std::uint32_t idx, LpId home,
                            const std::function<std::size_t(EntityId, LpId)> &state_size)
        {
            const auto key = vse_key(e, idx);
            const auto counts = window_sums(key);
            std::uint64_t total = 0;
            for (const auto &[lp, n] : counts)
            {
                total += n;
            }
            if (total == 0)
            {
                return std::nullopt; // no traffic: stay
            }
            LpId best = home;
            std::uint64_t best_n = 0;
            const auto home_it = counts.find(home);
            const std::uint64_t home_n = home_it == counts.end() ? 0 : home_it->second;
            for (const auto &[lp, n] : counts)
            {
                if (n > best_n || (n == best_n && lp < best))
                {
                    best = lp;
                    best_n = n;
                }
            }
            if (best == home)
            {
                return std::nullopt;
            }
            const double frac = static_cast<double>(best_n) / static_cast<double>(total);
            if (frac <= cfg_.alpha)
            {
                return std::nullopt;
            }
            if (!residency_ok(key, round_no))
            {
                return std::nullopt;
            }
            // Migration pays off only when the windowed remote-traffic saving
            // beats the serialization cost of the move.
            const double benefit = static_cast<double>(best_n - home_n);
            const double cost =
                cfg_.migration_cost_weight * static_cast<double>(state_size(e, home));
            if (benefit <= cost)
            {
                return std::nullopt;
            }
            // A replica may not land on an LP hosting a sibling replica.
            const auto &g = dir.group(e);
            for (std::uint32_t i = 0; i < g.replicas.size(); ++i)
            {
                if (i != idx && g.live[i] && g.replicas[i] == best)
                {
                    return std::nullopt;
                }
            }
            return PlanEntry{e, idx, home, best, MigrationReason::clustering};
        }

        void evaluate_load(std::uint32_t round_no, const Directory &dir,
                           const std::vector<double> &loads, const std::vector<bool> &alive,
                           std::vector<PlanEntry> &plan, std::map<EntityId, bool> &planned)
        {
            // Mean over live LPs.
            double sum = 0.0;
            std::uint32_t live = 0;
            for (LpId l = 0; l < n_lps_ && l < loads.size(); ++l)
            {
                if (l < alive.size() && alive[l])
                {
                    sum += loads[l];
                    ++live;
                }
            }
            if (live == 0)
            {
                return;
            }
            const double mean = sum / static_cast<double>(live);
            const double threshold = (1.0 + cfg_.delta) * mean;
            if (mean <= 0.0)
            {
                return;
            }

            // Overloaded LPs, heaviest first.
            std::vector<LpId> overloaded;
            for (LpId l = 0; l < n_lps_ && l < loads.size(); ++l)
            {
                if (l < alive.size() && alive[l] && loads[l] > threshold)
                {
                    overloaded.push_back(l);
                }
            }
            std::sort(overloaded.begin(), overloaded.end(), [&](LpId a, LpId b) {
                return loads[a] != loads[b] ? loads[a] > loads[b] : a < b;
            });

            for (const LpId from : overloaded)
            {
                // Hosted VSEs by ascending home affinity; only weakly
                // attached ones are worth evicting, strongly attached ones
                // would be pulled straight back by clustering.
                struct Candidate
                {
                    EntityId entity;
                    std::uint32_t idx;
                    double affinity;
                    std::uint64_t traffic;
                };
                std::vector<Candidate> candidates;
                std::uint64_t lp_traffic = 0;
                for (EntityId e = 0; e < dir.entity_count(); ++e)
                {
                    const auto ridx = replica_index(dir, e, from);
                    if (!ridx)
                    {
                        continue;
                    }
                    const auto counts = window_sums(vse_key(e, *ridx));
                    std::uint64_t total = 0;
                    std::uint64_t home = 0;
                    for (const auto &[lp, n] : counts)
                    {
                        total += n;
                        if (lp == from)
                        {
                            home = n;
                        }
                    }
                    lp_traffic += total;
                    const double affinity =
                        total == 0 ? 1.0
                                   : static_cast<double>(home) / static_cast<double>(total);
                    candidates.push_back(Candidate{e, *ridx, affinity, total});
                }
                std::sort(candidates.begin(), candidates.end(), [](const auto &a, const auto &b) {
                    return a.affinity != b.affinity ? a.affinity < b.affinity
                                                    : a.entity < b.entity;
                });

                double projected = loads[from];
                for (const auto &cand : candidates)
                {
                    if (plan.size() >= cap_ || projected <= threshold)
                    {
                        break;
                    }
                    if (cand.affinity >= cfg_.alpha)
                    {
                        break; // the rest are at least as attached
                    }
                    if (planned.count(cand.entity) ||
                        !residency_ok(vse_key(cand.entity, cand.idx), round_no))
                    {
                        continue;
                    }
                    const LpId to =
                        pick_least_loaded(dir, loads, alive, cand.entity, cand.idx, from);
                    if (to == from)
                    {
                        continue;
                    }
                    plan.push_back(PlanEntry{cand.entity, cand.idx, from, to, MigrationReason::load});
                    planned[cand.entity] = true;
                    const double share =
                        lp_traffic == 0 ? 0.0
                                        : static_cast<double>(cand.traffic) /
                                              static_cast<double>(lp_traffic);
                    projected -= loads[from] * share;
                }
            }
        }

        LpId pick_least_loaded(const Directory &dir, const std::vector<double> &loads,
                               const std::vector<bool> &alive, EntityId e, std::uint32_t idx,
                               LpId from) const
        {
            std::vector<LpId> order;
            for (LpId l = 0; l < n_lps_; ++l)
            {
                if (l < alive.size() && alive[l])
                {
                    order.push_back(l);
                }
            }
            std::sort(order.begin(), order.end(), [&](LpId a, LpId b) {
                const double la = a < loads.size() ? loads[a] : 0.0;
                const double lb = b < loads.size() ? loads[b] : 0.0;
                return la != lb ? la < lb : a < b;
            });
            const auto &g = dir.group(e);
            for (const LpId l : order)
            {
                if (l == from)
                {
                    continue;
                }
                bool collision = false;
                for (std::uint32_t i = 0; i < g.replicas.size(); ++i)
                {
                    if (i != idx && g.live[i] && g.replicas[i] == l)
                    {
                        collision = true;
                        break;
                    }
                }
                if (!collision)
                {
                    return l;
                }
            }
            return from;
        }

        std::vector<PlanEntry> forced_plan(std::uint32_t round_no, const Directory &dir,
                                           const std::vector<bool> &alive)
        {
            std::vector<PlanEntry> plan;
            std::map<EntityId, bool> planned;
            for (std::uint32_t i = 0; i < cfg_.forced_per_round && plan.size() < cap_; ++i)
            {
                const auto e = static_cast<EntityId>(forced_rng_.next_below(dir.entity_count()));
                const auto &g = dir.group(e);
                const auto idx = static_cast<std::uint32_t>(forced_rng_.next_below(g.replicas.size()));
                if (!g.live[idx] || planned.count(e))
                {
                    continue;
                }
                const LpId from = g.replicas[idx];
                bool found = false;
                LpId to = from;
                for (int attempt = 0; attempt < 8 && !found; ++attempt)
                {
                    to = static_cast<LpId>(forced_rng_.next_below(n_lps_));
                    if (to == from || (to < alive.size() && !alive[to]))
                    {
                        continue;
                    }
                    bool collision = false;
                    for (std::uint32_t j = 0; j < g.replicas.size(); ++j)
                    {
                        if (j != idx && g.live[j] && g.replicas[j] == to)
                        {
                            collision = true;
                            break;
                        }
                    }
                    found = !collision;
                }
                if (found)
                {
                    plan.push_back(PlanEntry{e, idx, from, to, MigrationReason::forced});
                    planned[e] = true;
                }
            }
            (void)round_no;
            return plan;
        }

        GaiaConfig cfg_;
        std::uint32_t cap_ = 1;
        std::uint32_t n_lps_ = 1;
        RngStream forced_rng_;
        std::unordered_map<std::uint64_t, PatternWindow> patterns_;
        std::unordered_map<std::uint64_t, std::uint32_t> last_migration_;
        std::vector<std::string> log_;
    };
} // namespace parsim
