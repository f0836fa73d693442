#pragma once

#include "parsim/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace parsim
{
    // Pay-per-use pricing: compute time actually burned, messages actually
    // moved, and plain instance rental while allocated. All prices >= 0.
    struct PricingScheme
    {
        double price_per_lp_second = 0.0;
        double price_per_remote_message = 0.0;
        double price_per_lp_instance_second = 0.0;

        void validate() const
        {
            if (price_per_lp_second < 0.0 || price_per_remote_message < 0.0 ||
                price_per_lp_instance_second < 0.0)
            {
                throw ConfigError("pricing: prices must be >= 0");
            }
        }
    };

    struct CostBreakdown
    {
        double compute = 0.0;
        double comm = 0.0;
        double rental = 0.0;

        double total() const { return compute + comm + rental; }
    };

    // One instrumentation window of one LP.
    struct LpWindow
    {
        std::uint32_t window = 0;
        LpId lp = 0;
        std::uint64_t events_processed = 0;
        WallClock busy_us = 0;
        WallClock idle_us = 0;
        std::uint64_t remote_sent = 0;
        std::uint64_t remote_received = 0;
        std::uint32_t entities = 0;
    };

    struct RunReport
    {
        std::string engine;
        bool completed = false;
        std::string failure;

        WallClock wct_us = 0;
        std::uint64_t committed_events = 0;
        std::uint64_t total_processed = 0; // includes work later rolled back
        std::uint64_t null_messages = 0;
        std::uint64_t rollbacks = 0;
        std::uint64_t anti_messages = 0;
        std::uint64_t remote_messages = 0; // routed deliveries that crossed LPs
        std::uint64_t local_messages = 0;  // routed deliveries that stayed local
        std::uint64_t channel_messages = 0; // physical messages, incl. nulls/antis/control
        std::uint64_t migrations = 0;
        std::uint64_t replication_dedup_drops = 0;
        std::uint64_t gvt_rounds = 0;

        // Committed deliveries bucketed by recv_time quarter of the run
        // horizon; [1] is remote-only, [0] is everything.
        std::array<std::uint64_t, 4> committed_by_quarter{};
        std::array<std::uint64_t, 4> committed_remote_by_quarter{};

        std::vector<WallClock> lp_busy_us;      // per LP, whole run
        std::vector<WallClock> lp_allocated_us; // per LP: until crash or run end
        std::vector<LpWindow> windows;

        CostBreakdown cost;

        double efficiency() const
        {
            if (total_processed == 0)
            {
                throw std::logic_error("efficiency: no processed events");
            }
            return static_cast<double>(committed_events) / static_cast<double>(total_processed);
        }
    };

    inline CostBreakdown compute_cost(const RunReport &report, const PricingScheme &pricing)
    {
        pricing.validate();
        CostBreakdown c;
        for (const auto busy : report.lp_busy_us)
        {
            c.compute += static_cast<double>(busy) / 1e6 * pricing.price_per_lp_second;
        }
        // Communication charges every physical channel message: model event
        // batches, nulls, anti-messages and control traffic all ride the
        // rented network.
        c.comm = static_cast<double>(report.channel_messages) * pricing.price_per_remote_message;
        for (const auto alloc : report.lp_allocated_us)
        {
            c.rental += static_cast<double>(alloc) / 1e6 * pricing.price_per_lp_instance_second;
        }
        return c;
    }

    inline std::string format_report(const RunReport &r)
    {
        std::string out;
        const auto kv = [&out](const std::string &k, const std::string &v) {
            out += k;
            out += '=';
            out += v;
            out += '\n';
        };
        kv("engine", r.engine);
        kv("completed", r.completed ? "1" : "0");
        if (!r.failure.empty())
        {
            kv("failure", r.failure);
        }
        kv("wct_us", std::to_string(r.wct_us));
        kv("committed_events", std::to_string(r.committed_events));
        kv("total_processed", std::to_string(r.total_processed));
        kv("null_messages", std::to_string(r.null_messages));
        kv("rollbacks", std::to_string(r.rollbacks));
        kv("anti_messages", std::to_string(r.anti_messages));
        kv("remote_messages", std::to_string(r.remote_messages));
        kv("local_messages", std::to_string(r.local_messages));
        kv("channel_messages", std::to_string(r.channel_messages));
        kv("migrations", std::to_string(r.migrations));
        kv("replication_dedup_drops", std::to_string(r.replication_dedup_drops));
        kv("gvt_rounds", std::to_string(r.gvt_rounds));
        if (r.total_processed > 0)
        {
            kv("efficiency", std::to_string(r.efficiency()));
        }
        for (int q = 0; q < 4; ++q)
        {
            kv("committed_q" + std::to_string(q + 1), std::to_string(r.committed_by_quarter[q]));
            kv("committed_remote_q" + std::to_string(q + 1),
               std::to_string(r.committed_remote_by_quarter[q]));
        }
        kv("cost_compute", std::to_string(r.cost.compute));
        kv("cost_comm", std::to_string(r.cost.comm));
        kv("cost_rental", std::to_string(r.cost.rental));
        kv("cost_total", std::to_string(r.cost.total()));
        for (std::size_t lp = 0; lp < r.lp_busy_us.size(); ++lp)
        {
            kv("lp" + std::to_string(lp) + "_busy_us", std::to_string(r.lp_busy_us[lp]));
            kv("lp" + std::to_string(lp) + "_allocated_us", std::to_string(r.lp_allocated_us[lp]));
        }
        for (const auto &w : r.windows)
        {
            out += "window " + std::to_string(w.window) + " lp=" + std::to_string(w.lp) +
                   " events=" + std::to_string(w.events_processed) +
                   " busy_us=" + std::to_string(w.busy_us) + " idle_us=" + std::to_string(w.idle_us) +
                   " remote_sent=" + std::to_string(w.remote_sent) +
                   " remote_recv=" + std::to_string(w.remote_received) +
                   " entities=" + std::to_string(w.entities) + "\n";
        }
        return out;
    }
} // namespace parsim
