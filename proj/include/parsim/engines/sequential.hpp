#pragma once

#include "parsim/bytes.hpp"
#include "parsim/env.hpp"
#include "parsim/event_list.hpp"
#include "parsim/lp.hpp"
#include "parsim/metrics.hpp"
#include "parsim/model.hpp"
#include "parsim/run_config.hpp"
#include "parsim/trace.hpp"

#include <map>
#include <string>

namespace parsim
{
    // The reference executor: one execution unit, one event list, strict
    // canonical order. This is the oracle every parallel engine is diffed
    // against, so it deliberately shares no runtime machinery with the
    // kernel — just the model, the event list and the trace format.
    class SequentialEngine
    {
    public:
        SequentialEngine(const RunConfig &cfg, const Model &model) : cfg_(cfg), model_(model) {}

        struct Result
        {
            RunReport report;
            std::string trace;
        };

        Result run()
        {
            const std::uint32_t n = model_.entity_count();
            GroupTable groups(model_.group_count());
            std::map<EntityId, EntityRecord> entities;
            for (EntityId e = 0; e < n; ++e)
            {
                EntityRecord rec;
                rec.entity = model_.create_entity(e);
                entities.emplace(e, std::move(rec));
            }

            EventList pending;
            const Bootstrap boot = model_.bootstrap();
            for (const auto &[g, e] : boot.memberships)
            {
                groups.subscribe(g, e);
            }
            {
                std::map<EntityId, std::uint64_t> seq;
                for (const auto &be : boot.events)
                {
                    const std::uint64_t s = seq[be.sender]++;
                    if (be.recv_time == 0 || be.recv_time > cfg_.end_time)
                    {
                        continue;
                    }
                    Event ev;
                    ev.id = EventId{be.sender, s};
                    ev.source = be.sender;
                    ev.target = be.target;
                    ev.send_time = 0;
                    ev.recv_time = be.recv_time;
                    ev.kind = be.kind;
                    ev.payload = be.payload;
                    pending.enqueue(std::move(ev));
                }
                for (const auto &[sender, count] : seq)
                {
                    entities.at(sender).next_send_seq = count;
                }
            }

            std::string trace;
            std::uint64_t processed = 0;
            WallClock wct = 0;

            while (!pending.empty())
            {
                const Event e = pending.dequeue_min();
                wct += charge_processing_us(cfg_.env, 0, 1, wct);
                ++processed;
                append_trace_line(trace, e);

                if (e.kind == reserved_kind::subscribe || e.kind == reserved_kind::unsubscribe)
                {
                    ByteReader r(e.payload);
                    const GroupId g = r.u32();
                    if (e.kind == reserved_kind::subscribe)
                    {
                        groups.subscribe(g, e.target.id);
                    }
                    else
                    {
                        groups.unsubscribe(g, e.target.id);
                    }
                    continue;
                }

                auto &rec = entities.at(e.target.id);
                HandlerContext ctx(e.target.id, e.recv_time);
                rec.entity->handle(e, ctx);
                for (auto &em : ctx.take())
                {
                    const SimTime recv = e.recv_time + em.delay;
                    const EventId id{e.target.id, rec.next_send_seq++};
                    if (recv > cfg_.end_time)
                    {
                        continue;
                    }
                    Event out;
                    out.id = id;
                    out.source = e.target.id;
                    out.send_time = e.recv_time;
                    out.recv_time = recv;
                    out.kind = em.kind;

                    if (em.op != Emission::Op::event)
                    {
                        ByteWriter w;
                        w.u32(em.target.id);
                        out.target = EventTarget::entity(e.target.id);
                        out.payload = w.take();
                        pending.enqueue(std::move(out));
                        continue;
                    }

                    out.payload = std::move(em.payload);
                    if (em.target.is_entity())
                    {
                        out.target = em.target;
                        pending.enqueue(std::move(out));
                    }
                    else
                    {
                        for (EntityId m : groups.members(em.target.id))
                        {
                            if (m == e.target.id)
                            {
                                continue;
                            }
                            Event copy = out;
                            copy.target = EventTarget::entity(m);
                            pending.enqueue(std::move(copy));
                        }
                    }
                }
            }

            Result res;
            res.trace = std::move(trace);
            res.report.engine = "sequential";
            res.report.completed = true;
            res.report.wct_us = wct;
            res.report.committed_events = processed;
            res.report.total_processed = processed;
            res.report.local_messages = processed;
            res.report.lp_busy_us = {wct};
            res.report.lp_allocated_us = {wct};
            for (int q = 0; q < 4; ++q)
            {
                res.report.committed_by_quarter[q] = 0;
            }
            return res;
        }

    private:
        const RunConfig &cfg_;
        const Model &model_;
    };
} // namespace parsim
