#pragma once

#include "parsim/channel.hpp"
#include "parsim/directory.hpp"
#include "parsim/lp.hpp"
#include "parsim/metrics.hpp"
#include "parsim/model.hpp"
#include "parsim/run_config.hpp"
#include "parsim/trace.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>
#include <vector>

namespace parsim
{
    namespace detail
    {
        // Dedup key of one logical delivery: replicated senders emit
        // identical copies, receivers accept the first per (id, target).
        struct DeliveryKey
        {
            EntityId sender = 0;
            std::uint64_t seq = 0;
            std::uint32_t target = 0;

            friend auto operator<=>(const DeliveryKey &, const DeliveryKey &) = default;
        };
    } // namespace detail

    // Engine hooks into the emission pipeline. Time Warp uses them to keep a
    // send log and to suppress re-sends while coasting forward after a
    // rollback; the other engines run with the defaults.
    struct EmitHooks
    {
        virtual ~EmitHooks() = default;
        virtual bool should_send(const EventId &) { return true; }
        virtual void on_delivery(const Event &, LpId /*dest*/) {}
    };

    // Shared deterministic runtime: LPs, channels, directory, the emulated
    // wall clock and every piece of accounting. Engines drive it; all
    // cross-LP effects go through here so the counters and the committed
    // trace are produced one way only.
    class Kernel
    {
    public:
        Kernel(const RunConfig &cfg, const Model &model)
            : cfg_(cfg), model_(model),
              directory_(model.entity_count(), cfg.replicas, cfg.n_lps, cfg.placement, cfg.seed),
              channels_(cfg.n_lps, cfg.env, cfg.seed)
        {
            min_emit_delay_ = cfg.engine == EngineKind::cmb ? cfg.lookahead : 1;
            guarantee_delta_ = cfg.engine == EngineKind::cmb ? cfg.lookahead : model.min_delay();
            replication_ = cfg.replicas > 1;
            ledgers_.resize(cfg.n_lps);

            lps_.resize(cfg.n_lps);
            for (LpId l = 0; l < cfg.n_lps; ++l)
            {
                lps_[l].id = l;
                lps_[l].groups = GroupTable(model.group_count());
            }

            crash_schedule_ = cfg.env.crashes;
            std::sort(crash_schedule_.begin(), crash_schedule_.end(),
                      [](const CrashPoint &a, const CrashPoint &b) {
                          return a.at_wct != b.at_wct ? a.at_wct < b.at_wct : a.lp < b.lp;
                      });
            crash_applied_.assign(crash_schedule_.size(), false);

            instantiate_entities();
            bootstrap();
        }

        // --- plain accessors -------------------------------------------------

        const RunConfig &cfg() const { return cfg_; }
        const Model &model() const { return model_; }
        Directory &directory() { return directory_; }
        const Directory &directory() const { return directory_; }
        ChannelMatrix &channels() { return channels_; }
        std::vector<Lp> &lps() { return lps_; }
        Lp &lp(LpId l) { return lps_[l]; }
        std::uint32_t lp_count() const { return cfg_.n_lps; }
        SimTime end_time() const { return cfg_.end_time; }

        WallClock now() const { return now_; }
        void set_now(WallClock t) { now_ = std::max(now_, t); }

        std::uint32_t live_lp_count() const
        {
            std::uint32_t n = 0;
            for (const auto &l : lps_)
            {
                n += l.alive ? 1 : 0;
            }
            return n;
        }

        // Called by engines on every committed send when their sends are
        // final at emission time (sequential, time-stepped, CMB). Time Warp
        // replays its send log at commit instead.
        void set_pattern_sink(std::function<void(EntityId, LpId, LpId)> sink)
        {
            pattern_sink_ = std::move(sink);
        }

        // --- membership ops --------------------------------------------------

        static bool is_membership_op(const Event &e)
        {
            return e.kind == reserved_kind::subscribe || e.kind == reserved_kind::unsubscribe;
        }

        static GroupId op_group(const Event &e)
        {
            ByteReader r(e.payload);
            const GroupId g = r.u32();
            r.expect_end();
            return g;
        }

        // --- emission pipeline ----------------------------------------------

        // Runs one delivered event through its entity and routes everything
        // the handler emitted. `at_wct` is when the LP starts the work; sends
        // leave at the completion instant. Returns the charge (0 for
        // table-maintenance shadows) and whether this counts as a committed
        // delivery of the hosting LP.
        struct ProcessOutcome
        {
            bool traced = false;
            WallClock charge_us = 0;
        };

        ProcessOutcome process_delivery(Lp &lp, const Event &e, WallClock at_wct,
                                        EmitHooks *hooks = nullptr)
        {
            if (e.sign != Sign::positive)
            {
                throw std::logic_error("process_delivery: anti event reached an entity");
            }
            if (is_membership_op(e))
            {
                const EntityId subject = e.target.id;
                const GroupId g = op_group(e);
                if (e.kind == reserved_kind::subscribe)
                {
                    lp.groups.subscribe(g, subject);
                }
                else
                {
                    lp.groups.unsubscribe(g, subject);
                }
                if (!lp.hosts(subject))
                {
                    return {false, 0}; // shadow copy: table maintenance only
                }
                const WallClock c = charge_processing_us(cfg_.env, lp.id, 1, at_wct);
                account_processing(lp, c, at_wct);
                return {true, c};
            }

            auto &rec = lp.record(e.target.id);
            HandlerContext ctx(e.target.id, e.recv_time);
            rec.entity->handle(e, ctx);
            const WallClock c = charge_processing_us(cfg_.env, lp.id, 1, at_wct);
            account_processing(lp, c, at_wct);
            emit(lp, e.target.id, rec, e.recv_time, ctx.take(), at_wct + c, hooks);
            return {true, c};
        }

        // Expands and routes handler emissions. Sequence numbers advance for
        // every emission, including those dropped at the end-time horizon, so
        // ids are reproducible across engines and rollbacks.
        void emit(Lp &lp, EntityId source, EntityRecord &rec, SimTime send_time,
                  std::vector<Emission> emissions, WallClock send_wct, EmitHooks *hooks = nullptr)
        {
            std::map<LpId, std::vector<Event>> batches;
            for (auto &em : emissions)
            {
                if (em.delay < min_emit_delay_)
                {
                    throw ContractViolation("entity " + std::to_string(source) +
                                            " violated lookahead " + std::to_string(min_emit_delay_) +
                                            " (delay " + std::to_string(em.delay) + ")");
                }
                const SimTime recv = send_time + em.delay;
                const EventId id{source, rec.next_send_seq++};
                if (recv > cfg_.end_time)
                {
                    continue;
                }
                if (hooks && !hooks->should_send(id))
                {
                    continue; // Time Warp coast-forward: already sent and still valid
                }

                Event proto;
                proto.id = id;
                proto.source = source;
                proto.send_time = send_time;
                proto.recv_time = recv;
                proto.kind = em.kind;
                proto.payload = std::move(em.payload);

                if (em.op != Emission::Op::event)
                {
                    // Membership change: broadcast one copy per live LP, each
                    // applied at its canonical slot. The subject entity is the
                    // emitter; copies at its hosting LPs double as the traced
                    // delivery.
                    ByteWriter w;
                    w.u32(em.target.id);
                    proto.target = EventTarget::entity(source);
                    proto.payload = w.take();
                    for (LpId l = 0; l < cfg_.n_lps; ++l)
                    {
                        if (!lps_[l].alive)
                        {
                            continue;
                        }
                        Event copy = proto;
                        copy.routed_remote = l != lp.id;
                        if (hooks)
                        {
                            hooks->on_delivery(copy, l);
                        }
                        if (l == lp.id)
                        {
                            enqueue_delivery(lps_[l], std::move(copy));
                        }
                        else
                        {
                            batches[l].push_back(std::move(copy));
                        }
                    }
                    continue;
                }

                // Concrete targets: the entity itself, or the group expanded
                // against this LP's table at the emission point (minus the
                // sender).
                std::vector<EntityId> targets;
                if (proto_targets_entity(em))
                {
                    targets.push_back(em.target.id);
                }
                else
                {
                    for (EntityId m : lp.groups.members(em.target.id))
                    {
                        if (m != source)
                        {
                            targets.push_back(m);
                        }
                    }
                }

                for (EntityId t : targets)
                {
                    Event ev = proto;
                    ev.target = EventTarget::entity(t);
                    route_delivery(lp, std::move(ev), batches, hooks);
                }
            }

            for (auto &[dest, events] : batches)
            {
                ChannelMessage msg;
                msg.kind = ChannelMessage::Kind::events;
                msg.guarantee = send_time + guarantee_delta_;
                msg.events = std::move(events);
                channels_.at(lp.id, dest).send(std::move(msg), send_wct);
                ++channel_messages_;
            }
        }

        // Dedup (active replication) plus the actual enqueue.
        void enqueue_delivery(Lp &lp, Event e)
        {
            if (replication_)
            {
                const detail::DeliveryKey k{e.id.sender, e.id.send_seq, e.target.id};
                if (!ledgers_[lp.id].insert(k).second)
                {
                    ++dedup_drops_;
                    return;
                }
            }
            lp.pending.enqueue(std::move(e));
        }

        // Engines that pre-filter arrivals (Time Warp) still need the ledger
        // step separated from the enqueue.
        void clear_ledgers()
        {
            for (auto &l : ledgers_)
            {
                l.clear();
            }
        }

        // --- engine-level messages -------------------------------------------

        void send_null(LpId from, LpId to, SimTime guarantee, WallClock wct)
        {
            ChannelMessage msg;
            msg.kind = ChannelMessage::Kind::nulls;
            msg.guarantee = guarantee;
            channels_.at(from, to).send(std::move(msg), wct);
            ++channel_messages_;
            ++null_messages_;
        }

        void send_antis(LpId from, LpId to, std::vector<Event> antis, WallClock wct)
        {
            if (antis.empty())
            {
                return;
            }
            anti_messages_ += antis.size();
            ChannelMessage msg;
            msg.kind = ChannelMessage::Kind::antis;
            msg.events = std::move(antis);
            channels_.at(from, to).send(std::move(msg), wct);
            ++channel_messages_;
        }

        // Serializes one hosted replica into a state envelope, charges the
        // source for the serialization and ships a copy. The source keeps
        // its record until finalize_departure, so a destination crash during
        // the handover aborts cleanly. Pending input travels as copies;
        // broadcast membership copies stay (every LP has its own anyway).
        void send_state_copy(LpId from, LpId to, EntityId entity, std::uint32_t replica_idx,
                             WallClock wct)
        {
            Lp &src = lps_[from];
            auto it = src.entities.find(entity);
            if (it == src.entities.end())
            {
                throw RoutingError("send_state_copy: entity not hosted");
            }
            ChannelMessage msg;
            msg.kind = ChannelMessage::Kind::state;
            msg.entity = entity;
            msg.replica_idx = replica_idx;
            msg.blob = save_entity_envelope(it->second);
            for (const auto &[key, ev] : src.pending)
            {
                if (key.target == entity && !is_membership_op(ev))
                {
                    msg.events.push_back(ev);
                }
            }

            const WallClock ser = charge_serialization_us(cfg_.env, msg.blob.size());
            src.busy_us += ser;
            src.window.busy_us += ser;
            src.cursor_wct = std::max(src.cursor_wct, wct) + ser;

            channels_.at(from, to).send(std::move(msg), src.cursor_wct);
            ++channel_messages_;
        }

        // Completes a migration after the destination confirmed the install:
        // the source drops its record and the entity's queued input (shadow
        // membership copies stay).
        void finalize_departure(LpId from, EntityId entity)
        {
            Lp &src = lps_[from];
            src.entities.erase(entity);
            auto drained = src.pending.extract_for_target(entity);
            for (auto &ev : drained)
            {
                if (is_membership_op(ev))
                {
                    src.pending.enqueue(std::move(ev));
                }
            }
            ++migrations_;
        }

        // Installs a state envelope at its destination.
        void install_state(Lp &lp, const ChannelMessage &msg)
        {
            if (lp.hosts(msg.entity))
            {
                throw RoutingError("install_state: entity already hosted on lp " +
                                   std::to_string(lp.id));
            }
            EntityRecord rec;
            rec.entity = model_.create_entity(msg.entity);
            load_entity_envelope(rec, msg.blob);
            lp.entities.emplace(msg.entity, std::move(rec));
            for (auto ev : msg.events)
            {
                lp.pending.enqueue(std::move(ev));
            }
        }

        // --- delivery & time -------------------------------------------------

        // Hands every message due at `now` to the engine, channel by channel
        // in fixed order. Returns true when anything was delivered.
        bool deliver_due(const std::function<void(Lp &, ChannelMessage &&)> &sink)
        {
            bool any = false;
            for (LpId from = 0; from < cfg_.n_lps; ++from)
            {
                for (LpId to = 0; to < cfg_.n_lps; ++to)
                {
                    auto &ch = channels_.at(from, to);
                    while (ch.has_due(now_))
                    {
                        ChannelMessage msg = ch.pop();
                        if (!lps_[to].alive)
                        {
                            continue;
                        }
                        if (msg.kind == ChannelMessage::Kind::events)
                        {
                            lps_[to].window.remote_received += msg.events.size();
                        }
                        sink(lps_[to], std::move(msg));
                        any = true;
                    }
                }
            }
            return any;
        }

        WallClock next_crash_wct() const
        {
            WallClock best = Channel::kNoDelivery;
            for (std::size_t i = 0; i < crash_schedule_.size(); ++i)
            {
                if (!crash_applied_[i])
                {
                    best = std::min(best, crash_schedule_[i].at_wct);
                }
            }
            return best;
        }

        // Applies scheduled crashes with at_wct <= now. Deliver due messages
        // first; whatever is still in flight dies with the endpoint.
        void apply_due_crashes()
        {
            for (std::size_t i = 0; i < crash_schedule_.size(); ++i)
            {
                if (!crash_applied_[i] && crash_schedule_[i].at_wct <= now_)
                {
                    crash_applied_[i] = true;
                    crash_lp(crash_schedule_[i].lp, crash_schedule_[i].at_wct);
                }
            }
        }

        // Mid-slice check for the LP's own scheduled crash: an LP whose local
        // cursor passed its crash instant stops there, whatever the rest of
        // the world is doing.
        bool crash_due_for_lp(LpId lp, WallClock upto)
        {
            for (std::size_t i = 0; i < crash_schedule_.size(); ++i)
            {
                if (!crash_applied_[i] && crash_schedule_[i].lp == lp &&
                    crash_schedule_[i].at_wct <= upto)
                {
                    crash_applied_[i] = true;
                    crash_lp(lp, crash_schedule_[i].at_wct);
                    return true;
                }
            }
            return false;
        }

        void crash_lp(LpId lp, WallClock at)
        {
            Lp &dead = lps_[lp];
            if (!dead.alive)
            {
                throw ConfigError("duplicate crash for lp " + std::to_string(lp));
            }
            dead.alive = false;
            dead.crashed_at = at;
            channels_.on_crash(lp, at);
            const auto unrecoverable = directory_.mark_lp_dead(lp);
            if (!unrecoverable.empty())
            {
                throw RunFailure("lp " + std::to_string(lp) + " crashed at wct " +
                                 std::to_string(at) + "us; entity " +
                                 std::to_string(unrecoverable.front()) +
                                 " lost its last replica");
            }
        }

        // --- trace -----------------------------------------------------------

        // Appends one committed delivery. Engines must call this in canonical
        // order; the kernel enforces it.
        void commit(const Event &e)
        {
            const EventKey k = key_of(e);
            if (has_committed_ && !(commit_watermark_ < k))
            {
                throw std::logic_error("commit: out-of-order committed delivery");
            }
            commit_watermark_ = k;
            has_committed_ = true;
            append_trace_line(trace_, e);
            ++committed_events_;
            const int q = quarter_of(e.recv_time);
            ++committed_by_quarter_[q];
            if (e.routed_remote)
            {
                ++committed_remote_by_quarter_[q];
            }
        }

        EventKey commit_watermark() const { return commit_watermark_; }
        bool has_committed() const { return has_committed_; }

        int quarter_of(SimTime recv) const
        {
            if (cfg_.end_time == 0 || recv == 0)
            {
                return 0;
            }
            const SimTime q = ((recv - 1) * 4) / cfg_.end_time;
            return static_cast<int>(std::min<SimTime>(q, 3));
        }

        // --- instrumentation windows ------------------------------------------

        void rotate_windows(WallClock at)
        {
            const WallClock span = at >= window_start_ ? at - window_start_ : 0;
            for (auto &lp : lps_)
            {
                LpWindow w;
                w.window = window_index_;
                w.lp = lp.id;
                w.events_processed = lp.window.events_processed;
                w.busy_us = lp.window.busy_us;
                w.idle_us = span > lp.window.busy_us ? span - lp.window.busy_us : 0;
                w.remote_sent = lp.window.remote_sent;
                w.remote_received = lp.window.remote_received;
                w.entities = static_cast<std::uint32_t>(lp.entities.size());
                windows_.push_back(w);
                lp.window = WindowCounters{};
            }
            ++window_index_;
            window_start_ = at;
        }

        const std::vector<LpWindow> &windows() const { return windows_; }

        // Busy fraction of the last rotated window, per LP. Dead LPs report 0.
        std::vector<double> last_window_loads() const
        {
            std::vector<double> loads(cfg_.n_lps, 0.0);
            if (window_index_ == 0)
            {
                return loads;
            }
            const std::uint32_t last = window_index_ - 1;
            for (auto it = windows_.rbegin(); it != windows_.rend() && it->window == last; ++it)
            {
                const WallClock span = it->busy_us + it->idle_us;
                loads[it->lp] = span == 0 ? 0.0
                                          : static_cast<double>(it->busy_us) /
                                                static_cast<double>(span);
            }
            return loads;
        }

        // --- counters ---------------------------------------------------------

        std::uint64_t total_processed() const { return total_processed_; }
        std::uint64_t committed_events() const { return committed_events_; }
        void count_rollback() { ++rollbacks_; }
        void count_gvt_round() { ++gvt_rounds_; }

        const std::string &trace() const { return trace_; }

        std::vector<std::string> &migration_log() { return migration_log_; }

        RunReport make_report(bool completed, const std::string &failure) const
        {
            RunReport r;
            r.engine = to_string(cfg_.engine);
            r.completed = completed;
            r.failure = failure;
            r.wct_us = now_;
            r.committed_events = committed_events_;
            r.total_processed = total_processed_;
            r.null_messages = null_messages_;
            r.rollbacks = rollbacks_;
            r.anti_messages = anti_messages_;
            r.remote_messages = remote_messages_;
            r.local_messages = local_messages_;
            r.channel_messages = channel_messages_;
            r.migrations = migrations_;
            r.replication_dedup_drops = dedup_drops_;
            r.gvt_rounds = gvt_rounds_;
            r.committed_by_quarter = committed_by_quarter_;
            r.committed_remote_by_quarter = committed_remote_by_quarter_;
            for (const auto &lp : lps_)
            {
                r.lp_busy_us.push_back(lp.busy_us);
                r.lp_allocated_us.push_back(lp.alive ? now_ : lp.crashed_at);
            }
            r.windows = windows_;
            return r;
        }

        // Audit helper: replicas of one entity must hold byte-identical
        // state whenever the world is quiescent.
        void audit_replica_determinism() const
        {
            if (!replication_)
            {
                return;
            }
            for (EntityId e = 0; e < directory_.entity_count(); ++e)
            {
                const auto &g = directory_.group(e);
                Payload reference;
                bool have = false;
                for (std::size_t i = 0; i < g.replicas.size(); ++i)
                {
                    if (!g.live[i])
                    {
                        continue;
                    }
                    const auto &lp = lps_[g.replicas[i]];
                    const auto it = lp.entities.find(e);
                    if (it == lp.entities.end())
                    {
                        throw std::logic_error("audit: directory/hosting mismatch for entity " +
                                               std::to_string(e));
                    }
                    Payload bytes = save_entity_envelope(it->second);
                    if (!have)
                    {
                        reference = std::move(bytes);
                        have = true;
                    }
                    else if (bytes != reference)
                    {
                        throw std::logic_error("audit: replica state divergence for entity " +
                                               std::to_string(e));
                    }
                }
            }
        }

    private:
        static bool proto_targets_entity(const Emission &em)
        {
            return em.target.kind == EventTarget::Kind::entity;
        }

        void account_processing(Lp &lp, WallClock charge, WallClock at_wct)
        {
            lp.busy_us += charge;
            lp.window.busy_us += charge;
            ++lp.window.events_processed;
            lp.cursor_wct = at_wct + charge;
            ++total_processed_;
        }

        void route_delivery(Lp &from, Event ev, std::map<LpId, std::vector<Event>> &batches,
                            EmitHooks *hooks)
        {
            const auto &group = directory_.group(ev.target.id);
            for (std::size_t i = 0; i < group.replicas.size(); ++i)
            {
                if (!group.live[i])
                {
                    continue;
                }
                const LpId dest = group.replicas[i];
                Event copy = ev;
                copy.routed_remote = dest != from.id;
                if (hooks)
                {
                    hooks->on_delivery(copy, dest);
                }
                if (pattern_sink_)
                {
                    pattern_sink_(ev.source, from.id, dest);
                }
                if (copy.routed_remote)
                {
                    ++remote_messages_;
                    ++from.window.remote_sent;
                    batches[dest].push_back(std::move(copy));
                }
                else
                {
                    ++local_messages_;
                    enqueue_delivery(from, std::move(copy));
                }
            }
        }

        void instantiate_entities()
        {
            for (EntityId e = 0; e < directory_.entity_count(); ++e)
            {
                const auto &g = directory_.group(e);
                for (std::size_t i = 0; i < g.replicas.size(); ++i)
                {
                    EntityRecord rec;
                    rec.entity = model_.create_entity(e);
                    lps_[g.replicas[i]].entities.emplace(e, std::move(rec));
                }
            }
        }

        void bootstrap()
        {
            const Bootstrap boot = model_.bootstrap();
            for (const auto &[g, e] : boot.memberships)
            {
                for (auto &lp : lps_)
                {
                    lp.groups.subscribe(g, e);
                }
            }
            std::map<EntityId, std::uint64_t> seq;
            for (const auto &be : boot.events)
            {
                if (!be.target.is_entity())
                {
                    throw ConfigError("bootstrap events must target entities");
                }
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
                const auto &group = directory_.group(be.target.id);
                for (std::size_t i = 0; i < group.replicas.size(); ++i)
                {
                    if (group.live[i])
                    {
                        Event copy = ev;
                        lps_[group.replicas[i]].pending.enqueue(std::move(copy));
                    }
                }
            }
            for (const auto &[sender, count] : seq)
            {
                const auto &group = directory_.group(sender);
                for (std::size_t i = 0; i < group.replicas.size(); ++i)
                {
                    lps_[group.replicas[i]].record(sender).next_send_seq = count;
                }
            }
        }

        const RunConfig &cfg_;
        const Model &model_;
        Directory directory_;
        ChannelMatrix channels_;
        std::vector<Lp> lps_;
        WallClock now_ = 0;

        SimTime min_emit_delay_ = 1;
        SimTime guarantee_delta_ = 1;
        bool replication_ = false;
        std::vector<std::set<detail::DeliveryKey>> ledgers_;

        std::vector<CrashPoint> crash_schedule_;
        std::vector<bool> crash_applied_;

        std::function<void(EntityId, LpId, LpId)> pattern_sink_;

        std::string trace_;
        EventKey commit_watermark_{};
        bool has_committed_ = false;

        std::uint64_t total_processed_ = 0;
        std::uint64_t committed_events_ = 0;
        std::uint64_t null_messages_ = 0;
        std::uint64_t anti_messages_ = 0;
        std::uint64_t rollbacks_ = 0;
        std::uint64_t remote_messages_ = 0;
        std::uint64_t local_messages_ = 0;
        std::uint64_t channel_messages_ = 0;
        std::uint64_t migrations_ = 0;
        std::uint64_t dedup_drops_ = 0;
        std::uint64_t gvt_rounds_ = 0;
        std::array<std::uint64_t, 4> committed_by_quarter_{};
        std::array<std::uint64_t, 4> committed_remote_by_quarter_{};

        std::vector<LpWindow> windows_;
        std::uint32_t window_index_ = 0;
        WallClock window_start_ = 0;

        std::vector<std::string> migration_log_;
    };
} // namespace parsim
