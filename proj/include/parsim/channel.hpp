#pragma once

#include "parsim/env.hpp"
#include "parsim/rng.hpp"
#include "parsim/types.hpp"

#include <deque>
#include <vector>

namespace parsim
{
    // One physical message between two LPs. A model emission becomes at most
    // one message per destination LP; group expansions ride as a batch of
    // entity-targeted deliveries.
    struct ChannelMessage
    {
        enum class Kind : std::uint8_t
        {
            events = 0, // positive deliveries
            nulls = 1,  // CMB null: guarantee only
            antis = 2,  // Time Warp cancellations
            state = 3,  // migration / re-replication envelope
        };

        Kind kind = Kind::events;
        LpId from = 0;
        LpId to = 0;
        // Lower bound on the recv_time of anything this sender will put on
        // this channel later; receivers fold it into their channel clock.
        SimTime guarantee = 0;
        std::vector<Event> events;
        Payload blob; // state envelope
        EntityId entity = 0;
        std::uint32_t replica_idx = 0;
        WallClock deliver_wct = 0;
    };

    // Reliable in-order link with emulated latency. Jitter is clamped so the
    // delivery times stay monotone per channel; every engine here assumes
    // FIFO links.
    class Channel
    {
    public:
        Channel() = default;
        Channel(LpId from, LpId to, WallClock base_us, WallClock jitter_us, std::uint64_t jitter_key)
            : from_(from), to_(to), base_us_(base_us), jitter_us_(jitter_us), jitter_rng_(jitter_key)
        {
        }

        void send(ChannelMessage msg, WallClock now)
        {
            WallClock lat = base_us_;
            if (jitter_us_ > 0)
            {
                lat += jitter_rng_.next_below(jitter_us_ + 1);
            }
            WallClock at = now + lat;
            if (at < last_deliver_wct_)
            {
                at = last_deliver_wct_;
            }
            last_deliver_wct_ = at;
            msg.deliver_wct = at;
            msg.from = from_;
            msg.to = to_;
            queue_.push_back(std::move(msg));
        }

        bool has_due(WallClock now) const
        {
            return !queue_.empty() && queue_.front().deliver_wct <= now;
        }

        ChannelMessage pop()
        {
            ChannelMessage m = std::move(queue_.front());
            queue_.pop_front();
            return m;
        }

        bool empty() const { return queue_.empty(); }
        std::size_t size() const { return queue_.size(); }

        WallClock next_deliver_wct() const
        {
            return queue_.empty() ? kNoDelivery : queue_.front().deliver_wct;
        }

        const std::deque<ChannelMessage> &pending() const { return queue_; }

        void drop_all() { queue_.clear(); }

        // A crashed endpoint loses everything still in flight at the crash
        // instant; messages that already arrived stay delivered.
        void drop_after(WallClock wct)
        {
            while (!queue_.empty() && queue_.back().deliver_wct > wct)
            {
                queue_.pop_back();
            }
        }

        static constexpr WallClock kNoDelivery = UINT64_MAX;

    private:
        LpId from_ = 0;
        LpId to_ = 0;
        WallClock base_us_ = 0;
        WallClock jitter_us_ = 0;
        RngStream jitter_rng_;
        WallClock last_deliver_wct_ = 0;
        std::deque<ChannelMessage> queue_;
    };

    class ChannelMatrix
    {
    public:
        ChannelMatrix() = default;

        ChannelMatrix(std::uint32_t n_lps, const EnvProfile &env, std::uint64_t seed) : n_(n_lps)
        {
            channels_.reserve(static_cast<std::size_t>(n_lps) * n_lps);
            for (LpId from = 0; from < n_lps; ++from)
            {
                for (LpId to = 0; to < n_lps; ++to)
                {
                    channels_.emplace_back(from, to, env.latency_base_us, env.latency_jitter_us,
                                           derive_key(seed, rng_domain::jitter,
                                                      static_cast<std::uint64_t>(from) * n_lps + to));
                }
            }
        }

        Channel &at(LpId from, LpId to)
        {
            return channels_[static_cast<std::size_t>(from) * n_ + to];
        }

        const Channel &at(LpId from, LpId to) const
        {
            return channels_[static_cast<std::size_t>(from) * n_ + to];
        }

        std::uint32_t lp_count() const { return n_; }

        bool all_empty() const
        {
            for (const auto &c : channels_)
            {
                if (!c.empty())
                {
                    return false;
                }
            }
            return true;
        }

        WallClock next_deliver_wct() const
        {
            WallClock best = Channel::kNoDelivery;
            for (const auto &c : channels_)
            {
                best = std::min(best, c.next_deliver_wct());
            }
            return best;
        }

        // The kernel delivers everything due before it handles a crash point,
        // so nothing dropped here had actually arrived.
        void on_crash(LpId lp, WallClock at_wct)
        {
            for (LpId other = 0; other < n_; ++other)
            {
                at(lp, other).drop_after(at_wct);
                at(other, lp).drop_all();
            }
        }

    private:
        std::uint32_t n_ = 0;
        std::vector<Channel> channels_;
    };
} // namespace parsim
