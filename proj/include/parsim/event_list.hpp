#pragma once

#include "parsim/types.hpp"

#include <optional>
#include <map>
#include <utility>

namespace parsim
{
    // Pending-event list of one LP (or of the sequential engine). Keyed by the
    // canonical order; dequeue always yields the minimum. Inserting the same
    // positive delivery twice signals a routing bug and throws.
    class EventList
    {
    public:
        bool empty() const { return events_.empty(); }
        std::size_t size() const { return events_.size(); }

        void enqueue(Event e)
        {
            if (!e.well_formed())
            {
                throw ContractViolation("enqueue: recv_time must exceed send_time");
            }
            const EventKey k = key_of(e);
            auto [it, inserted] = events_.emplace(k, std::move(e));
            if (!inserted)
            {
                if (it->second.sign == Sign::positive)
                {
                    throw RoutingError("enqueue: duplicate delivery for sender=" +
                                       std::to_string(k.sender) + " seq=" + std::to_string(k.send_seq) +
                                       " target=" + std::to_string(k.target));
                }
                throw RoutingError("enqueue: delivery collides with queued anti event");
            }
        }

        const Event &min() const
        {
            if (events_.empty())
            {
                throw std::logic_error("EventList::min on empty list");
            }
            return events_.begin()->second;
        }

        Event dequeue_min()
        {
            if (events_.empty())
            {
                throw std::logic_error("EventList::dequeue_min on empty list");
            }
            auto it = events_.begin();
            Event e = std::move(it->second);
            events_.erase(it);
            return e;
        }

        std::optional<SimTime> min_recv_time() const
        {
            if (events_.empty())
            {
                return std::nullopt;
            }
            return events_.begin()->first.recv_time;
        }

        std::optional<EventKey> min_key() const
        {
            if (events_.empty())
            {
                return std::nullopt;
            }
            return events_.begin()->first;
        }

        bool contains(const EventKey &k) const { return events_.count(k) != 0; }

        // Annihilation support: remove the positive delivery matching an anti
        // event. Returns false when no such delivery is queued.
        bool erase(const EventKey &k)
        {
            return events_.erase(k) != 0;
        }

        // Drains every queued delivery for one entity (used when the entity
        // migrates away together with its pending input).
        std::vector<Event> extract_for_target(EntityId target)
        {
            std::vector<Event> out;
            for (auto it = events_.begin(); it != events_.end();)
            {
                if (it->first.target == target)
                {
                    out.push_back(std::move(it->second));
                    it = events_.erase(it);
                }
                else
                {
                    ++it;
                }
            }
            return out;
        }

        auto begin() const { return events_.begin(); }
        auto end() const { return events_.end(); }

    private:
        std::map<EventKey, Event> events_;
    };
} // namespace parsim
