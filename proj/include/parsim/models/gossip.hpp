#pragma once

#include "parsim/graph.hpp"
#include "parsim/model.hpp"
#include "parsim/rng.hpp"

#include <algorithm>
#include <memory>

namespace parsim::gossip
{
    namespace kind
    {
        inline constexpr std::uint32_t kickoff = 1;
        inline constexpr std::uint32_t push = 2;
        inline constexpr std::uint32_t chatter = 3;
    } // namespace kind

    struct Params
    {
        std::uint32_t fanout = 3;
        // After infection a node keeps re-pushing the rumor to random
        // neighbors every chatter_period ticks (0 disables). The rumor spread
        // itself is the plain push cascade; chatter keeps neighborhood-local
        // traffic flowing for the whole run.
        SimTime chatter_period = 5;
    };

    class GossipModel;

    // Push gossip with duplicate suppression: first receipt infects and
    // forwards, later receipts are ignored.
    class Node final : public Entity
    {
    public:
        Node(const GossipModel &model, EntityId id, bool infected, RngStream rng)
            : model_(&model), id_(id), infected_(infected), rng_(rng)
        {
        }

        void handle(const Event &e, HandlerContext &ctx) override;

        void save(ByteWriter &w) const override
        {
            w.u8(infected_ ? 1 : 0);
            w.u64(rng_.key());
            w.u64(rng_.counter());
        }

        void load(ByteReader &r) override
        {
            infected_ = r.u8() != 0;
            const auto key = r.u64();
            const auto counter = r.u64();
            rng_.restore(key, counter);
        }

        bool infected() const { return infected_; }

    private:
        void fan_out(HandlerContext &ctx);

        const GossipModel *model_;
        EntityId id_ = 0;
        bool infected_ = false;
        RngStream rng_;
    };

    class GossipModel final : public Model
    {
    public:
        GossipModel(Graph graph, Params params, std::uint64_t seed)
            : graph_(std::move(graph)), params_(params), seed_(seed)
        {
            if (graph_.n == 0)
            {
                throw ConfigError("gossip: empty graph");
            }
        }

        std::string name() const override { return "gossip"; }
        std::uint32_t entity_count() const override { return graph_.n; }
        std::uint32_t group_count() const override { return 0; }

        std::unique_ptr<Entity> create_entity(EntityId id) const override
        {
            RngStream rng(derive_key(seed_, rng_domain::entity, id));
            return std::make_unique<Node>(*this, id, id == 0, rng);
        }

        Bootstrap bootstrap() const override
        {
            Bootstrap b;
            b.events.push_back(BootstrapEvent{0, EventTarget::entity(0), 1, kind::kickoff, {}});
            return b;
        }

        const Graph &graph() const { return graph_; }
        const Params &params() const { return params_; }

    private:
        Graph graph_;
        Params params_;
        std::uint64_t seed_;
    };

    inline void Node::fan_out(HandlerContext &ctx)
    {
        const auto &neighbors = model_->graph().adjacency[id_];
        const std::uint32_t fanout = model_->params().fanout;
        if (neighbors.empty())
        {
            return;
        }
        if (neighbors.size() <= fanout)
        {
            for (auto v : neighbors)
            {
                ctx.send(v, 1, kind::push);
            }
            return;
        }
        // Partial Fisher-Yates over a scratch copy: `fanout` distinct
        // neighbors, order given by the draws.
        std::vector<std::uint32_t> pool(neighbors.begin(), neighbors.end());
        for (std::uint32_t i = 0; i < fanout; ++i)
        {
            const auto j = i + rng_.next_below(pool.size() - i);
            std::swap(pool[i], pool[j]);
            ctx.send(pool[i], 1, kind::push);
        }
    }

    inline void Node::handle(const Event &e, HandlerContext &ctx)
    {
        const SimTime period = model_->params().chatter_period;
        switch (e.kind)
        {
        case kind::kickoff:
            fan_out(ctx);
            if (period > 0)
            {
                ctx.send(id_, period, kind::chatter);
            }
            break;
        case kind::push:
            if (!infected_)
            {
                infected_ = true;
                fan_out(ctx);
                if (period > 0)
                {
                    ctx.send(id_, period, kind::chatter);
                }
            }
            break;
        case kind::chatter:
            fan_out(ctx);
            ctx.send(id_, period, kind::chatter);
            break;
        default:
            throw ContractViolation("gossip: unknown event kind " + std::to_string(e.kind));
        }
    }
} // namespace parsim::gossip
