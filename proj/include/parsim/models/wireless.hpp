#pragma once

#include "parsim/model.hpp"
#include "parsim/rng.hpp"

#include <memory>

namespace parsim::wireless
{
    namespace kind
    {
        inline constexpr std::uint32_t move = 1;
        inline constexpr std::uint32_t position_update = 2;
        inline constexpr std::uint32_t transmit_timer = 3;
        inline constexpr std::uint32_t transmission = 4;
    } // namespace kind

    struct Params
    {
        std::uint32_t cells = 8; // world is a cells x cells torus of cell groups
        SimTime move_period = 5;
        SimTime tx_period = 10;
    };

    class WirelessModel;

    // Toy mobile node: random walk over a torus of square cells. Each cell is
    // a group; a node keeps its cell subscription current, publishes position
    // updates to its cell and broadcasts transmissions to its own plus the
    // eight surrounding cells. Receptions are only counted.
    class Node final : public Entity
    {
    public:
        Node(const WirelessModel &model, EntityId id, std::uint32_t x, std::uint32_t y, RngStream rng)
            : model_(&model), id_(id), x_(x), y_(y), rng_(rng)
        {
        }

        void handle(const Event &e, HandlerContext &ctx) override;

        void save(ByteWriter &w) const override
        {
            w.u32(x_);
            w.u32(y_);
            w.u64(rx_count_);
            w.u64(rng_.key());
            w.u64(rng_.counter());
        }

        void load(ByteReader &r) override
        {
            x_ = r.u32();
            y_ = r.u32();
            rx_count_ = r.u64();
            const auto key = r.u64();
            const auto counter = r.u64();
            rng_.restore(key, counter);
        }

        std::uint64_t rx_count() const { return rx_count_; }

    private:
        const WirelessModel *model_;
        EntityId id_ = 0;
        std::uint32_t x_ = 0;
        std::uint32_t y_ = 0;
        std::uint64_t rx_count_ = 0;
        RngStream rng_;
    };

    class WirelessModel final : public Model
    {
    public:
        WirelessModel(std::uint32_t n, Params params, std::uint64_t seed)
            : n_(n), params_(params), seed_(seed)
        {
            if (n_ == 0)
            {
                throw ConfigError("wireless: entity count must be > 0");
            }
            if (params_.cells == 0)
            {
                throw ConfigError("wireless: cells must be > 0");
            }
            if (params_.move_period == 0 || params_.tx_period == 0)
            {
                throw ConfigError("wireless: periods must be > 0");
            }
        }

        std::string name() const override { return "wireless"; }
        std::uint32_t entity_count() const override { return n_; }
        std::uint32_t group_count() const override { return params_.cells * params_.cells; }

        GroupId cell_group(std::uint32_t x, std::uint32_t y) const
        {
            return y * params_.cells + x;
        }

        // Initial cell of a node: the first two draws of its stream, so that
        // create_entity and bootstrap agree without shared state.
        std::pair<std::uint32_t, std::uint32_t> initial_cell(EntityId id) const
        {
            RngStream rng(derive_key(seed_, rng_domain::entity, id));
            const auto x = static_cast<std::uint32_t>(rng.next_below(params_.cells));
            const auto y = static_cast<std::uint32_t>(rng.next_below(params_.cells));
            return {x, y};
        }

        std::unique_ptr<Entity> create_entity(EntityId id) const override
        {
            RngStream rng(derive_key(seed_, rng_domain::entity, id));
            const auto x = static_cast<std::uint32_t>(rng.next_below(params_.cells));
            const auto y = static_cast<std::uint32_t>(rng.next_below(params_.cells));
            return std::make_unique<Node>(*this, id, x, y, rng);
        }

        Bootstrap bootstrap() const override
        {
            Bootstrap b;
            for (EntityId i = 0; i < n_; ++i)
            {
                const auto [x, y] = initial_cell(i);
                b.memberships.emplace_back(cell_group(x, y), i);
                b.events.push_back(BootstrapEvent{i, EventTarget::entity(i), 1, kind::move, {}});
                b.events.push_back(BootstrapEvent{i, EventTarget::entity(i),
                                                  1 + (i % params_.tx_period), kind::transmit_timer, {}});
            }
            return b;
        }

        const Params &params() const { return params_; }

    private:
        std::uint32_t n_ = 0;
        Params params_;
        std::uint64_t seed_;
    };

    inline void Node::handle(const Event &e, HandlerContext &ctx)
    {
        const auto &p = model_->params();
        const std::uint32_t c = p.cells;
        switch (e.kind)
        {
        case kind::move:
        {
            const GroupId old_cell = model_->cell_group(x_, y_);
            // 0 = stay, 1..4 = one torus step N/E/S/W.
            switch (rng_.next_below(5))
            {
            case 1: y_ = (y_ + 1) % c; break;
            case 2: x_ = (x_ + 1) % c; break;
            case 3: y_ = (y_ + c - 1) % c; break;
            case 4: x_ = (x_ + c - 1) % c; break;
            default: break;
            }
            const GroupId new_cell = model_->cell_group(x_, y_);
            if (new_cell != old_cell)
            {
                ctx.unsubscribe(old_cell, 1);
                ctx.subscribe(new_cell, 1);
            }
            ByteWriter w;
            w.u32(x_);
            w.u32(y_);
            ctx.send_group(new_cell, 1, kind::position_update, w.take());
            ctx.send(id_, p.move_period, kind::move);
            break;
        }
        case kind::transmit_timer:
        {
            // Own cell plus the Moore neighborhood, fixed scan order.
            const auto wrap = [c](std::uint32_t v, int d) {
                return (v + c + static_cast<std::uint32_t>(d + 1) - 1) % c;
            };
            for (int dy = -1; dy <= 1; ++dy)
            {
                for (int dx = -1; dx <= 1; ++dx)
                {
                    ctx.send_group(model_->cell_group(wrap(x_, dx), wrap(y_, dy)), 1, kind::transmission);
                }
            }
            ctx.send(id_, p.tx_period, kind::transmit_timer);
            break;
        }
        case kind::position_update:
        case kind::transmission:
            ++rx_count_;
            break;
        default:
            throw ContractViolation("wireless: unknown event kind " + std::to_string(e.kind));
        }
    }
} // namespace parsim::wireless
