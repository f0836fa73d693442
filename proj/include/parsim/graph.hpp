#pragma once

#include "parsim/rng.hpp"
#include "parsim/types.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace parsim
{
    enum class GraphKind
    {
        random,
        small_world,
        scale_free,
        two_clique, // two dense cliques joined by one bridge edge
        complete,
    };

    inline std::string to_string(GraphKind k)
    {
        switch (k)
        {
        case GraphKind::random: return "random";
        case GraphKind::small_world: return "small_world";
        case GraphKind::scale_free: return "scale_free";
        case GraphKind::two_clique: return "two_clique";
        case GraphKind::complete: return "complete";
        }
        return "?";
    }

    // Undirected simple graph: symmetric adjacency, no self loops, neighbor
    // lists sorted ascending so iteration order is canonical.
    struct Graph
    {
        std::uint32_t n = 0;
        GraphKind kind = GraphKind::random;
        std::vector<std::vector<std::uint32_t>> adjacency;

        std::size_t edge_count() const
        {
            std::size_t deg = 0;
            for (const auto &nb : adjacency)
            {
                deg += nb.size();
            }
            return deg / 2;
        }

        bool connected() const
        {
            if (n == 0)
            {
                return false;
            }
            std::vector<char> seen(n, 0);
            std::vector<std::uint32_t> stack{0};
            seen[0] = 1;
            std::size_t visited = 1;
            while (!stack.empty())
            {
                const auto v = stack.back();
                stack.pop_back();
                for (auto w : adjacency[v])
                {
                    if (!seen[w])
                    {
                        seen[w] = 1;
                        ++visited;
                        stack.push_back(w);
                    }
                }
            }
            return visited == n;
        }

        std::string dump() const
        {
            std::string out;
            for (std::uint32_t v = 0; v < n; ++v)
            {
                out += std::to_string(v);
                out += ':';
                out += ' ';
                for (std::size_t i = 0; i < adjacency[v].size(); ++i)
                {
                    if (i)
                    {
                        out += ',';
                    }
                    out += std::to_string(adjacency[v][i]);
                }
                out += '\n';
            }
            return out;
        }
    };

    struct GraphParams
    {
        double edge_probability = 0.1; // random
        std::uint32_t ring_degree = 4; // small_world: even k
        double rewire_probability = 0.1; // small_world: beta
        std::uint32_t attach_count = 1; // scale_free: m
        std::uint32_t clique_size = 0;  // two_clique: defaults to n/2
    };

    namespace detail
    {
        class EdgeSet
        {
        public:
            explicit EdgeSet(std::uint32_t n) : adj_(n) {}

            bool add(std::uint32_t a, std::uint32_t b)
            {
                if (a == b)
                {
                    return false;
                }
                if (!adj_[a].insert(b).second)
                {
                    return false;
                }
                adj_[b].insert(a);
                return true;
            }

            bool has(std::uint32_t a, std::uint32_t b) const { return adj_[a].count(b) != 0; }

            std::vector<std::vector<std::uint32_t>> take_sorted()
            {
                std::vector<std::vector<std::uint32_t>> out(adj_.size());
                for (std::size_t v = 0; v < adj_.size(); ++v)
                {
                    out[v].assign(adj_[v].begin(), adj_[v].end());
                }
                return out;
            }

        private:
            std::vector<std::set<std::uint32_t>> adj_;
        };
    } // namespace detail

    // Deterministic for a fixed (kind, n, params, seed). n must be >= 2.
    inline Graph generate_graph(GraphKind kind, std::uint32_t n, const GraphParams &params,
                                std::uint64_t seed)
    {
        if (n < 2)
        {
            throw ConfigError("generate_graph: n must be >= 2");
        }
        RngStream rng(derive_key(seed, rng_domain::graph));
        detail::EdgeSet edges(n);

        switch (kind)
        {
        case GraphKind::random:
        {
            const double p = params.edge_probability;
            if (p < 0.0 || p > 1.0)
            {
                throw ConfigError("generate_graph: edge probability must be in [0,1]");
            }
            for (std::uint32_t i = 0; i < n; ++i)
            {
                for (std::uint32_t j = i + 1; j < n; ++j)
                {
                    if (rng.next_bool(p))
                    {
                        edges.add(i, j);
                    }
                }
            }
            break;
        }
        case GraphKind::small_world:
        {
            const std::uint32_t k = params.ring_degree;
            if (k == 0 || k % 2 != 0 || k >= n)
            {
                throw ConfigError("generate_graph: small_world degree must be even, > 0 and < n");
            }
            const double beta = params.rewire_probability;
            if (beta < 0.0 || beta > 1.0)
            {
                throw ConfigError("generate_graph: rewire probability must be in [0,1]");
            }
            // Ring lattice first, then Watts-Strogatz rewiring of the far
            // endpoint with probability beta.
            for (std::uint32_t i = 0; i < n; ++i)
            {
                for (std::uint32_t d = 1; d <= k / 2; ++d)
                {
                    edges.add(i, (i + d) % n);
                }
            }
            if (beta > 0.0)
            {
                auto adj = edges.take_sorted();
                detail::EdgeSet rewired(n);
                for (std::uint32_t i = 0; i < n; ++i)
                {
                    for (std::uint32_t d = 1; d <= k / 2; ++d)
                    {
                        const std::uint32_t j = (i + d) % n;
                        if (rng.next_bool(beta))
                        {
                            // Retry until the new endpoint is valid; give up
                            // after n attempts and keep the lattice edge.
                            bool placed = false;
                            for (std::uint32_t attempt = 0; attempt < n; ++attempt)
                            {
                                const auto w =
                                    static_cast<std::uint32_t>(rng.next_below(n));
                                if (w != i && !rewired.has(i, w))
                                {
                                    rewired.add(i, w);
                                    placed = true;
                                    break;
                                }
                            }
                            if (!placed)
                            {
                                rewired.add(i, j);
                            }
                        }
                        else
                        {
                            rewired.add(i, j);
                        }
                    }
                }
                (void)adj;
                edges = std::move(rewired);
            }
            break;
        }
        case GraphKind::scale_free:
        {
            const std::uint32_t m = params.attach_count;
            if (m < 1)
            {
                throw ConfigError("generate_graph: attach count must be >= 1");
            }
            // Preferential attachment. Node v picks min(m, v) distinct
            // existing nodes weighted by degree (repeated-endpoint list).
            std::vector<std::uint32_t> endpoint_pool;
            endpoint_pool.push_back(0);
            for (std::uint32_t v = 1; v < n; ++v)
            {
                const std::uint32_t want = std::min(m, v);
                std::set<std::uint32_t> chosen;
                while (chosen.size() < want)
                {
                    const auto pick = endpoint_pool[rng.next_below(endpoint_pool.size())];
                    chosen.insert(pick);
                }
                for (auto u : chosen)
                {
                    edges.add(v, u);
                    endpoint_pool.push_back(u);
                    endpoint_pool.push_back(v);
                }
            }
            break;
        }
        case GraphKind::two_clique:
        {
            const std::uint32_t s = params.clique_size ? params.clique_size : n / 2;
            if (s < 2 || s * 2 != n)
            {
                throw ConfigError("generate_graph: two_clique needs n = 2 * clique_size, size >= 2");
            }
            for (std::uint32_t i = 0; i < s; ++i)
            {
                for (std::uint32_t j = i + 1; j < s; ++j)
                {
                    edges.add(i, j);
                    edges.add(s + i, s + j);
                }
            }
            edges.add(0, s); // the single bridge
            break;
        }
        case GraphKind::complete:
        {
            for (std::uint32_t i = 0; i < n; ++i)
            {
                for (std::uint32_t j = i + 1; j < n; ++j)
                {
                    edges.add(i, j);
                }
            }
            break;
        }
        }

        Graph g;
        g.n = n;
        g.kind = kind;
        g.adjacency = edges.take_sorted();
        return g;
    }

    inline GraphKind parse_graph_kind(const std::string &s)
    {
        if (s == "random")
        {
            return GraphKind::random;
        }
        if (s == "small_world")
        {
            return GraphKind::small_world;
        }
        if (s == "scale_free")
        {
            return GraphKind::scale_free;
        }
        if (s == "two_clique")
        {
            return GraphKind::two_clique;
        }
        if (s == "complete")
        {
            return GraphKind::complete;
        }
        throw ConfigError("unknown graph kind: " + s);
    }
} // namespace parsim
