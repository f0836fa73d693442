#pragma once

#include "parsim/directory.hpp"
#include "parsim/env.hpp"
#include "parsim/graph.hpp"
#include "parsim/metrics.hpp"
#include "parsim/models/gossip.hpp"
#include "parsim/models/wireless.hpp"
#include "parsim/types.hpp"

#include <string>

namespace parsim
{
    enum class EngineKind
    {
        sequential,
        timestepped,
        cmb,
        timewarp,
    };

    inline std::string to_string(EngineKind e)
    {
        switch (e)
        {
        case EngineKind::sequential: return "sequential";
        case EngineKind::timestepped: return "timestepped";
        case EngineKind::cmb: return "cmb";
        case EngineKind::timewarp: return "timewarp";
        }
        return "?";
    }

    inline EngineKind parse_engine(const std::string &s)
    {
        if (s == "sequential")
        {
            return EngineKind::sequential;
        }
        if (s == "timestepped")
        {
            return EngineKind::timestepped;
        }
        if (s == "cmb")
        {
            return EngineKind::cmb;
        }
        if (s == "timewarp")
        {
            return EngineKind::timewarp;
        }
        throw ConfigError("unknown engine: " + s);
    }

    struct GaiaConfig
    {
        enum class Mode
        {
            heuristic,
            forced_random, // migration-transparency stress: random moves each round
        };

        bool enabled = false;
        Mode mode = Mode::heuristic;
        double alpha = 0.7;          // external-attraction threshold, in (0.5, 1] by default
        double delta = 0.25;         // load-imbalance tolerance
        std::uint32_t window = 4;    // evaluation rounds kept in the sliding window
        std::uint32_t residency = 2; // min rounds between migrations of one SE
        std::uint32_t max_migrations_per_round = 0; // 0 = max(1, n/10)
        double migration_cost_weight = 0.01;        // per serialized byte
        SimTime round_interval = 10;                // virtual-time distance between rounds
        std::uint32_t forced_per_round = 2;

        void validate() const
        {
            if (alpha <= 0.0 || alpha > 1.0)
            {
                throw ConfigError("gaia: alpha must be in (0, 1]");
            }
            if (delta <= 0.0)
            {
                throw ConfigError("gaia: delta must be > 0");
            }
            if (window == 0 || round_interval == 0)
            {
                throw ConfigError("gaia: window and round_interval must be > 0");
            }
        }
    };

    struct RunConfig
    {
        // model
        std::string model = "gossip";
        std::uint32_t n_entities = 0;
        SimTime end_time = 0;
        std::uint64_t seed = 1;
        GraphKind graph_kind = GraphKind::scale_free;
        GraphParams graph;
        gossip::Params gossip_params;
        wireless::Params wireless_params;

        // engine
        EngineKind engine = EngineKind::sequential;
        SimTime step = 1;
        SimTime lookahead = 0; // required iff engine == cmb
        std::uint32_t snapshot_every = 16;
        WallClock gvt_period_us = 5000;

        // runtime
        std::uint32_t n_lps = 1;
        Placement placement = Placement::round_robin;
        std::uint32_t replicas = 1;
        bool re_replication = false;
        EnvProfile env;
        PricingScheme pricing;
        GaiaConfig gaia;

        // output
        std::string trace_path;
        std::string report_path;

        std::uint32_t migration_cap() const
        {
            if (gaia.max_migrations_per_round > 0)
            {
                return gaia.max_migrations_per_round;
            }
            return std::max(1u, n_entities / 10);
        }

        void validate() const
        {
            if (n_entities == 0)
            {
                throw ConfigError("n_entities must be > 0");
            }
            if (end_time == 0)
            {
                throw ConfigError("end_time must be > 0");
            }
            if (engine == EngineKind::cmb && lookahead == 0)
            {
                throw ConfigError("lookahead: engine=cmb requires lookahead > 0");
            }
            if (engine != EngineKind::cmb && lookahead != 0)
            {
                throw ConfigError("lookahead: only meaningful with engine=cmb");
            }
            if (engine == EngineKind::timestepped && step == 0)
            {
                throw ConfigError("step must be > 0");
            }
            if (n_lps == 0)
            {
                throw ConfigError("n_lps must be > 0");
            }
            if (replicas == 0 || replicas > n_lps)
            {
                throw ConfigError("replicas must satisfy 1 <= replicas <= n_lps");
            }
            if (replicas > 1 && engine != EngineKind::timestepped)
            {
                throw ConfigError("replicas > 1 requires engine=timestepped");
            }
            if (engine == EngineKind::sequential && n_lps != 1)
            {
                throw ConfigError("engine=sequential runs on a single LP");
            }
            if (engine == EngineKind::timewarp && snapshot_every == 0)
            {
                throw ConfigError("snapshot_every must be > 0");
            }
            env.validate(n_lps);
            pricing.validate();
            gaia.validate();
        }
    };
} // namespace parsim
