#pragma once

#include "parsim/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace parsim
{
    // One interval of extra load on an LP: its effective speed is divided by
    // `slowdown` while the emulated wall clock is inside [start, end).
    struct BackgroundEpisode
    {
        LpId lp = 0;
        WallClock start_wct = 0;
        WallClock end_wct = 0;
        double slowdown = 1.0;
    };

    struct CrashPoint
    {
        LpId lp = 0;
        WallClock at_wct = 0;
    };

    // Emulated heterogeneous execution environment: per-LP speed, channel
    // latency parameters, scheduled crashes and background-load episodes.
    // Everything is data; the kernel samples it deterministically.
    struct EnvProfile
    {
        double default_speed = 100000.0; // events per emulated second
        std::map<LpId, double> lp_speed; // overrides
        WallClock latency_base_us = 200;
        WallClock latency_jitter_us = 0; // uniform in [0, jitter]
        double serialize_us_per_byte = 0.05;
        std::vector<CrashPoint> crashes;
        std::vector<BackgroundEpisode> background;

        double base_speed(LpId lp) const
        {
            const auto it = lp_speed.find(lp);
            const double s = it == lp_speed.end() ? default_speed : it->second;
            return s;
        }

        double effective_speed(LpId lp, WallClock now) const
        {
            double s = base_speed(lp);
            for (const auto &ep : background)
            {
                if (ep.lp == lp && now >= ep.start_wct && now < ep.end_wct && ep.slowdown > 0.0)
                {
                    s /= ep.slowdown;
                }
            }
            return s;
        }

        void validate(std::uint32_t n_lps) const
        {
            if (default_speed <= 0.0)
            {
                throw ConfigError("env: speed must be > 0");
            }
            for (const auto &[lp, s] : lp_speed)
            {
                if (lp >= n_lps)
                {
                    throw ConfigError("env: speed override for unknown lp " + std::to_string(lp));
                }
                if (s <= 0.0)
                {
                    throw ConfigError("env: speed must be > 0");
                }
            }
            std::vector<LpId> crashed;
            for (const auto &c : crashes)
            {
                if (c.lp >= n_lps)
                {
                    throw ConfigError("env: crash for unknown lp " + std::to_string(c.lp));
                }
                if (std::find(crashed.begin(), crashed.end(), c.lp) != crashed.end())
                {
                    throw ConfigError("env: duplicate crash for lp " + std::to_string(c.lp));
                }
                crashed.push_back(c.lp);
            }
            for (const auto &ep : background)
            {
                if (ep.lp >= n_lps)
                {
                    throw ConfigError("env: background episode for unknown lp " + std::to_string(ep.lp));
                }
                if (ep.slowdown <= 0.0 || ep.end_wct <= ep.start_wct)
                {
                    throw ConfigError("env: malformed background episode");
                }
            }
        }
    };

    // Emulated cost of processing n events on an LP, in microseconds. The
    // speed is sampled at the charge instant; an episode boundary inside a
    // charge is attributed to its start.
    inline WallClock charge_processing_us(const EnvProfile &env, LpId lp, std::uint64_t n_events,
                                          WallClock now)
    {
        if (n_events == 0)
        {
            return 0;
        }
        const double us = static_cast<double>(n_events) * 1e6 / env.effective_speed(lp, now);
        return static_cast<WallClock>(std::llround(us));
    }

    inline WallClock charge_serialization_us(const EnvProfile &env, std::size_t bytes)
    {
        const double us = static_cast<double>(bytes) * env.serialize_us_per_byte;
        return static_cast<WallClock>(std::llround(us));
    }
} // namespace parsim
