#pragma once

#include "parsim/kernel.hpp"
#include "parsim/types.hpp"

#include <vector>

namespace parsim::detail
{
    // K-way merge of per-LP processed logs (each already in canonical order)
    // into the committed trace. Equal keys are replica duplicates and commit
    // once.
    inline void merge_commit(Kernel &kernel, std::vector<std::vector<Event>> &logs)
    {
        std::vector<std::size_t> pos(logs.size(), 0);
        bool have_last = false;
        EventKey last{};
        while (true)
        {
            int best = -1;
            EventKey best_key{};
            for (std::size_t i = 0; i < logs.size(); ++i)
            {
                if (pos[i] >= logs[i].size())
                {
                    continue;
                }
                const EventKey k = key_of(logs[i][pos[i]]);
                if (best < 0 || k < best_key)
                {
                    best = static_cast<int>(i);
                    best_key = k;
                }
            }
            if (best < 0)
            {
                break;
            }
            const Event &e = logs[static_cast<std::size_t>(best)][pos[static_cast<std::size_t>(best)]++];
            if (have_last && key_of(e) == last)
            {
                continue; // replica duplicate
            }
            last = key_of(e);
            have_last = true;
            kernel.commit(e);
        }
        for (auto &log : logs)
        {
            log.clear();
        }
    }
} // namespace parsim::detail
