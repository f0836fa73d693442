#pragma once

#include <cstdint>

namespace parsim
{
    namespace detail
    {
        inline std::uint64_t splitmix64(std::uint64_t x)
        {
            x += 0x9e3779b97f4a7c15ULL;
            x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
            x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
            return x ^ (x >> 31);
        }
    } // namespace detail

    // Counter-based random stream: the draw sequence is a pure function of
    // (key, counter), so a stream can be serialized as two integers and moved
    // between LPs without changing a single draw. Entities get their own
    // stream derived from the run seed and their id; migration therefore never
    // perturbs model randomness.
    class RngStream
    {
    public:
        RngStream() = default;
        RngStream(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

        std::uint64_t next_u64()
        {
            return detail::splitmix64(key_ ^ detail::splitmix64(counter_++ + 0x632be59bd9b4e019ULL));
        }

        // Uniform in [0, bound). bound must be > 0.
        std::uint64_t next_below(std::uint64_t bound)
        {
            return next_u64() % bound;
        }

        // Uniform in [lo, hi] inclusive.
        std::uint64_t next_range(std::uint64_t lo, std::uint64_t hi)
        {
            return lo + next_below(hi - lo + 1);
        }

        // Bernoulli with probability p (p in [0,1]).
        bool next_bool(double p)
        {
            if (p <= 0.0)
            {
                return false;
            }
            if (p >= 1.0)
            {
                return true;
            }
            // 53-bit uniform fraction, exact and portable.
            const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
            return u < p;
        }

        std::uint64_t key() const { return key_; }
        std::uint64_t counter() const { return counter_; }
        void restore(std::uint64_t key, std::uint64_t counter)
        {
            key_ = key;
            counter_ = counter;
        }

        friend bool operator==(const RngStream &, const RngStream &) = default;

    private:
        std::uint64_t key_ = 0;
        std::uint64_t counter_ = 0;
    };

    // Stable derivation of sub-stream keys from the run seed. Domain tags keep
    // the entity streams, graph generator, placement shuffle and channel
    // jitter streams disjoint.
    inline std::uint64_t derive_key(std::uint64_t seed, std::uint64_t domain, std::uint64_t index = 0)
    {
        return detail::splitmix64(detail::splitmix64(seed ^ (domain * 0x9e3779b97f4a7c15ULL)) + index);
    }

    namespace rng_domain
    {
        inline constexpr std::uint64_t entity = 1;
        inline constexpr std::uint64_t graph = 2;
        inline constexpr std::uint64_t placement = 3;
        inline constexpr std::uint64_t jitter = 4;
        inline constexpr std::uint64_t forced_migration = 5;
        inline constexpr std::uint64_t model_init = 6;
    } // namespace rng_domain
} // namespace parsim
