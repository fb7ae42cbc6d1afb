#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

// Deterministic random streams. Every stream is derived from
// (base_seed, replication, tag) through a splitmix64 mix, so the learner and
// the environment consume independent sequences: adding draws to one stream
// never shifts the other.

namespace bobw {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
} // namespace detail

enum class StreamTag : std::uint64_t { Learner = 1, Environment = 2, Aux = 3 };

// xoshiro256++ seeded via splitmix64.
class Rng {
public:
    Rng() : Rng(0, 0, StreamTag::Aux) {}

    Rng(std::uint64_t base_seed, std::uint64_t replication, StreamTag tag) {
        std::uint64_t m = base_seed;
        m = detail::splitmix64(m) ^ (replication * 0x9e3779b97f4a7c15ULL);
        m = detail::splitmix64(m) ^ static_cast<std::uint64_t>(tag);
        for (auto& si : s_) si = detail::splitmix64(m);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("next_below: n must be positive");
        return next_u64() % n;
    }

    bool bernoulli(double p) { return next_double() < p; }

    // Index sampled according to (not necessarily normalized) nonnegative weights.
    int sample_index(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (!(total > 0.0)) throw std::invalid_argument("sample_index: weights sum to zero");
        double u = next_double() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(weights.size()) - 1;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace bobw
