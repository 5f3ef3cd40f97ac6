#pragma once

#include <cstdint>
#include <random>

namespace levylab {

// splitmix64 step; used to derive well-separated per-replicate seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream for one (master_seed, replicate_index) pair. Parallel
// and serial runs see identical streams because nothing is shared between
// replicates.
inline std::mt19937_64 replicate_engine(std::uint64_t master_seed,
                                        std::uint64_t replicate_index) {
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64(s);
    s ^= 0x632be59bd9b4e019ULL + replicate_index;
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                      static_cast<std::uint32_t>(replicate_index),
                      static_cast<std::uint32_t>(replicate_index >> 32)};
    return std::mt19937_64(seq);
}

// Sub-seed derivation for independent auxiliary runs (expectation estimates,
// randomized experiment inputs) so they never overlap the main stream.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t tag) {
    std::uint64_t s = master_seed ^ (0x9e3779b97f4a7c15ULL * (tag + 1));
    return splitmix64(s);
}

}  // namespace levylab
