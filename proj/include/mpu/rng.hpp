#pragma once

#include <cstdint>
#include <random>

namespace mpu {

// Stream tags keep independently consumed random streams from colliding
// when they are derived from the same (seed, trial) pair.
enum class Stream : std::uint64_t {
    matrix = 1,
    self_norm_base = 2,
    interpolate = 3,
    ou_flow = 4,
    column_swap = 5,
    surrogate = 6,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}
}  // namespace detail

// Child seed = hash64(base_seed, trial, stream tag). Parallel trials draw
// from disjoint streams regardless of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial,
                                 Stream stream) {
    std::uint64_t h = detail::splitmix64(base);
    h = detail::splitmix64(h ^ detail::splitmix64(trial + 0x51ed270b7a64fc1dULL));
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(stream));
    return h;
}

inline std::mt19937_64 make_engine(std::uint64_t base, std::uint64_t trial,
                                   Stream stream) {
    return std::mt19937_64(derive_seed(base, trial, stream));
}

}  // namespace mpu
