#pragma once

#include <cstdint>
#include <random>

namespace circlechaos {

namespace detail {
// splitmix64 finalizer; used to decorrelate the (seed, replica, purpose) key.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace detail

// Reproducible stream keyed by (master_seed, replica, purpose).
// Distinct keys give independent streams; identical keys replay bit-identical
// draws, independent of which thread consumes them.
class RngStream {
  public:
    explicit RngStream(std::uint64_t master_seed, std::uint64_t replica = 0,
                       std::uint64_t purpose = 0) {
        std::uint64_t s = master_seed;
        std::uint64_t a = detail::splitmix64(s);
        s ^= replica * 0xd6e8feb86659fd93ULL;
        std::uint64_t b = detail::splitmix64(s);
        s ^= purpose * 0xa2aa033b615009b5ULL;
        std::uint64_t c = detail::splitmix64(s);
        engine_.seed(a ^ (b << 1) ^ (c << 2) ^ detail::splitmix64(s));
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    std::uint64_t bits() { return engine_(); }
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

// Purpose tags: keep field draws, auxiliary draws and harness draws on
// disjoint streams so adding one experiment never shifts another.
namespace purpose {
inline constexpr std::uint64_t fourier_field = 1;
inline constexpr std::uint64_t cholesky_field = 2;
inline constexpr std::uint64_t vaguelet_field = 3;
inline constexpr std::uint64_t zeps_field = 4;
inline constexpr std::uint64_t kahane = 5;
inline constexpr std::uint64_t nested_field = 6;
inline constexpr std::uint64_t perturbation = 7;
inline constexpr std::uint64_t convolution_field = 8;
inline constexpr std::uint64_t harness = 100;
}  // namespace purpose

}  // namespace circlechaos
