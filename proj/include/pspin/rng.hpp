#pragma once

#include <cstdint>
#include <random>

namespace pspin {

// Counter-based stream derivation: every parallel task draws from a generator seeded by
// (seed, kind, index) so results do not depend on thread count or schedule.

enum class StreamKind : std::uint64_t {
    generic = 0,
    disorder = 1,
    goe = 2,
    det_mc = 3,
    newton_start = 4,
    kick = 5,
    probe = 6,
    instance = 7,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_stream_id(std::uint64_t seed, StreamKind kind, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s ^= static_cast<std::uint64_t>(kind) * 0x9e3779b97f4a7c15ull;
    std::uint64_t b = splitmix64(s);
    s ^= index;
    std::uint64_t c = splitmix64(s);
    return a ^ (b << 1) ^ c;
}

class Rng {
  public:
    explicit Rng(std::uint64_t raw_seed) : gen_(raw_seed) {}
    Rng(std::uint64_t seed, StreamKind kind, std::uint64_t index)
        : gen_(mix_stream_id(seed, kind, index)) {}

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }  // [0,1)
    double chi(int dof) { return std::sqrt(2.0 * gamma_draw(0.5 * dof)); }
    std::mt19937_64& engine() { return gen_; }

  private:
    double gamma_draw(double shape) {
        std::gamma_distribution<double> g(shape, 1.0);
        return g(gen_);
    }

    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace pspin
