#pragma once

// Seeded random streams. The engine is std::mt19937_64; the distributions are
// written out here because libstdc++/libc++ distributions are not specified
// bit-for-bit, and every run artifact must be reproducible across toolchains.

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace cricrep {

/// FNV-1a 64-bit over `bytes`, starting from `basis`.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent named sub-stream of a root seed ("split", "init", "pairs", ...).
    static Rng derive(std::uint64_t root, std::string_view stream);

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n), n > 0, without modulo bias.
    std::size_t index(std::size_t n);
    double normal(double mean = 0.0, double sd = 1.0);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cricrep
