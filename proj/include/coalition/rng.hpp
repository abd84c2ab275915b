#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace coalition {

// splitmix64 finalizer. Used both as the seed-derivation mix and to bootstrap
// engine state from small integers.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic derived seed from a root seed plus stream indexes. Every
// random decision in the toolkit draws from a stream derived this way, so
// outputs are reproducible and independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = mix64(root);
    for (std::uint64_t v : path)
        h = mix64(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
    return h;
}

// FNV-1a over bytes; used to derive order-invariant per-item seeds from
// canonical string keys.
inline std::uint64_t hash_str(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Thin wrapper over mt19937_64 with explicit integer/real mappings. The
// standard distributions are implementation-defined, so we avoid them to keep
// byte-identical outputs across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n). Rejection sampling removes modulo bias.
    std::uint64_t bounded(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return r % n;
    }

    // Uniform double in [0, 1) with 53 bits of precision.
    double real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace coalition
