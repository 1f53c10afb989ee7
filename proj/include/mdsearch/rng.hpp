#pragma once

#include <cmath>
#include <cstdint>

namespace mdsearch {

// splitmix64 finalizer. Bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    // distinct from mix64(a+b) so (a,b) and (b,a) separate
    return mix64(a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2) + mix64(b)));
}

// Sequential stream seeded by a hashed counter. Every simulation trial derives
// its own Stream from (master seed, purpose tag, trial index), which makes all
// results independent of thread count and scheduling.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform on [0,1) with 53 random bits
    double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return u01() < p; }

    // index uniform in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here: n is tiny vs 2^64 in all uses
        return next() % n;
    }

    // Box-Muller, no caching: exactly two uniforms per variate so the stream
    // position after k normals is deterministic.
    double normal(double mu, double sigma) {
        double u1 = u01(), u2 = u01();
        while (u1 <= 0.0) u1 = u01();  // probability 2^-53, but log(0) is fatal
        double r = std::sqrt(-2.0 * std::log(u1));
        return mu + sigma * r * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

// purpose tags keep independent random uses from colliding on the same counter
enum : std::uint64_t {
    TAG_CODEBOOK = 0x636f6465626f6f6bULL,  // "codebook"
    TAG_DITHER = 0x6469746865720000ULL,    // "dither"
    TAG_CHANNEL = 0x6368616e6e656c00ULL,   // "channel"
    TAG_TARGET = 0x7461726765740000ULL,    // "target"
    TAG_TRIAL = 0x747269616c000000ULL,     // "trial"
};

inline Stream derive_stream(std::uint64_t master_seed, std::uint64_t tag, std::uint64_t index) {
    return Stream(hash_combine(hash_combine(master_seed, tag), index));
}

}  // namespace mdsearch
