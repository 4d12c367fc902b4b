#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace jp {

/**
 * splitmix64 finalizer. Used both as a seed scrambler and as the
 * child-stream derivation hash (see Rng::child below).
 */
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * Small, fast, fully deterministic PRNG (xoshiro256++).
 *
 * We deliberately avoid std::normal_distribution / std::uniform_real_distribution:
 * their output sequences are implementation-defined, and every experiment here
 * must be replayable bit-for-bit from a single master seed.
 *
 * Child-stream scheme: child(i) reseeds with mix64(state_seed ^ mix64(i+1)),
 * so worker/stage streams are derived by counter, never by sharing state.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        // Fill state with splitmix64 outputs; guaranteed not all-zero.
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = mix64(s);
            w = s;
        }
        have_spare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t seed() const { return seed_; }

    /// Derived, independent child stream; deterministic in (seed, index).
    Rng child(std::uint64_t index) const {
        return Rng(mix64(seed_ ^ mix64(index + 1)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in (0,1); never returns exactly 0 (safe for logs).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the polar (Marsaglia) method with cached spare.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        have_spare_ = true;
        return u * m;
    }

    /// Fill `out` with iid standard normals.
    void fill_normal(double* out, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) out[i] = normal();
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t state_[4];
    bool have_spare_;
    double spare_;
};

/**
 * Seeded gamma_n sampler: per-coordinate iid standard normals.
 * Identical seed => identical stream. Child samplers derive by counter.
 */
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    std::uint64_t seed() const { return rng_.seed(); }

    GaussianSampler child(std::uint64_t index) const {
        GaussianSampler s(0);
        s.rng_ = rng_.child(index);
        return s;
    }

    double normal() { return rng_.normal(); }
    double uniform() { return rng_.uniform(); }
    double uniform(double lo, double hi) { return rng_.uniform(lo, hi); }
    std::uint64_t next_u64() { return rng_.next_u64(); }

    std::vector<double> point(std::size_t n) {
        std::vector<double> x(n);
        rng_.fill_normal(x.data(), n);
        return x;
    }

    void point_into(double* out, std::size_t n) { rng_.fill_normal(out, n); }

private:
    Rng rng_;
};

}  // namespace jp
