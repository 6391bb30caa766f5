#pragma once

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <vector>

namespace ionlink {

inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with splitmix64 seeding. Self-contained so that streams are
// bit-identical across platforms and standard libraries.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) {
        uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    // Substream derivation: fold each path element into the master seed via
    // splitmix64 so (seed, path) fully determines the stream regardless of
    // which worker consumes it.
    static RandomStream derive(uint64_t master, std::initializer_list<uint64_t> path) {
        uint64_t sm = master;
        uint64_t acc = splitmix64(sm);
        for (uint64_t p : path) {
            uint64_t x = acc ^ (p + 0x9e3779b97f4a7c15ULL);
            acc = splitmix64(x);
        }
        return RandomStream(acc);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Index into a probability vector; probabilities need not be normalized.
    std::size_t discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        if (total <= 0.0) throw std::invalid_argument("discrete: nonpositive total weight");
        double u = uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

    // Binomial draw; exact Bernoulli loop for small n, Gaussian approximation
    // once counts are large enough that the relative error is negligible.
    std::int64_t binomial(std::int64_t n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        const double mean = static_cast<double>(n) * p;
        if (n <= 4096 || mean < 1024.0 || static_cast<double>(n) - mean < 1024.0) {
            std::int64_t c = 0;
            for (std::int64_t i = 0; i < n; ++i) c += bernoulli(p) ? 1 : 0;
            return c;
        }
        const double sd = std::sqrt(mean * (1.0 - p));
        const double draw = std::round(mean + sd * gaussian());
        return std::min<std::int64_t>(n, std::max<std::int64_t>(0, static_cast<std::int64_t>(draw)));
    }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * 3.14159265358979323846 * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    uint64_t s_[4] = {};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ionlink
