#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace dbnd {

// splitmix64 step (Vigna's public-domain generator). Used to derive
// independent sub-stream seeds from one master seed.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic seed for sub-stream `stream` of a master seed. Distinct
// streams never share state, so per-image / per-layer work stays
// reproducible regardless of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    return splitmix64_next(s);
}

// Seeded random stream: std::mt19937_64 engine with hand-rolled output
// transforms. The engine's output sequence is pinned by the C++ standard;
// the <random> distributions are not, so we avoid them and a given seed
// reproduces bit-identical draws on every toolchain.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    // uniform on [0, 1), 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // standard normal deviate, Marsaglia polar method; the paired deviate
    // is cached so consecutive calls consume the engine in a fixed pattern
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * r;
        has_spare_ = true;
        return u * r;
    }

    bool bernoulli(double p) {
        if (p < 0.0 || p > 1.0)
            throw std::invalid_argument("bernoulli: probability outside [0,1]");
        return uniform() < p;
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dbnd
