#pragma once

#include <cstdint>
#include <vector>

namespace bfuse {

// Deterministic random stream (xoshiro256** seeded via splitmix64).
// All draws are defined in terms of raw 64-bit outputs so sequences are
// identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();

    // Uniform on [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);

    // Standard normal via Box-Muller; draws two uniforms per pair.
    double normal();

    // Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    // Derives an independent stream id from a base seed and a tag; used to
    // give shuffling, dropout, augmentation and init their own substreams.
    static std::uint64_t mix(std::uint64_t seed, std::uint64_t tag);

private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace bfuse
