#pragma once

#include <cstdint>
#include <vector>

namespace bistress {

// SplitMix64. Used instead of <random> engines+distributions so that
// sequences are bit-identical across standard libraries; seeds quoted in
// reports stay reproducible everywhere.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0,1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::vector<double> uniform_vector(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (auto& x : v) x = uniform(lo, hi);
        return v;
    }

  private:
    std::uint64_t state_;
};

// Halton low-discrepancy sequence, one value per (index, base) pair.
inline double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline std::uint64_t halton_base(int axis) {
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    return primes[axis % 8];
}

}  // namespace bistress
