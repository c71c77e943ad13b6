#pragma once

#include <cstdint>
#include <random>

namespace craftmesh {

/// Seeded generator whose real-valued draws are identical across standard
/// library implementations (std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace craftmesh
