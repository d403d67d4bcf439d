#pragma once

#include <cstdint>
#include <random>

namespace sake {

// Seeded random stream with portable output: mt19937_64 is fully specified by
// the standard, and the transforms below avoid the implementation-defined
// <random> distributions so generated files match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

    double normal();

    std::uint64_t next() { return engine_(); }

    // Independent child stream; used so that one edit's retries do not shift
    // the draws of the next edit.
    Rng split() { return Rng(engine_()); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sake
