#pragma once

#include <cstdint>
#include <random>

namespace atlas::detail {

// mt19937_64's output sequence is fixed by the standard; the std
// distributions are not, so fixtures draw through these helpers instead.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [lo, hi].
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next() % span);
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

    template <typename Container>
    const auto& pick(const Container& c) {
        return c[static_cast<std::size_t>(between(0, static_cast<std::int64_t>(c.size()) - 1))];
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace atlas::detail
