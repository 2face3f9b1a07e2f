#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace leakaudit {

// Counter-based seed derivation. Every random stream in the library is keyed by
// (base seed, label, counters), so results never depend on the order in which
// streams are created or consumed.
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t base, std::string_view label,
                          std::uint64_t a = 0, std::uint64_t b = 0) noexcept;

// Thin wrapper over mt19937_64 with library-defined mappings to uniform,
// bounded-integer and normal variates. std:: distributions are avoided because
// their output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform01();

    // Uniform on [0, 1] (closed); used for interpolation weights.
    double uniform_closed01();

    // Uniform integer in [0, n). n must be > 0.
    std::size_t below(std::size_t n);

    double normal();

    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace leakaudit
