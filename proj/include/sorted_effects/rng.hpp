#pragma once

#include <array>
#include <cstdint>

namespace sorted_effects {

/// Philox-4x32-10 counter-based generator. A (key, stream) pair names an
/// independent sequence, so replicate r can be regenerated from (seed, r)
/// without touching any other replicate's stream.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using Block = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t key, std::uint64_t stream);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return 0xffffffffu; }

    result_type operator()();
    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    // Standard exponential.
    double exponential();
    // Standard normal (Box-Muller; the second variate is cached).
    double normal();

    static Block block(Block counter, Key key);

private:
    Key key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
    Block buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace sorted_effects
