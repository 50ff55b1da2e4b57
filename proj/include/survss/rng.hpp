#pragma once

#include <cstdint>
#include <random>

namespace survss {

// Well-known operation tags used to derive independent streams from one seed.
namespace stream_tag {
inline constexpr std::uint64_t predictors = 0x7072656469637473ULL;
inline constexpr std::uint64_t events = 0x6576656e74730000ULL;
inline constexpr std::uint64_t censoring = 0x63656e736f720000ULL;
inline constexpr std::uint64_t mape = 0x6d61706500000000ULL;
inline constexpr std::uint64_t calibration = 0x63616c6962000000ULL;
}  // namespace stream_tag

/// Keyed random stream. Each (seed, tag, index) triple seeds its own engine,
/// so per-individual draws do not depend on the order in which individuals
/// are processed.
class Stream {
public:
    Stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0) {
        std::seed_seq key{low(seed), high(seed), low(tag), high(tag), low(index), high(index)};
        engine_.seed(key);
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1); never returns 0, so -log(u) is finite.
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() { return normal_(engine_); }

private:
    static std::uint32_t low(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
    static std::uint32_t high(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace survss
