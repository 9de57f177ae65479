#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace aggrolab {

// Philox4x32-10 block cipher used as a counter-based generator.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

// A random stream keyed by (master seed, replicate, path, substream). Streams
// with different keys never share counter blocks, so work can be partitioned
// by path or replicate without changing any draw.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t master_seed, std::uint64_t replicate = 0,
                    std::uint64_t path = 0, std::uint32_t sub = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()();

    Stream for_replicate(std::uint64_t replicate) const;
    Stream for_path(std::uint64_t path) const;
    Stream substream(std::uint32_t sub) const;

    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    double exponential();

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t replicate() const { return replicate_; }
    std::uint64_t path() const { return path_; }
    std::uint32_t sub() const { return sub_; }

private:
    std::uint64_t seed_;
    std::uint64_t replicate_;
    std::uint64_t path_;
    std::uint32_t sub_;
    std::array<std::uint32_t, 2> key_{};
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int used_ = 4;
    std::normal_distribution<double> gauss_{0.0, 1.0};
};

}  // namespace aggrolab
