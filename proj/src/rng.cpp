#include "aggrolab/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace aggrolab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> c,
                                           std::array<std::uint32_t, 2> k) {
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

Stream::Stream(std::uint64_t master_seed, std::uint64_t replicate, std::uint64_t path,
               std::uint32_t sub)
    : seed_(master_seed), replicate_(replicate), path_(path), sub_(sub) {
    const std::uint64_t k = splitmix64(splitmix64(master_seed) ^ replicate);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

Stream::result_type Stream::operator()() {
    if (used_ >= 4) {
        if (block_ == std::numeric_limits<std::uint32_t>::max())
            throw std::runtime_error("random stream exhausted");
        buf_ = philox4x32_10({block_, sub_, static_cast<std::uint32_t>(path_),
                              static_cast<std::uint32_t>(path_ >> 32)},
                             key_);
        ++block_;
        used_ = 0;
    }
    const std::uint64_t lo = buf_[used_];
    const std::uint64_t hi = buf_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

Stream Stream::for_replicate(std::uint64_t replicate) const { return Stream(seed_, replicate, 0, 0); }

Stream Stream::for_path(std::uint64_t path) const { return Stream(seed_, replicate_, path, 0); }

Stream Stream::substream(std::uint32_t sub) const { return Stream(seed_, replicate_, path_, sub); }

double Stream::uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

double Stream::normal() { return gauss_(*this); }

double Stream::exponential() { return -std::log(uniform()); }

}  // namespace aggrolab
