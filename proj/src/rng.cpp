#include <mg1sim/rng.hpp>

#include <cmath>

namespace mg1sim {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::uint32_t mul_hi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
}

}  // namespace

std::array<std::uint32_t, 4> RngStream::generate_block() const {
    std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(counter_),
        static_cast<std::uint32_t>(counter_ >> 32),
        stream_,
        0u,
    };
    std::uint32_t k0 = key0_;
    std::uint32_t k1 = key1_;
    for (int round = 0; round < 10; ++round) {
        const std::uint32_t lo0 = kPhiloxM0 * ctr[0];
        const std::uint32_t hi0 = mul_hi(kPhiloxM0, ctr[0]);
        const std::uint32_t lo1 = kPhiloxM1 * ctr[2];
        const std::uint32_t hi1 = mul_hi(kPhiloxM1, ctr[2]);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return ctr;
}

double RngStream::exponential(double rate) {
    return -std::log(uniform01()) / rate;
}

}  // namespace mg1sim
