#pragma once

#include <array>
#include <cstdint>

namespace mg1sim {

// Counter-based generator (Philox4x32-10). A stream is identified by
// (seed, stream id); draws are a pure function of (seed, stream, counter),
// so runs are reproducible bit-for-bit across platforms and replications
// with distinct seeds are decorrelated.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint32_t stream)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_(stream) {}

    std::uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const std::array<std::uint32_t, 4> block = generate_block();
        spare_ = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
        have_spare_ = true;
        ++counter_;
        return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    }

    // Uniform on (0,1), never exactly 0 or 1.
    double uniform01() {
        const std::uint64_t bits = next_u64() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 0.5) * 0x1p-53;
    }

    // Exponential with the given rate (mean 1/rate).
    double exponential(double rate);

private:
    std::array<std::uint32_t, 4> generate_block() const;

    std::uint32_t key0_;
    std::uint32_t key1_;
    std::uint32_t stream_;
    std::uint64_t counter_ = 0;
    std::uint64_t spare_ = 0;
    bool have_spare_ = false;
};

}  // namespace mg1sim
