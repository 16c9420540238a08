#pragma once

// Counter-based random number generation (Philox-4x32-10).
//
// Streams are keyed by (seed, replication, stream id). A draw therefore
// depends only on the key and on how many values the stream has produced,
// never on scheduling, which makes multi-threaded Monte Carlo runs
// reproducible bit for bit regardless of the thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace covest {

namespace detail {

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u;
    constexpr std::uint32_t W1 = 0xBB67AE85u;

    auto round = [](std::array<std::uint32_t, 4>& c, const std::array<std::uint32_t, 2>& k) {
        std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(M1) * c[2];
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    };

    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            key[0] += W0;
            key[1] += W1;
        }
        round(ctr, key);
    }
    return ctr;
}

} // namespace detail

// One independent stream of uniforms/normals. Cheap to construct; carries
// only the key and the position within the stream.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t rep, std::uint32_t stream_id)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          rep_lo_(static_cast<std::uint32_t>(rep)),
          rep_hi_stream_(static_cast<std::uint32_t>(rep >> 32) ^ (stream_id * 0x9E3779B9u + stream_id)) {}

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0, 1]; never returns 0 so log() is always safe.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform on [0, 1).
    double uniform_co() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) {
        return -std::log(uniform()) / rate;
    }

private:
    void refill() {
        std::array<std::uint32_t, 4> ctr = {static_cast<std::uint32_t>(block_),
                                            static_cast<std::uint32_t>(block_ >> 32),
                                            rep_lo_, rep_hi_stream_};
        buf_ = detail::philox4x32_10(ctr, key_);
        ++block_;
        buf_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t rep_lo_;
    std::uint32_t rep_hi_stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace covest
