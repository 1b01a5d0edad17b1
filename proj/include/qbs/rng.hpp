// rng.hpp — Philox4x32-10 counter-based generator with Gaussian sampling
//
// One stream per (seed, stream id); the output depends only on those two and
// the draw index, never on which thread consumes it.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace qbs {

class Philox4x32 {
public:
    using block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          ctr_{0u, 0u, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    block next() {
        block out = bijection(ctr_, key_);
        if (++ctr_[0] == 0) ++ctr_[1];
        return out;
    }

    // Known-answer access for tests.
    static block bijection(block ctr, std::array<std::uint32_t, 2> key) {
        for (int r = 0; r < 10; ++r) {
            ctr = round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static block round(const block& c, const std::array<std::uint32_t, 2>& k) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    std::array<std::uint32_t, 2> key_;
    block ctr_;
};

// Standard normals, two per Box–Muller transform, two transforms per block.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream) : gen_(seed, stream) {}

    double operator()() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

private:
    static double unit_open(std::uint32_t hi, std::uint32_t lo) {
        // 53-bit uniform in (0, 1).
        const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
        return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
    }

    void refill() {
        const auto a = gen_.next();
        const auto b = gen_.next();
        const double u[4] = {unit_open(a[0], a[1]), unit_open(a[2], a[3]), unit_open(b[0], b[1]),
                             unit_open(b[2], b[3])};
        for (int k = 0; k < 2; ++k) {
            const double r = std::sqrt(-2.0 * std::log(u[2 * k]));
            const double th = 2.0 * M_PI * u[2 * k + 1];
            buf_[2 * k] = r * std::cos(th);
            buf_[2 * k + 1] = r * std::sin(th);
        }
        pos_ = 0;
    }

    Philox4x32 gen_;
    std::array<double, 4> buf_{};
    int pos_{4};
};

} // namespace qbs
