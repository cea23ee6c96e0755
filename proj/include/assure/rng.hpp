// rng.hpp
//
// Counter-based random streams (Philox4x32-10, Salmon et al. 2011). A stream is
// identified by (seed, tag, rep, unit); draws are a pure function of that
// identity and the draw index, so serial and parallel runs agree.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "assure/error.hpp"

namespace assure {

inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
        key[0] += w0;
        key[1] += w1;
    }
    return ctr;
}

/// Stream tags used by the simulator.
enum class StreamTag : std::uint32_t { mu = 1, sigma = 2, cost = 3, covariate = 4, outcome = 5, coupling = 6, misc = 7 };

class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamTag tag, std::uint32_t rep, std::uint32_t unit)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          tag_(static_cast<std::uint32_t>(tag)), rep_(rep), unit_(unit) {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            buf_ = philox4x32({block_++, unit_, rep_, tag_}, key_);
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    /// Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by the Box-Muller transform; pairs are cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double t = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    /// Student t with integer degrees of freedom: Z / sqrt(chi2_df / df).
    double student_t(int df) {
        if (df < 1)
            throw PreconditionError("student_t degrees of freedom must be a positive integer");
        const double z = normal();
        double chi2 = 0.0;
        for (int j = 0; j < df; ++j) {
            const double g = normal();
            chi2 += g * g;
        }
        return z / std::sqrt(chi2 / df);
    }

    /// Poisson(mu): inversion for mu < 30, transformed rejection (PTRS,
    /// Hormann 1993) above.
    std::int64_t poisson(double mu) {
        if (!(mu >= 0.0) || !std::isfinite(mu))
            throw DomainError("poisson mean must be non-negative and finite");
        if (mu == 0.0)
            return 0;
        if (mu < 30.0) {
            double p = std::exp(-mu), cdf = p;
            const double u = uniform();
            std::int64_t k = 0;
            while (u > cdf && k < 1000) {
                ++k;
                p *= mu / static_cast<double>(k);
                cdf += p;
            }
            return k;
        }
        const double slam = std::sqrt(mu), loglam = std::log(mu);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        while (true) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const double k = std::floor((2.0 * a / us + b) * u + mu + 0.43);
            if (us >= 0.07 && v <= vr)
                return static_cast<std::int64_t>(k);
            if (k < 0.0 || (us < 0.013 && v > us))
                continue;
            if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <= -mu + k * loglam - std::lgamma(k + 1.0))
                return static_cast<std::int64_t>(k);
        }
    }

private:
    std::array<std::uint32_t, 2> key_;
    std::uint32_t tag_, rep_, unit_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace assure
