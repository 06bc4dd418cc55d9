#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace act {

// Splittable counter-style PRNG (splitmix64). Pinned so that every sampled
// artifact is reproducible bit-for-bit across platforms; std:: distributions
// are deliberately avoided for the same reason.
//
// Identifier reported in file metadata: "splitmix64/box-muller".
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cached second variate).
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        // u1 in (0, 1] so the log is finite.
        double u1 = 1.0 - next_double();
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * std::numbers::pi * u2;
        cached_ = r * std::sin(theta);
        have_cached_ = true;
        return r * std::cos(theta);
    }

    // Independent child stream, keyed by id. The parent state is untouched.
    SplitMix64 split(std::uint64_t stream_id) const {
        SplitMix64 mixer(state_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1)));
        return SplitMix64(mixer.next_u64());
    }

    static constexpr const char* algorithm_name() { return "splitmix64/box-muller"; }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace act
