#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace morilab {

/// Identifier recorded in manifests; bump when the stream below changes.
inline constexpr std::string_view rng_identifier = "mt19937_64/box-muller/v1";

/// SplitMix64 finalizer, used to derive independent per-task seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t stream) noexcept {
    return mix_seed(mix_seed(mix_seed(base) ^ trial) ^ (stream + 0x5851f42d4c957f2dULL));
}

/// Standard normal deviates with a stream fixed by the C++ standard (mt19937_64) and a
/// Box-Muller transform, so draws replay identically across standard libraries.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 53-bit uniforms in (0, 1] and [0, 1).
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace morilab
