#include "fwrisk/rng.hpp"

#include <cmath>
#include <numbers>

namespace fwrisk {

namespace {
constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t SeedStream::mix64(std::uint64_t x) {
    // SplitMix64 finalizer (Steele, Lea, Flood 2014).
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

SeedStream::SeedStream(std::uint64_t base_seed, std::uint64_t instance_id,
                       std::uint64_t purpose_tag) {
    std::uint64_t k = mix64(base_seed + kGoldenGamma);
    k = mix64(k ^ (instance_id * kGoldenGamma + 1));
    key_ = mix64(k ^ (purpose_tag * kGoldenGamma + 2));
}

SeedStream::SeedStream(std::uint64_t base_seed, std::uint64_t instance_id,
                       StreamPurpose purpose)
    : SeedStream(base_seed, instance_id,
                 static_cast<std::uint64_t>(purpose)) {}

std::uint64_t SeedStream::next_u64() {
    return mix64(key_ + (++counter_) * kGoldenGamma);
}

double SeedStream::next_unit() {
    // 53-bit mantissa, shifted into (0, 1] so log() below is always finite.
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double SeedStream::next_normal() {
    if (cached_normal_) {
        double z = *cached_normal_;
        cached_normal_.reset();
        return z;
    }
    double u1 = next_unit();
    double u2 = next_unit();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = radius * std::sin(angle);
    return radius * std::cos(angle);
}

}  // namespace fwrisk
