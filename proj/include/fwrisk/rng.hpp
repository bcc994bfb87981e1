#pragma once

#include <cstdint>
#include <optional>

namespace fwrisk {

// Purpose tags keep the draw streams of unrelated concerns disjoint.
// Values are part of the on-disk reproducibility contract: changing them
// changes every generated dataset.
enum class StreamPurpose : std::uint64_t {
    ConfigSample = 1,
    StructureSample = 2,
    ArchSample = 3,
    PerturbConfig = 4,
    PerturbStructure = 5,
    ParamInit = 6,
    ShallowInit = 7,
    Calibration = 8,
};

/// Counter-based random stream: every draw is a pure function of
/// (base_seed, instance_id, purpose, draw_index), so generation is
/// independent of evaluation order and of how work is split across threads.
///
/// Construction derives a 64-bit key by chaining the SplitMix64 finalizer
/// over the three inputs; draw i is finalizer(key + (i+1) * GOLDEN_GAMMA).
class SeedStream {
public:
    SeedStream(std::uint64_t base_seed, std::uint64_t instance_id,
               StreamPurpose purpose);
    SeedStream(std::uint64_t base_seed, std::uint64_t instance_id,
               std::uint64_t purpose_tag);

    std::uint64_t next_u64();

    /// Uniform draw in the half-open-from-zero interval (0, 1].
    double next_unit();

    /// Standard normal via Box-Muller; consumes two uniforms per pair and
    /// caches the second value.
    double next_normal();

    static std::uint64_t mix64(std::uint64_t x);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::optional<double> cached_normal_;
};

}  // namespace fwrisk
