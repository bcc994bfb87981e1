#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwrisk/alignment.hpp"
#include "fwrisk/backends.hpp"
#include "fwrisk/cost_model.hpp"
#include "fwrisk/descriptors.hpp"
#include "fwrisk/params.hpp"

namespace fwrisk {

enum class Variant { Full, NoConfig, NoStructure, NoFusion, Shallow };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Per-instance output of the full pipeline. Column order of the records
/// file follows the field order here and is documented in the README.
struct RiskRecord {
    std::int64_t instance_id = 0;
    Exposure exposure = Exposure::None;
    Variant variant = Variant::Full;

    double display[3] = {0, 0, 0};  // r_cfg, r_struct, r_fusion (0-100)
    double r1_raw = 0.0;
    double r2_raw = 0.0;
    double p_fusion = 0.0;
    double p_final = 0.0;

    double divergence = 0.0;         // D
    double d_pairwise[3][3] = {};    // ordered pairs, diagonal zero
    double entropy = 0.0;
    double e_mis = 0.0;
    double e_weighted = 0.0;
    double psi = 0.0;

    double e_global = 0.0;
    double e_layer[3] = {0, 0, 0};
    double latency[3] = {0, 0, 0};
    double cpu[3] = {0, 0, 0};
    double gpu[3] = {0, 0, 0};
    double tokens[3] = {0, 0, 0};
    double risk_theory = 0.0;
    double risk_protocol = 0.0;

    double uncertainty[3] = {0, 0, 0};
    int depth[3] = {0, 0, 0};
    double wall_latency[3] = {0, 0, 0};
    int retries = 0;

    double stable_fraction = 0.0;
    bool failed = false;
    bool excluded = false;
};

/// Ordered (j,k) divergence pairs that are defined for a variant; used by
/// the ablation deltas. For Shallow the "3" slot is the single affine
/// embedding and slots 1/2 are the normalized raw inputs.
std::vector<std::pair<int, int>> defined_pairs(Variant v);

/// Layers whose auxiliary signals count as present for a variant.
std::vector<int> present_layers(Variant v);

/// Runs the full pipeline on one already-perturbed descriptor. Backend
/// failures flag the record instead of propagating.
RiskRecord evaluate_instance(const FirmwareDescriptor& f, Exposure level,
                             Variant variant, const ParameterSet& ps,
                             Backend& backend);

enum class ExecutionMode { Serial, Parallel };

struct RunOptions {
    std::uint64_t perturb_seed = 42;
    bool paired = true;
    Variant variant = Variant::Full;
    ExecutionMode mode = ExecutionMode::Parallel;
    int workers = 0;  // 0: library default thread count
    /// Synthetic wall latencies are normalized to zero in emitted records
    /// so equal-seed runs are byte-identical; remote latencies are kept.
    bool zero_synthetic_latency = true;
};

/// Evaluates every (instance, level) cell; output index is
/// instance_index * levels.size() + level_index regardless of schedule.
std::vector<RiskRecord> run_pipeline(
    const std::vector<FirmwareDescriptor>& descriptors,
    const std::vector<ExposureLevel>& levels, const ParameterSet& ps,
    Backend& backend, const RunOptions& options);

// Records file: delimited text, one header row, one row per record.
extern const char* const kRecordsHeader;
std::string record_to_csv(const RiskRecord& r);
RiskRecord record_from_csv(const std::string& line);
void write_records_csv(const std::vector<RiskRecord>& records,
                       const std::string& path);
std::vector<RiskRecord> read_records_csv(const std::string& path);

}  // namespace fwrisk
