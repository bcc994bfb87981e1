#pragma once

#include <map>
#include <string>
#include <vector>

#include "fwrisk/pipeline.hpp"
#include "fwrisk/stats.hpp"

namespace fwrisk {

struct RowAccounting {
    std::size_t total = 0;
    std::size_t included = 0;
    std::size_t excluded = 0;
};

struct WelchEntry {
    std::string metric;
    Exposure lo;
    Exposure hi;
    stats::TestResult test;
    double p_bonferroni = 1.0;
};

struct IncreaseEntry {
    std::string metric;
    Exposure lo;
    Exposure hi;
    double mean_lo = 0.0;
    double mean_hi = 0.0;
    double relative_increase = 0.0;  // (hi - lo) / lo
};

struct LevelSummaryEntry {
    std::string metric;
    Exposure level;
    stats::StatSummary summary;
};

struct ExposureReport {
    RowAccounting rows;
    std::vector<LevelSummaryEntry> summaries;
    std::vector<WelchEntry> welch;  // adjacent level pairs, per metric
    std::vector<IncreaseEntry> increases;
    stats::TestResult anova_layers;  // across the three layer-risk populations
};

struct CorrelationCell {
    stats::TestResult pearson;
    stats::TestResult spearman;
};

struct MetricCorrelation {
    std::string metric;  // correlated against p_final
    stats::TestResult pearson;
};

struct KdeCurve {
    std::string name;
    std::vector<double> x;
    std::vector<double> density;
};

struct CrossLayerReport {
    RowAccounting rows;
    stats::StatSummary layer_summary[3];
    CorrelationCell layer_correlation[3][3];  // diagonal unused
    std::vector<MetricCorrelation> metric_correlations;
    std::vector<KdeCurve> kde_curves;
};

struct AblationRow {
    Variant variant = Variant::Full;
    double mean_divergence = 0.0;   // mean over the variant's defined pairs
    double mean_uncertainty = 0.0;  // mean over present layers
    double mean_p_final = 0.0;
    double divergence_delta_pct = 0.0;
    double uncertainty_delta_pct = 0.0;
    double risk_shift_pct = 0.0;
};

struct AblationReport {
    std::size_t instances = 0;
    Exposure level = Exposure::Medium;
    std::vector<AblationRow> rows;  // Full first
};

/// Builds the exposure study report from records; pure function of the
/// records so a second pass over the file reproduces it exactly.
ExposureReport exposure_report_from_records(
    const std::vector<RiskRecord>& records);

CrossLayerReport crosslayer_report_from_records(
    const std::vector<RiskRecord>& records);

struct StudyResult {
    std::vector<RiskRecord> records;
    ExposureReport report;
};

StudyResult run_exposure_study(const std::vector<FirmwareDescriptor>& batch,
                               const std::vector<ExposureLevel>& levels,
                               const ParameterSet& ps, Backend& backend,
                               const RunOptions& options);

AblationReport run_ablation(const std::vector<FirmwareDescriptor>& batch,
                            const ParameterSet& ps, Backend& backend,
                            const RunOptions& options,
                            Exposure level = Exposure::Medium);

// ---- calibration ----

struct CalibrationTarget {
    std::string stat;
    double value = 0.0;
    double weight = 1.0;
};

/// Evaluation context of the search: a fixed descriptor batch, the level
/// pair of the headline study, and optionally the demo descriptor.
struct CalibrationContext {
    std::vector<FirmwareDescriptor> batch;
    std::vector<ExposureLevel> levels;
    std::uint64_t perturb_seed = 42;
    const FirmwareDescriptor* demo_descriptor = nullptr;
};

struct CalibrationResult {
    ParameterSet params;
    double residual = 0.0;
    std::size_t accepted_steps = 0;
    std::vector<double> accepted_residuals;  // monotone non-increasing
    std::map<std::string, double> achieved;
};

/// Computes every statistic the calibration targets can name.
std::map<std::string, double> calibration_stats(const ParameterSet& ps,
                                                const CalibrationContext& ctx);

/// Seeded accept-if-better random search over the scalar knobs of the
/// parameter set (risk, coupling, cost and display coefficients).
CalibrationResult calibrate(const ParameterSet& start,
                            const std::vector<CalibrationTarget>& targets,
                            int budget, std::uint64_t search_seed,
                            const CalibrationContext& ctx);

// ---- report directory ----

void write_exposure_report(const ExposureReport& report,
                           const std::string& dir);
void write_crosslayer_report(const CrossLayerReport& report,
                             const std::string& dir);
void write_ablation_report(const AblationReport& report,
                           const std::string& path);

}  // namespace fwrisk
