#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "fwrisk/experiments.hpp"
#include "fwrisk/io.hpp"

namespace fwrisk {

using nlohmann::json;

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", x);
    return buf;
}

std::string summary_csv_row(const std::string& label, Exposure level,
                            bool with_level, const stats::StatSummary& s) {
    std::string row = label;
    if (with_level) row += "," + to_string(level);
    row += "," + std::to_string(s.n) + "," + num(s.mean) + "," +
           num(s.stddev) + "," + num(s.iqr) + "," + num(s.min) + "," +
           num(s.max);
    row += ",";
    if (s.skewness) row += num(*s.skewness);
    row += ",";
    if (s.kurtosis_excess) row += num(*s.kurtosis_excess);
    return row;
}

json test_to_json(const stats::TestResult& t) {
    json j;
    switch (t.kind) {
        case stats::TestKind::WelchT: j["kind"] = "welch_t"; break;
        case stats::TestKind::AnovaF: j["kind"] = "anova_f"; break;
        case stats::TestKind::PearsonR: j["kind"] = "pearson_r"; break;
        case stats::TestKind::SpearmanR: j["kind"] = "spearman_r"; break;
    }
    j["statistic"] = t.statistic;
    j["df"] = t.df;
    if (t.kind == stats::TestKind::AnovaF) j["df_within"] = t.df2;
    j["p_value"] = t.p_value;
    return j;
}

}  // namespace

void write_exposure_report(const ExposureReport& report,
                           const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::string table =
        "metric,level,n,mean,std,iqr,min,max,skewness,kurtosis_excess\n";
    for (const auto& e : report.summaries)
        table += summary_csv_row(e.metric, e.level, true, e.summary) + "\n";
    atomic_write_file(dir + "/summary_by_level.csv", table);

    json welch = json::array();
    for (const auto& e : report.welch) {
        json j = test_to_json(e.test);
        j["metric"] = e.metric;
        j["low_level"] = to_string(e.lo);
        j["high_level"] = to_string(e.hi);
        j["p_bonferroni"] = e.p_bonferroni;
        welch.push_back(j);
    }
    json tests;
    tests["note"] =
        "pairwise Welch tests with Bonferroni correction substitute the "
        "Tukey post-hoc procedure";
    tests["welch"] = welch;
    tests["anova_layer_risks"] = test_to_json(report.anova_layers);
    atomic_write_file(dir + "/tests.json", tests.dump(2) + "\n");

    std::string inc = "metric,low_level,high_level,mean_low,mean_high,"
                      "relative_increase\n";
    for (const auto& e : report.increases) {
        inc += e.metric + "," + to_string(e.lo) + "," + to_string(e.hi) + "," +
               num(e.mean_lo) + "," + num(e.mean_hi) + "," +
               num(e.relative_increase) + "\n";
    }
    atomic_write_file(dir + "/relative_increase.csv", inc);

    json meta;
    meta["rows_total"] = report.rows.total;
    meta["rows_included"] = report.rows.included;
    meta["rows_excluded"] = report.rows.excluded;
    atomic_write_file(dir + "/meta.json", meta.dump(2) + "\n");
}

void write_crosslayer_report(const CrossLayerReport& report,
                             const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    static const char* kLayerNames[3] = {"r_cfg", "r_struct", "r_fusion"};
    std::string table =
        "layer,n,mean,std,iqr,min,max,skewness,kurtosis_excess\n";
    for (int l = 0; l < 3; ++l)
        table += summary_csv_row(kLayerNames[l], Exposure::None, false,
                                 report.layer_summary[l]) +
                 "\n";
    atomic_write_file(dir + "/summary_by_layer.csv", table);

    std::string corr =
        "pair,pearson_r,pearson_p,spearman_rho,spearman_p\n";
    for (int j = 0; j < 3; ++j) {
        for (int k = j + 1; k < 3; ++k) {
            const auto& cell = report.layer_correlation[j][k];
            corr += std::string(kLayerNames[j]) + "~" + kLayerNames[k] + "," +
                    num(cell.pearson.statistic) + "," +
                    num(cell.pearson.p_value) + "," +
                    num(cell.spearman.statistic) + "," +
                    num(cell.spearman.p_value) + "\n";
        }
    }
    atomic_write_file(dir + "/correlations.csv", corr);

    std::string mc = "metric,pearson_r,p_value\n";
    for (const auto& m : report.metric_correlations)
        mc += m.metric + "," + num(m.pearson.statistic) + "," +
              num(m.pearson.p_value) + "\n";
    atomic_write_file(dir + "/metric_correlations.csv", mc);

    fs::create_directories(dir + "/kde");
    for (const auto& curve : report.kde_curves) {
        std::string body = "x,density\n";
        for (std::size_t i = 0; i < curve.x.size(); ++i)
            body += num(curve.x[i]) + "," + num(curve.density[i]) + "\n";
        atomic_write_file(dir + "/kde/" + curve.name + ".csv", body);
    }

    json meta;
    meta["rows_total"] = report.rows.total;
    meta["rows_included"] = report.rows.included;
    meta["rows_excluded"] = report.rows.excluded;
    atomic_write_file(dir + "/crosslayer_meta.json", meta.dump(2) + "\n");
}

void write_ablation_report(const AblationReport& report,
                           const std::string& path) {
    std::string body =
        "variant,mean_divergence,mean_uncertainty,mean_p_final,"
        "divergence_delta_pct,uncertainty_delta_pct,risk_shift_pct\n";
    for (const auto& row : report.rows) {
        body += to_string(row.variant) + "," + num(row.mean_divergence) + "," +
                num(row.mean_uncertainty) + "," + num(row.mean_p_final) + "," +
                num(row.divergence_delta_pct) + "," +
                num(row.uncertainty_delta_pct) + "," +
                num(row.risk_shift_pct) + "\n";
    }
    atomic_write_file(path, body);
}

}  // namespace fwrisk
