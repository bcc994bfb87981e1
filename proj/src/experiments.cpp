#include "fwrisk/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fwrisk/rng.hpp"

namespace fwrisk {

namespace {

const char* kLayerMetrics[3] = {"r_cfg", "r_struct", "r_fusion"};

double record_metric(const RiskRecord& r, const std::string& metric) {
    if (metric == "r_cfg") return r.display[0];
    if (metric == "r_struct") return r.display[1];
    if (metric == "r_fusion") return r.display[2];
    if (metric == "p_final") return r.p_final;
    if (metric == "p_fusion") return r.p_fusion;
    if (metric == "divergence") return r.divergence;
    if (metric == "entropy") return r.entropy;
    if (metric == "e_mis") return r.e_mis;
    if (metric == "e_global") return r.e_global;
    throw std::invalid_argument("unknown record metric: " + metric);
}

std::vector<Exposure> levels_in_order(const std::vector<RiskRecord>& records) {
    std::vector<Exposure> seen;
    for (const auto& r : records) {
        if (std::find(seen.begin(), seen.end(), r.exposure) == seen.end())
            seen.push_back(r.exposure);
    }
    return seen;
}

std::vector<double> column(const std::vector<RiskRecord>& records,
                           const std::string& metric, Exposure level) {
    std::vector<double> out;
    for (const auto& r : records)
        if (!r.excluded && r.exposure == level)
            out.push_back(record_metric(r, metric));
    return out;
}

std::vector<double> column_all(const std::vector<RiskRecord>& records,
                               const std::string& metric) {
    std::vector<double> out;
    for (const auto& r : records)
        if (!r.excluded) out.push_back(record_metric(r, metric));
    return out;
}

RowAccounting account(const std::vector<RiskRecord>& records) {
    RowAccounting rows;
    rows.total = records.size();
    for (const auto& r : records)
        if (r.excluded)
            ++rows.excluded;
        else
            ++rows.included;
    return rows;
}

}  // namespace

ExposureReport exposure_report_from_records(
    const std::vector<RiskRecord>& records) {
    ExposureReport rep;
    rep.rows = account(records);
    const auto levels = levels_in_order(records);
    if (levels.size() < 2)
        throw std::invalid_argument(
            "exposure report: need at least 2 exposure levels");

    const std::vector<std::string> metrics = {"r_cfg", "r_struct", "r_fusion",
                                              "p_final"};
    for (const auto& metric : metrics) {
        for (Exposure level : levels) {
            auto xs = column(records, metric, level);
            if (xs.size() < 2) continue;
            rep.summaries.push_back({metric, level, stats::summarize(xs)});
        }
    }

    // Welch tests between adjacent levels for the three layer risks, with
    // a Bonferroni factor over the whole family (the Tukey substitute).
    std::vector<WelchEntry> entries;
    for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
        for (const char* metric : kLayerMetrics) {
            auto lo = column(records, metric, levels[li]);
            auto hi = column(records, metric, levels[li + 1]);
            if (lo.size() < 2 || hi.size() < 2) continue;
            WelchEntry e;
            e.metric = metric;
            e.lo = levels[li];
            e.hi = levels[li + 1];
            e.test = stats::welch_t(hi, lo);
            entries.push_back(e);
        }
    }
    const double family = static_cast<double>(entries.size());
    for (auto& e : entries)
        e.p_bonferroni = std::min(1.0, e.test.p_value * family);
    rep.welch = std::move(entries);

    for (std::size_t li = 0; li + 1 < levels.size(); ++li) {
        for (const auto& metric :
             {std::string("p_final"), std::string("r_cfg"),
              std::string("r_struct"), std::string("r_fusion")}) {
            auto lo = column(records, metric, levels[li]);
            auto hi = column(records, metric, levels[li + 1]);
            if (lo.empty() || hi.empty()) continue;
            IncreaseEntry inc;
            inc.metric = metric;
            inc.lo = levels[li];
            inc.hi = levels[li + 1];
            inc.mean_lo = stats::mean(lo);
            inc.mean_hi = stats::mean(hi);
            inc.relative_increase =
                inc.mean_lo == 0.0
                    ? 0.0
                    : (inc.mean_hi - inc.mean_lo) / inc.mean_lo;
            rep.increases.push_back(inc);
        }
    }

    std::vector<std::vector<double>> layer_groups;
    for (const char* metric : kLayerMetrics)
        layer_groups.push_back(column_all(records, metric));
    rep.anova_layers = stats::anova_oneway(layer_groups);
    return rep;
}

CrossLayerReport crosslayer_report_from_records(
    const std::vector<RiskRecord>& records) {
    CrossLayerReport rep;
    rep.rows = account(records);
    if (rep.rows.included < 4)
        throw std::invalid_argument(
            "crosslayer report: fewer than 4 usable rows");

    std::vector<double> layer_risk[3];
    for (int l = 0; l < 3; ++l)
        layer_risk[l] = column_all(records, kLayerMetrics[l]);
    for (int l = 0; l < 3; ++l)
        rep.layer_summary[l] = stats::summarize(layer_risk[l]);

    for (int j = 0; j < 3; ++j) {
        for (int k = 0; k < 3; ++k) {
            if (j == k) continue;
            rep.layer_correlation[j][k].pearson =
                stats::pearson(layer_risk[j], layer_risk[k]);
            rep.layer_correlation[j][k].spearman =
                stats::spearman(layer_risk[j], layer_risk[k]);
        }
    }

    auto p_final = column_all(records, "p_final");
    for (const auto& metric :
         {std::string("e_global"), std::string("divergence"),
          std::string("entropy"), std::string("e_mis")}) {
        MetricCorrelation mc;
        mc.metric = metric;
        mc.pearson = stats::pearson(column_all(records, metric), p_final);
        rep.metric_correlations.push_back(mc);
    }

    const auto levels = levels_in_order(records);
    for (int l = 0; l < 3; ++l) {
        for (Exposure level : levels) {
            auto xs = column(records, kLayerMetrics[l], level);
            if (xs.size() < 2) continue;
            const double h = stats::silverman_bandwidth(xs);
            KdeCurve curve;
            curve.name =
                std::string(kLayerMetrics[l]) + "_" + to_string(level);
            curve.x = stats::kde_grid(xs, h);
            curve.density = stats::kde(xs, curve.x, h);
            rep.kde_curves.push_back(std::move(curve));
        }
    }
    return rep;
}

StudyResult run_exposure_study(const std::vector<FirmwareDescriptor>& batch,
                               const std::vector<ExposureLevel>& levels,
                               const ParameterSet& ps, Backend& backend,
                               const RunOptions& options) {
    if (levels.size() < 2)
        throw std::invalid_argument(
            "exposure study: need at least 2 exposure levels");
    StudyResult result;
    result.records = run_pipeline(batch, levels, ps, backend, options);
    result.report = exposure_report_from_records(result.records);
    return result;
}

namespace {

double mean_defined_divergence(const std::vector<RiskRecord>& records,
                               Variant v) {
    const auto pairs = defined_pairs(v);
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        if (r.excluded) continue;
        for (auto [j, k] : pairs) acc += r.d_pairwise[j - 1][k - 1];
        count += pairs.size();
    }
    return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

double mean_present_uncertainty(const std::vector<RiskRecord>& records,
                                Variant v) {
    const auto layers = present_layers(v);
    double acc = 0.0;
    std::size_t count = 0;
    for (const auto& r : records) {
        if (r.excluded) continue;
        for (int l : layers) acc += r.uncertainty[l - 1];
        count += layers.size();
    }
    return count == 0 ? 0.0 : acc / static_cast<double>(count);
}

}  // namespace

AblationReport run_ablation(const std::vector<FirmwareDescriptor>& batch,
                            const ParameterSet& ps, Backend& backend,
                            const RunOptions& options, Exposure level) {
    AblationReport rep;
    rep.instances = batch.size();
    rep.level = level;
    const std::vector<ExposureLevel> levels = {ExposureLevel::standard(level)};

    const Variant variants[5] = {Variant::Full, Variant::NoConfig,
                                 Variant::NoStructure, Variant::NoFusion,
                                 Variant::Shallow};
    AblationRow full_row;
    for (Variant v : variants) {
        RunOptions opt = options;
        opt.variant = v;
        auto records = run_pipeline(batch, levels, ps, backend, opt);
        AblationRow row;
        row.variant = v;
        row.mean_divergence = mean_defined_divergence(records, v);
        row.mean_uncertainty = mean_present_uncertainty(records, v);
        auto p = column_all(records, "p_final");
        row.mean_p_final = p.empty() ? 0.0 : stats::mean(p);
        if (v == Variant::Full) {
            full_row = row;
        } else {
            auto pct = [](double value, double base) {
                return base == 0.0 ? 0.0 : 100.0 * (value - base) / base;
            };
            row.divergence_delta_pct =
                pct(row.mean_divergence, full_row.mean_divergence);
            row.uncertainty_delta_pct =
                pct(row.mean_uncertainty, full_row.mean_uncertainty);
            row.risk_shift_pct = pct(row.mean_p_final, full_row.mean_p_final);
        }
        rep.rows.push_back(row);
    }
    return rep;
}

// ------------------------------------------------------- calibration -----

std::map<std::string, double> calibration_stats(const ParameterSet& ps,
                                                const CalibrationContext& ctx) {
    SyntheticBackend backend;
    RunOptions opt;
    opt.perturb_seed = ctx.perturb_seed;
    auto records = run_pipeline(ctx.batch, ctx.levels, ps, backend, opt);

    std::map<std::string, double> out;
    const auto levels = levels_in_order(records);
    const std::vector<std::string> metrics = {"r_cfg", "r_struct", "r_fusion",
                                              "p_final"};
    for (const auto& metric : metrics) {
        for (Exposure level : levels) {
            auto xs = column(records, metric, level);
            if (xs.size() < 2) continue;
            const std::string suffix = "_" + metric + "_" + to_string(level);
            out["mean" + suffix] = stats::mean(xs);
            out["std" + suffix] = std::sqrt(stats::sample_variance(xs));
        }
    }
    if (levels.size() >= 2) {
        auto lo = column(records, "p_final", levels[levels.size() - 2]);
        auto hi = column(records, "p_final", levels.back());
        if (!lo.empty() && !hi.empty() && stats::mean(lo) != 0.0)
            out["p_final_ratio"] = stats::mean(hi) / stats::mean(lo);
    }

    // Cost and energy statistics pooled over all included rows.
    double lat[3] = {}, cpu[3] = {}, gpu[3] = {}, e_layer[3] = {};
    double e_global = 0.0;
    std::size_t n = 0;
    for (const auto& r : records) {
        if (r.excluded) continue;
        for (int i = 0; i < 3; ++i) {
            lat[i] += r.latency[i];
            cpu[i] += r.cpu[i];
            gpu[i] += r.gpu[i];
            e_layer[i] += r.e_layer[i];
        }
        e_global += r.e_global;
        ++n;
    }
    if (n > 0) {
        for (int i = 0; i < 3; ++i) {
            const std::string s = std::to_string(i + 1);
            out["mean_lat" + s] = lat[i] / static_cast<double>(n);
            out["mean_cpu" + s] = cpu[i] / static_cast<double>(n);
            out["mean_gpu" + s] = gpu[i] / static_cast<double>(n);
            out["mean_e" + s] = e_layer[i] / static_cast<double>(n);
        }
        out["mean_e_global"] = e_global / static_cast<double>(n);
    }

    if (ctx.demo_descriptor != nullptr) {
        RiskRecord rec = evaluate_instance(*ctx.demo_descriptor,
                                           Exposure::None, Variant::Full, ps,
                                           backend);
        out["router_p_final"] = rec.p_final;
    }
    return out;
}

namespace {

struct Knob {
    const char* name;
    double* slot;
    bool log_scale;  // multiplicative proposals, stays positive
};

std::vector<Knob> knobs(ParameterSet& ps) {
    return {
        {"alpha1", &ps.model.alpha1, true},
        {"beta1", &ps.model.beta1, false},
        {"alpha2", &ps.model.alpha2, true},
        {"delta", &ps.model.delta, false},
        {"omega", &ps.model.omega, true},
        {"xi_bias", &ps.model.xi_bias, false},
        {"kappa", &ps.model.kappa, true},
        {"lambda1", &ps.model.lambda1, true},
        {"lambda2", &ps.model.lambda2, true},
        {"lambda3", &ps.model.lambda3, true},
        {"shift1", &ps.model.display_shift[0], false},
        {"shift2", &ps.model.display_shift[1], false},
        {"shift3", &ps.model.display_shift[2], false},
        {"tau1", &ps.cost.tau[0], true},
        {"tau2", &ps.cost.tau[1], true},
        {"tau3", &ps.cost.tau[2], true},
        {"zeta1", &ps.cost.zeta[0], true},
        {"zeta2", &ps.cost.zeta[1], true},
        {"zeta3", &ps.cost.zeta[2], true},
        {"gpu1", &ps.cost.gpu_coeff[0], true},
        {"gpu2", &ps.cost.gpu_coeff[1], true},
        {"gpu3", &ps.cost.gpu_coeff[2], true},
        {"eta", &ps.cost.eta, true},
        {"rho", &ps.cost.rho, true},
    };
}

double residual_of(const std::map<std::string, double>& achieved,
                   const std::vector<CalibrationTarget>& targets) {
    double acc = 0.0;
    for (const auto& t : targets) {
        auto it = achieved.find(t.stat);
        if (it == achieved.end()) {
            acc += t.weight;  // missing statistic counts as unit error
            continue;
        }
        const double denom = std::abs(t.value) > 1e-12 ? t.value : 1.0;
        const double rel = (it->second - t.value) / denom;
        acc += t.weight * rel * rel;
    }
    return acc;
}

}  // namespace

CalibrationResult calibrate(const ParameterSet& start,
                            const std::vector<CalibrationTarget>& targets,
                            int budget, std::uint64_t search_seed,
                            const CalibrationContext& ctx) {
    if (targets.empty())
        throw std::invalid_argument("calibrate: empty target list");
    if (budget <= 0)
        throw std::invalid_argument("calibrate: budget must be positive");

    CalibrationResult best;
    best.params = start;
    best.achieved = calibration_stats(start, ctx);
    best.residual = residual_of(best.achieved, targets);
    best.accepted_residuals.push_back(best.residual);

    SeedStream rng(search_seed, 0, StreamPurpose::Calibration);
    for (int step = 0; step < budget && best.residual > 1e-12; ++step) {
        ParameterSet candidate = best.params;
        auto ks = knobs(candidate);
        const int moves = 1 + static_cast<int>(rng.next_u64() % 3);
        for (int m = 0; m < moves; ++m) {
            Knob& k = ks[rng.next_u64() % ks.size()];
            if (k.log_scale) {
                *k.slot *= std::exp(0.35 * rng.next_normal());
            } else {
                *k.slot += 0.5 * rng.next_normal();
            }
        }
        std::map<std::string, double> achieved;
        double residual;
        try {
            achieved = calibration_stats(candidate, ctx);
            residual = residual_of(achieved, targets);
        } catch (const std::exception&) {
            continue;  // invalid candidate, e.g. negative lambda clamp
        }
        if (residual < best.residual) {
            best.params = candidate;
            best.residual = residual;
            best.achieved = std::move(achieved);
            ++best.accepted_steps;
            best.accepted_residuals.push_back(residual);
        }
    }
    return best;
}

}  // namespace fwrisk
