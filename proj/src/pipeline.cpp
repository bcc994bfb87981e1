#include "fwrisk/pipeline.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "fwrisk/io.hpp"

namespace fwrisk {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoConfig: return "no_config";
        case Variant::NoStructure: return "no_structure";
        case Variant::NoFusion: return "no_fusion";
        case Variant::Shallow: return "shallow";
    }
    throw std::invalid_argument("unknown variant");
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "no_config") return Variant::NoConfig;
    if (s == "no_structure") return Variant::NoStructure;
    if (s == "no_fusion") return Variant::NoFusion;
    if (s == "shallow") return Variant::Shallow;
    throw std::invalid_argument("unknown variant: " + s);
}

std::vector<std::pair<int, int>> defined_pairs(Variant v) {
    switch (v) {
        case Variant::Full:
            return {{1, 2}, {1, 3}, {2, 1}, {2, 3}, {3, 1}, {3, 2}};
        case Variant::NoConfig: return {{2, 3}, {3, 2}};
        case Variant::NoStructure: return {{1, 3}, {3, 1}};
        case Variant::NoFusion: return {{1, 2}, {2, 1}};
        case Variant::Shallow: return {{1, 3}, {3, 1}, {2, 3}, {3, 2}};
    }
    throw std::invalid_argument("unknown variant");
}

std::vector<int> present_layers(Variant v) {
    switch (v) {
        case Variant::Full: return {1, 2, 3};
        case Variant::NoConfig: return {2, 3};
        case Variant::NoStructure: return {1, 3};
        case Variant::NoFusion: return {1, 2};
        case Variant::Shallow: return {3};
    }
    throw std::invalid_argument("unknown variant");
}

namespace {

Vec one_hot_arch(Arch arch) {
    Vec v(3, 0.0);
    v[static_cast<std::size_t>(arch)] = 1.0;
    return v;
}

RiskRecord evaluate_shallow(const FirmwareDescriptor& f, Exposure level,
                            const ParameterSet& ps) {
    RiskRecord rec;
    rec.instance_id = f.id;
    rec.exposure = level;
    rec.variant = Variant::Shallow;

    const ShallowParams sp = ps.shallow();
    Vec x = one_hot_arch(f.metadata.arch);
    x.insert(x.end(), f.config.begin(), f.config.end());
    x.insert(x.end(), f.structure.begin(), f.structure.end());
    if (x.size() != sp.input_dim())
        throw std::invalid_argument("shallow: input dimension mismatch");

    Vec hs = matvec(sp.w, x);
    for (std::size_t i = 0; i < hs.size(); ++i) hs[i] += sp.bias[i];
    const double p_s = stable_logistic(dot(sp.head_w, hs) + sp.head_bias);

    rec.display[2] = ps.model.risk_scale * p_s;
    rec.p_fusion = p_s;
    rec.p_final = p_s;
    rec.entropy = entropy(hs);
    rec.uncertainty[2] = 1.0 - std::abs(2.0 * p_s - 1.0);
    rec.depth[2] = 1;

    // Divergence analogue of the single-layer baseline: the affine
    // embedding against the normalized raw evidence blocks.
    auto aligned_c = align_dims(f.config, f.structure, hs);
    SimplexVector nc = normalize(aligned_c[0]);
    SimplexVector no = normalize(aligned_c[1]);
    SimplexVector nh = normalize(aligned_c[2]);
    rec.d_pairwise[0][2] = kl(nc, nh);
    rec.d_pairwise[2][0] = kl(nh, nc);
    rec.d_pairwise[1][2] = kl(no, nh);
    rec.d_pairwise[2][1] = kl(nh, no);
    rec.divergence = rec.d_pairwise[0][2] + rec.d_pairwise[1][2];
    return rec;
}

}  // namespace

RiskRecord evaluate_instance(const FirmwareDescriptor& f, Exposure level,
                             Variant variant, const ParameterSet& ps,
                             Backend& backend) {
    if (variant == Variant::Shallow) return evaluate_shallow(f, level, ps);

    RiskRecord rec;
    rec.instance_id = f.id;
    rec.exposure = level;
    rec.variant = variant;

    ModelParams model = ps.model;  // effective coupling weights per variant
    if (variant == Variant::NoConfig) model.lambda1 = 0.0;
    if (variant == Variant::NoStructure) model.lambda2 = 0.0;
    if (variant == Variant::NoFusion) model.lambda3 = 0.0;

    LayerEmbeddings emb = forward_all(f.config, f.structure, ps.model);
    if (variant == Variant::NoConfig) {
        emb.h1.assign(emb.h1.size(), 0.0);
        emb.h3 = fuse(emb.h1, emb.h2, ps.model);
    } else if (variant == Variant::NoStructure) {
        emb.h2.assign(emb.h2.size(), 0.0);
        emb.h3 = fuse(emb.h1, emb.h2, ps.model);
    }
    const bool has_fusion = variant != Variant::NoFusion;

    rec.r1_raw = config_risk(emb.h1, model);
    rec.r2_raw = structure_risk(emb.h2, model);

    const auto layers = present_layers(variant);
    for (int layer : layers) {
        try {
            LayerEval eval = backend.evaluate_layer(layer, f, emb, model);
            rec.display[layer - 1] = eval.display_risk;
            rec.uncertainty[layer - 1] = eval.aux.uncertainty;
            rec.depth[layer - 1] = eval.aux.reasoning_depth;
            rec.wall_latency[layer - 1] = eval.aux.wall_latency_ms;
            rec.retries += eval.aux.retries;
        } catch (const BackendError&) {
            rec.failed = true;
            rec.excluded = true;
        }
    }

    // Divergence block over the pairs defined for this variant.
    {
        auto aligned = align_dims(emb.h1, emb.h2, emb.h3);
        std::array<SimplexVector, 3> n = {normalize(aligned[0]),
                                          normalize(aligned[1]),
                                          normalize(aligned[2])};
        for (auto [j, k] : defined_pairs(variant))
            rec.d_pairwise[j - 1][k - 1] = kl(n[j - 1], n[k - 1]);
        if (has_fusion) {
            rec.divergence = rec.d_pairwise[0][2] + rec.d_pairwise[1][2];
            rec.entropy = entropy(emb.h3);
            rec.e_mis = misalignment_energy(emb.h1, emb.h2, emb.h3);
            StableRegion region = stable_region_fraction(n[0], n[1], n[2]);
            rec.stable_fraction = region.fraction;
        }
        PairwiseDivergence pd;
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) pd.d[j][k] = rec.d_pairwise[j][k];
        rec.e_weighted = weighted_divergence_energy(pd, ps.pair_weights);
    }
    rec.psi = coupling_psi(rec.r1_raw, rec.r2_raw, rec.divergence, model);

    // Symbolic costs; a removed fusion layer contributes nothing.
    CostIndices idx = layer_costs(ps.model, emb, ps.cost);
    std::array<double, 3> e_layer = per_layer_energy(idx, ps.cost, emb);
    if (!has_fusion) {
        idx.latency_total -= idx.latency[2];
        idx.cpu_total -= idx.cpu[2];
        idx.gpu_total -= idx.gpu[2];
        idx.tokens_total -= idx.tokens[2];
        idx.latency[2] = idx.cpu[2] = idx.gpu[2] = idx.tokens[2] = 0.0;
        e_layer[2] = 0.0;
    }
    for (int i = 0; i < 3; ++i) {
        rec.latency[i] = idx.latency[i];
        rec.cpu[i] = idx.cpu[i];
        rec.gpu[i] = idx.gpu[i];
        rec.tokens[i] = idx.tokens[i];
        rec.e_layer[i] = e_layer[i];
    }
    rec.e_global = conceptual_energy(idx, ps.cost);

    std::array<double, 3> displays = {rec.display[0], rec.display[1],
                                      rec.display[2]};
    rec.risk_theory =
        aggregate_risk(rec.r1_raw, rec.r2_raw, rec.divergence, displays,
                       rec.e_global, e_layer, model, RiskMode::Theory);
    rec.risk_protocol =
        aggregate_risk(rec.r1_raw, rec.r2_raw, rec.divergence, displays,
                       rec.e_global, e_layer, model, RiskMode::Protocol);

    if (has_fusion) rec.p_fusion = fusion_probability(emb.h3, ps.model);
    rec.p_final = final_probability(rec.risk_protocol, model);
    return rec;
}

std::vector<RiskRecord> run_pipeline(
    const std::vector<FirmwareDescriptor>& descriptors,
    const std::vector<ExposureLevel>& levels, const ParameterSet& ps,
    Backend& backend, const RunOptions& options) {
    if (levels.empty())
        throw std::invalid_argument("run_pipeline: no exposure levels");
    for (const auto& f : descriptors) {
        if (f.k_c() != ps.model.k_c() || f.k_o() != ps.model.k_o())
            throw std::invalid_argument(
                "run_pipeline: descriptor " + std::to_string(f.id) +
                " dimensions (" + std::to_string(f.k_c()) + "," +
                std::to_string(f.k_o()) + ") do not match the model (" +
                std::to_string(ps.model.k_c()) + "," +
                std::to_string(ps.model.k_o()) + ")");
    }
    const std::size_t cells = descriptors.size() * levels.size();
    std::vector<RiskRecord> records(cells);
    const bool zero_latency =
        options.zero_synthetic_latency && backend.name() == "synthetic";

    auto evaluate_cell = [&](std::size_t cell) {
        const std::size_t di = cell / levels.size();
        const std::size_t li = cell % levels.size();
        RiskRecord rec;
        try {
            FirmwareDescriptor perturbed = perturb_seeded(
                descriptors[di], levels[li], options.perturb_seed,
                options.paired);
            rec = evaluate_instance(perturbed, levels[li].level,
                                    options.variant, ps, backend);
        } catch (const std::exception&) {
            // Exceptions cannot escape the worker loop; the row is flagged
            // and excluded from statistics instead.
            rec.instance_id = descriptors[di].id;
            rec.exposure = levels[li].level;
            rec.variant = options.variant;
            rec.failed = true;
            rec.excluded = true;
        }
        if (zero_latency)
            rec.wall_latency[0] = rec.wall_latency[1] = rec.wall_latency[2] =
                0.0;
        records[cell] = rec;
    };

    if (options.mode == ExecutionMode::Serial) {
        for (std::size_t cell = 0; cell < cells; ++cell) evaluate_cell(cell);
    } else {
        const int threads =
            options.workers > 0 ? options.workers : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t cell = 0; cell < static_cast<std::int64_t>(cells);
             ++cell) {
            evaluate_cell(static_cast<std::size_t>(cell));
        }
    }
    return records;
}

const char* const kRecordsHeader =
    "instance_id,exposure,variant,"
    "r_cfg,r_struct,r_fusion,r1_raw,r2_raw,p_fusion,p_final,"
    "divergence,d12,d13,d21,d23,d31,d32,entropy,e_mis,e_weighted,psi,"
    "e_global,e1,e2,e3,"
    "lat1,lat2,lat3,cpu1,cpu2,cpu3,gpu1,gpu2,gpu3,tok1,tok2,tok3,"
    "risk_theory,risk_protocol,"
    "u1,u2,u3,depth1,depth2,depth3,wall1,wall2,wall3,retries,"
    "stable_fraction,failed,excluded";

namespace {

void append_num(std::string& out, double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    out += buf;
    out += ',';
}

}  // namespace

std::string record_to_csv(const RiskRecord& r) {
    std::string out;
    out.reserve(1024);
    out += std::to_string(r.instance_id);
    out += ',';
    out += to_string(r.exposure);
    out += ',';
    out += to_string(r.variant);
    out += ',';
    for (double d : r.display) append_num(out, d);
    append_num(out, r.r1_raw);
    append_num(out, r.r2_raw);
    append_num(out, r.p_fusion);
    append_num(out, r.p_final);
    append_num(out, r.divergence);
    append_num(out, r.d_pairwise[0][1]);
    append_num(out, r.d_pairwise[0][2]);
    append_num(out, r.d_pairwise[1][0]);
    append_num(out, r.d_pairwise[1][2]);
    append_num(out, r.d_pairwise[2][0]);
    append_num(out, r.d_pairwise[2][1]);
    append_num(out, r.entropy);
    append_num(out, r.e_mis);
    append_num(out, r.e_weighted);
    append_num(out, r.psi);
    append_num(out, r.e_global);
    for (double d : r.e_layer) append_num(out, d);
    for (double d : r.latency) append_num(out, d);
    for (double d : r.cpu) append_num(out, d);
    for (double d : r.gpu) append_num(out, d);
    for (double d : r.tokens) append_num(out, d);
    append_num(out, r.risk_theory);
    append_num(out, r.risk_protocol);
    for (double d : r.uncertainty) append_num(out, d);
    for (int d : r.depth) {
        out += std::to_string(d);
        out += ',';
    }
    for (double d : r.wall_latency) append_num(out, d);
    out += std::to_string(r.retries);
    out += ',';
    append_num(out, r.stable_fraction);
    out += r.failed ? "1," : "0,";
    out += r.excluded ? "1" : "0";
    return out;
}

RiskRecord record_from_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 52)
        throw std::invalid_argument("records: expected 52 columns, got " +
                                    std::to_string(cells.size()));
    std::size_t i = 0;
    auto next_d = [&]() { return std::stod(cells[i++]); };
    RiskRecord r;
    r.instance_id = std::stoll(cells[i++]);
    r.exposure = exposure_from_string(cells[i++]);
    r.variant = variant_from_string(cells[i++]);
    for (double& d : r.display) d = next_d();
    r.r1_raw = next_d();
    r.r2_raw = next_d();
    r.p_fusion = next_d();
    r.p_final = next_d();
    r.divergence = next_d();
    r.d_pairwise[0][1] = next_d();
    r.d_pairwise[0][2] = next_d();
    r.d_pairwise[1][0] = next_d();
    r.d_pairwise[1][2] = next_d();
    r.d_pairwise[2][0] = next_d();
    r.d_pairwise[2][1] = next_d();
    r.entropy = next_d();
    r.e_mis = next_d();
    r.e_weighted = next_d();
    r.psi = next_d();
    r.e_global = next_d();
    for (double& d : r.e_layer) d = next_d();
    for (double& d : r.latency) d = next_d();
    for (double& d : r.cpu) d = next_d();
    for (double& d : r.gpu) d = next_d();
    for (double& d : r.tokens) d = next_d();
    r.risk_theory = next_d();
    r.risk_protocol = next_d();
    for (double& d : r.uncertainty) d = next_d();
    for (int& d : r.depth) d = std::stoi(cells[i++]);
    for (double& d : r.wall_latency) d = next_d();
    r.retries = std::stoi(cells[i++]);
    r.stable_fraction = next_d();
    r.failed = cells[i++] == "1";
    r.excluded = cells[i++] == "1";
    return r;
}

void write_records_csv(const std::vector<RiskRecord>& records,
                       const std::string& path) {
    std::string body = kRecordsHeader;
    body += '\n';
    for (const auto& r : records) {
        body += record_to_csv(r);
        body += '\n';
    }
    atomic_write_file(path, body);
}

std::vector<RiskRecord> read_records_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("records: cannot open " + path);
    std::string line;
    if (!std::getline(in, line))
        throw std::invalid_argument("records: empty file " + path);
    if (line != kRecordsHeader)
        throw std::invalid_argument("records: unexpected header in " + path);
    std::vector<RiskRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        out.push_back(record_from_csv(line));
    }
    return out;
}

}  // namespace fwrisk
