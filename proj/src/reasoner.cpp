#include "fwrisk/reasoner.hpp"

#include <cmath>

#include "fwrisk/rng.hpp"

namespace fwrisk {

double stable_logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    double e = std::exp(x);
    return e / (1.0 + e);
}

void ModelParams::validate() const {
    if (d1() == 0 || d2() == 0 || d3() == 0 || k_c() == 0 || k_o() == 0)
        throw std::invalid_argument("params: all dimensions must be positive");
    if (b1.size() != d1() || b2.size() != d2())
        throw std::invalid_argument("params: bias dimension mismatch");
    if (a.cols != d1() || b.rows != d3() || b.cols != d2())
        throw std::invalid_argument("params: fusion matrix dimension mismatch");
    if (c3.size() != d3() || gamma.size() != d3())
        throw std::invalid_argument("params: fusion vector dimension mismatch");
    if (lambda1 < 0 || lambda2 < 0 || lambda3 < 0 || kappa < 0)
        throw std::invalid_argument("params: coupling weights must be >= 0");
    if (!all_finite(w1) || !all_finite(w2) || !all_finite(a) ||
        !all_finite(b) || !all_finite(b1) || !all_finite(b2) ||
        !all_finite(c3) || !all_finite(gamma))
        throw std::invalid_argument("params: non-finite entries");
}

namespace {

// Sub-keys for the parameter stream so each tensor has its own substream.
enum ParamField : std::uint64_t {
    kW1 = 1, kB1, kW2, kB2, kA, kB, kC3, kGamma,
};

Mat draw_matrix(std::uint64_t seed, std::uint64_t field, std::size_t rows,
                std::size_t cols, double scale, bool abs_entries) {
    SeedStream s(seed, field, StreamPurpose::ParamInit);
    Mat m(rows, cols);
    for (auto& x : m.data) {
        x = scale * s.next_normal();
        if (abs_entries) x = std::abs(x);
    }
    return m;
}

Vec draw_vector(std::uint64_t seed, std::uint64_t field, std::size_t n,
                double scale, double shift, bool abs_entries) {
    SeedStream s(seed, field, StreamPurpose::ParamInit);
    Vec v(n);
    for (auto& x : v) {
        x = scale * s.next_normal();
        if (abs_entries) x = std::abs(x);
        x += shift;
    }
    return v;
}

}  // namespace

ModelParams seeded_params(const Dims& dims, std::uint64_t param_seed,
                          const InitOptions& opt) {
    ModelParams p;
    const bool mono = opt.monotone_regime;
    p.w1 = draw_matrix(param_seed, kW1, dims.d1, dims.k_c,
                       opt.gain1 / std::sqrt(double(dims.k_c)), false);
    p.b1 = draw_vector(param_seed, kB1, dims.d1, 0.5, opt.bias1_shift, false);
    p.w2 = draw_matrix(param_seed, kW2, dims.d2, dims.k_o,
                       opt.gain2 / std::sqrt(double(dims.k_o)), false);
    p.b2 = draw_vector(param_seed, kB2, dims.d2, 0.5, opt.bias2_shift, false);
    p.a = draw_matrix(param_seed, kA, dims.d3, dims.d1,
                      opt.gain3 / std::sqrt(double(dims.d1)), mono);
    p.b = draw_matrix(param_seed, kB, dims.d3, dims.d2,
                      opt.gain3 / std::sqrt(double(dims.d2)), mono);
    p.c3 = draw_vector(param_seed, kC3, dims.d3, 0.5, 0.0, false);
    p.gamma = draw_vector(param_seed, kGamma, dims.d3,
                          1.0 / std::sqrt(double(dims.d3)), 0.0, mono);
    p.validate();
    return p;
}

Vec forward_config(const Vec& c, const ModelParams& p, MulAddCounter* counter) {
    if (c.size() != p.k_c())
        throw std::invalid_argument("forward_config: input dimension mismatch");
    if (!all_finite(c))
        throw std::invalid_argument("forward_config: non-finite input");
    Vec h = matvec(p.w1, c, counter, 0);
    for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = stable_logistic(h[i] + p.b1[i]);
    return h;
}

double config_risk(const Vec& h1, const ModelParams& p) {
    if (!all_finite(h1))
        throw std::invalid_argument("config_risk: non-finite input");
    return p.alpha1 * l1_norm(h1) + p.beta1;
}

Vec forward_structure(const Vec& o, const ModelParams& p,
                      MulAddCounter* counter) {
    if (o.size() != p.k_o())
        throw std::invalid_argument(
            "forward_structure: input dimension mismatch");
    if (!all_finite(o))
        throw std::invalid_argument("forward_structure: non-finite input");
    Vec h = matvec(p.w2, o, counter, 1);
    for (std::size_t i = 0; i < h.size(); ++i)
        h[i] = std::max(h[i] + p.b2[i], 0.0);
    return h;
}

double structure_risk(const Vec& h2, const ModelParams& p) {
    return p.alpha2 * std::log1p(l2_norm_sq(h2));
}

Vec fuse(const Vec& h1, const Vec& h2, const ModelParams& p,
         MulAddCounter* counter) {
    Vec ah = matvec(p.a, h1, counter, 2);
    Vec bh = matvec(p.b, h2, counter, 2);
    Vec h3(p.d3());
    for (std::size_t i = 0; i < h3.size(); ++i)
        h3[i] = ah[i] + bh[i] + p.c3[i];
    return h3;
}

double fusion_probability(const Vec& h3, const ModelParams& p) {
    return stable_logistic(dot(p.gamma, h3) + p.delta);
}

LayerEmbeddings forward_all(const Vec& c, const Vec& o, const ModelParams& p,
                            MulAddCounter* counter) {
    LayerEmbeddings emb;
    emb.h1 = forward_config(c, p, counter);
    emb.h2 = forward_structure(o, p, counter);
    emb.h3 = fuse(emb.h1, emb.h2, p, counter);
    emb.u.reserve(emb.h1.size() + emb.h2.size());
    emb.u = emb.h1;
    emb.u.insert(emb.u.end(), emb.h2.begin(), emb.h2.end());
    return emb;
}

double raw_layer_risk(int layer, const LayerEmbeddings& emb,
                      const ModelParams& p) {
    switch (layer) {
        case 1: return config_risk(emb.h1, p);
        case 2: return structure_risk(emb.h2, p);
        case 3: return dot(p.gamma, emb.h3) + p.delta;
        default: throw std::invalid_argument("layer must be 1, 2, or 3");
    }
}

double display_risk(int layer, double raw, const ModelParams& p) {
    if (layer < 1 || layer > 3)
        throw std::invalid_argument("layer must be 1, 2, or 3");
    return p.risk_scale * stable_logistic(raw + p.display_shift[layer - 1]);
}

MulAddCounts count_multiply_adds(const ModelParams& p) {
    if (p.d1() == 0 || p.d2() == 0 || p.d3() == 0 || p.k_c() == 0 ||
        p.k_o() == 0)
        throw std::invalid_argument(
            "count_multiply_adds: degenerate dimension");
    MulAddCounts counts;
    counts.layer1 = p.d1() * p.k_c();
    counts.layer2 = p.d2() * p.k_o();
    counts.layer3 = p.d3() * (p.d1() + p.d2());
    counts.total = counts.layer1 + counts.layer2 + counts.layer3;
    return counts;
}

}  // namespace fwrisk
