#include "fwrisk/alignment.hpp"

#include <cmath>

namespace fwrisk {

namespace {
constexpr double kSimplexFloor = 1e-8;
}

SimplexVector normalize(const Vec& x) {
    if (x.empty()) throw std::invalid_argument("normalize: empty vector");
    if (!all_finite(x))
        throw std::invalid_argument("normalize: non-finite input");
    SimplexVector out;
    out.values.resize(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.values[i] = std::max(x[i], 0.0) + kSimplexFloor;
        total += out.values[i];
    }
    for (auto& v : out.values) v /= total;
    return out;
}

double kl(const SimplexVector& x, const SimplexVector& y) {
    if (x.dim() != y.dim())
        throw std::invalid_argument("kl: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.dim(); ++i)
        acc += x.values[i] * std::log(x.values[i] / y.values[i]);
    // Gibbs inequality guarantees >= 0; clamp away rounding residue.
    return std::max(acc, 0.0);
}

double extended_kl(const Vec& x, const Vec& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("extended_kl: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0.0 || y[i] <= 0.0)
            throw std::invalid_argument("extended_kl: inputs must be positive");
        acc += x[i] * std::log(x[i] / y[i]) - x[i] + y[i];
    }
    return acc;
}

std::array<Vec, 3> align_dims(const Vec& h1, const Vec& h2, const Vec& h3) {
    const std::size_t d = std::max({h1.size(), h2.size(), h3.size()});
    std::array<Vec, 3> out = {h1, h2, h3};
    for (auto& v : out) v.resize(d, 0.0);
    return out;
}

DivergenceResult divergence(const Vec& h1, const Vec& h2, const Vec& h3) {
    auto aligned = align_dims(h1, h2, h3);
    std::array<SimplexVector, 3> n = {normalize(aligned[0]),
                                      normalize(aligned[1]),
                                      normalize(aligned[2])};
    DivergenceResult res;
    for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k)
            res.pairwise.d[j][k] = (j == k) ? 0.0 : kl(n[j], n[k]);
    res.total = res.pairwise.at(1, 3) + res.pairwise.at(2, 3);
    return res;
}

double entropy(const Vec& h3) {
    SimplexVector p = normalize(h3);
    double acc = 0.0;
    for (double v : p.values) acc -= v * std::log(v);
    return std::max(acc, 0.0);
}

double misalignment_energy(const Vec& h1, const Vec& h2, const Vec& h3) {
    auto aligned = align_dims(h1, h2, h3);
    return l2_norm_sq(sub(aligned[2], aligned[0])) +
           l2_norm_sq(sub(aligned[2], aligned[1]));
}

double weighted_divergence_energy(const PairwiseDivergence& pairwise,
                                  const std::array<double, 3>& weights) {
    for (double w : weights)
        if (w < 0.0)
            throw std::invalid_argument(
                "weighted_divergence_energy: negative weight");
    const int pairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};
    double acc = 0.0;
    for (int i = 0; i < 3; ++i) {
        const int j = pairs[i][0], k = pairs[i][1];
        acc += weights[i] * 0.5 * (pairwise.at(j, k) + pairwise.at(k, j));
    }
    return acc;
}

double coupling_psi(double r1, double r2, double big_d, const ModelParams& p) {
    return p.lambda1 * r1 + p.lambda2 * r2 + p.lambda3 * big_d;
}

Vec divergence_gradient_h3(const SimplexVector& h1, const SimplexVector& h2,
                           const SimplexVector& h3) {
    if (h1.dim() != h3.dim() || h2.dim() != h3.dim())
        throw std::invalid_argument(
            "divergence_gradient_h3: dimension mismatch");
    Vec g(h3.dim());
    for (std::size_t i = 0; i < g.size(); ++i)
        g[i] = -h1.values[i] / h3.values[i] - h2.values[i] / h3.values[i] + 2.0;
    return g;
}

StableRegion stable_region_fraction(const SimplexVector& h1,
                                    const SimplexVector& h2,
                                    const SimplexVector& h3) {
    if (h1.dim() != h3.dim() || h2.dim() != h3.dim())
        throw std::invalid_argument(
            "stable_region_fraction: dimension mismatch");
    std::size_t positive = 0;
    std::size_t printed = 0;
    for (std::size_t i = 0; i < h3.dim(); ++i) {
        const double pair_sum = h1.values[i] + h2.values[i];
        if (h3.values[i] > 0.5 * pair_sum) ++positive;
        if (h3.values[i] < pair_sum) ++printed;
    }
    const double n = static_cast<double>(h3.dim());
    return {static_cast<double>(positive) / n,
            static_cast<double>(printed) / n};
}

AlignmentReport analyze_alignment(const LayerEmbeddings& emb,
                                  const ModelParams& p, double r1, double r2,
                                  const std::array<double, 3>& pair_weights) {
    AlignmentReport rep;
    DivergenceResult div = divergence(emb.h1, emb.h2, emb.h3);
    rep.total_divergence = div.total;
    rep.pairwise = div.pairwise;
    rep.entropy = entropy(emb.h3);
    rep.e_mis = misalignment_energy(emb.h1, emb.h2, emb.h3);
    rep.e_weighted = weighted_divergence_energy(div.pairwise, pair_weights);
    rep.psi = coupling_psi(r1, r2, div.total, p);

    auto aligned = align_dims(emb.h1, emb.h2, emb.h3);
    StableRegion region = stable_region_fraction(
        normalize(aligned[0]), normalize(aligned[1]), normalize(aligned[2]));
    rep.stable_fraction = region.fraction;
    rep.stable_fraction_printed = region.fraction_printed_condition;
    return rep;
}

}  // namespace fwrisk
