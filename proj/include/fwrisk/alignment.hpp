#pragma once

#include <array>

#include "fwrisk/reasoner.hpp"

namespace fwrisk {

/// Strictly positive vector summing to 1; produced by normalize().
struct SimplexVector {
    Vec values;
    std::size_t dim() const { return values.size(); }
};

/// Clip-and-floor projection onto the open simplex:
/// (max(x_i,0) + eps) / sum_j (max(x_j,0) + eps), eps = 1e-8.
/// Keeps KL finite in the presence of ReLU zeros while perturbing
/// well-supported vectors by < 1e-7 relative.
SimplexVector normalize(const Vec& x);

/// KL divergence sum x_i log(x_i / y_i) in nats.
double kl(const SimplexVector& x, const SimplexVector& y);

/// Extended KL for positive measures, sum [x log(x/y) - x + y]; coincides
/// with kl() on the simplex. This is the form whose h3-gradient is
/// -(h1+h2)/h3 + 2 without a renormalization step.
double extended_kl(const Vec& x, const Vec& y);

/// Ordered-pair divergences D_jk = KL(p(h_j) || p(h_k)), j != k; the
/// diagonal is zero.
struct PairwiseDivergence {
    std::array<std::array<double, 3>, 3> d{};
    double at(int j, int k) const { return d[j - 1][k - 1]; }
};

struct DivergenceResult {
    double total;  // KL(h1||h3) + KL(h2||h3)
    PairwiseDivergence pairwise;
};

/// Zero-pads raw embeddings to a common length (before normalization).
std::array<Vec, 3> align_dims(const Vec& h1, const Vec& h2, const Vec& h3);

DivergenceResult divergence(const Vec& h1, const Vec& h2, const Vec& h3);

/// Entropy of the normalized embedding, in [0, ln dim].
double entropy(const Vec& h3);

/// ||h3-h1||^2 + ||h3-h2||^2 on dimension-aligned raw embeddings.
double misalignment_energy(const Vec& h1, const Vec& h2, const Vec& h3);

/// Unordered-pair aggregate sum_{j<k} w_jk * (D_jk + D_kj)/2 with
/// weights ordered (1,2), (1,3), (2,3).
double weighted_divergence_energy(const PairwiseDivergence& pairwise,
                                  const std::array<double, 3>& weights);

double coupling_psi(double r1, double r2, double big_d, const ModelParams& p);

/// Gradient of the extended-KL divergence in h3: -(h1+h2)/h3 + 2,
/// element-wise on normalized inputs.
Vec divergence_gradient_h3(const SimplexVector& h1, const SimplexVector& h2,
                           const SimplexVector& h3);

struct StableRegion {
    /// Fraction of coordinates with positive divergence derivative,
    /// i.e. h3_i > (h1_i + h2_i)/2.
    double fraction;
    /// Alternate diagnostic using the condition h3_i < h1_i + h2_i as
    /// printed in the source derivation.
    double fraction_printed_condition;
};

StableRegion stable_region_fraction(const SimplexVector& h1,
                                    const SimplexVector& h2,
                                    const SimplexVector& h3);

struct AlignmentReport {
    double total_divergence = 0.0;  // D
    PairwiseDivergence pairwise;
    double entropy = 0.0;           // H(h3)
    double e_mis = 0.0;             // Euclidean misalignment
    double e_weighted = 0.0;        // weighted divergence aggregate
    double psi = 0.0;
    double stable_fraction = 0.0;
    double stable_fraction_printed = 0.0;
};

AlignmentReport analyze_alignment(const LayerEmbeddings& emb,
                                  const ModelParams& p, double r1, double r2,
                                  const std::array<double, 3>& pair_weights = {
                                      1.0, 1.0, 1.0});

}  // namespace fwrisk
