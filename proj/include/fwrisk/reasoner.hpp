#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "fwrisk/linalg.hpp"

namespace fwrisk {

/// Logistic sigmoid in the overflow-safe two-branch form.
double stable_logistic(double x);

/// All model parameters of the tri-layer pipeline plus the coupling and
/// display coefficients. Immutable by convention after construction.
struct ModelParams {
    Mat w1;            // d1 x k_c
    Vec b1;            // d1
    double alpha1 = 1.0;
    double beta1 = 0.0;

    Mat w2;            // d2 x k_o
    Vec b2;            // d2
    double alpha2 = 1.0;

    Mat a;             // d3 x d1
    Mat b;             // d3 x d2
    Vec c3;            // d3
    Vec gamma;         // d3
    double delta = 0.0;

    double lambda1 = 1.0, lambda2 = 1.0, lambda3 = 1.0;
    double kappa = 0.0;
    double omega = 1.0;
    double xi_bias = 0.0;
    double risk_scale = 100.0;
    // Per-layer shift applied inside the 0-100 display mapping; the raw risk
    // scores are kept unshifted.
    std::array<double, 3> display_shift = {0.0, 0.0, 0.0};

    std::size_t d1() const { return w1.rows; }
    std::size_t d2() const { return w2.rows; }
    std::size_t d3() const { return a.rows; }
    std::size_t k_c() const { return w1.cols; }
    std::size_t k_o() const { return w2.cols; }

    void validate() const;  // throws std::invalid_argument
};

struct LayerEmbeddings {
    Vec h1;  // sigmoid range (0,1)
    Vec h2;  // ReLU range [0,inf)
    Vec h3;
    Vec u;   // concatenation [h1; h2]
};

struct InitOptions {
    double gain1 = 1.0;
    double gain2 = 1.0;
    double gain3 = 1.0;
    double bias1_shift = 0.0;
    double bias2_shift = 0.0;
    // Takes absolute values of gamma, A, B entries so the divergence
    // monotonicity results hold by construction.
    bool monotone_regime = true;
};

struct Dims {
    std::size_t k_c = 16, k_o = 16;
    std::size_t d1 = 12, d2 = 12, d3 = 12;
};

/// Deterministic parameter draw: entries ~ N(0, 1/sqrt(fan_in)) scaled by
/// the per-layer gain, biases shifted by the init options.
ModelParams seeded_params(const Dims& dims, std::uint64_t param_seed,
                          const InitOptions& options = {});

Vec forward_config(const Vec& c, const ModelParams& p,
                   MulAddCounter* counter = nullptr);
double config_risk(const Vec& h1, const ModelParams& p);
Vec forward_structure(const Vec& o, const ModelParams& p,
                      MulAddCounter* counter = nullptr);
double structure_risk(const Vec& h2, const ModelParams& p);
Vec fuse(const Vec& h1, const Vec& h2, const ModelParams& p,
         MulAddCounter* counter = nullptr);
double fusion_probability(const Vec& h3, const ModelParams& p);

LayerEmbeddings forward_all(const Vec& c, const Vec& o, const ModelParams& p,
                            MulAddCounter* counter = nullptr);

/// Raw pre-display risk of a layer: r1, r2, or gamma^T h3 + delta.
double raw_layer_risk(int layer, const LayerEmbeddings& emb,
                      const ModelParams& p);

/// 0-100 display mapping: risk_scale * logistic(raw + display_shift).
double display_risk(int layer, double raw, const ModelParams& p);

struct MulAddCounts {
    std::size_t layer1 = 0;
    std::size_t layer2 = 0;
    std::size_t layer3 = 0;
    std::size_t total = 0;
};

/// Closed-form multiply-add counts d1*k_c, d2*k_o, d3*(d1+d2) of one
/// forward pass; the instrumented counter must match these exactly.
MulAddCounts count_multiply_adds(const ModelParams& p);

}  // namespace fwrisk
