#pragma once

#include <string>

#include "fwrisk/cost_model.hpp"
#include "fwrisk/reasoner.hpp"

namespace fwrisk {

/// Parameters of the single-affine ablation baseline: one affine map over
/// [one-hot(arch); c; o] followed by a logistic head.
struct ShallowParams {
    Mat w;          // d x (3 + k_c + k_o)
    Vec bias;       // d
    Vec head_w;     // d
    double head_bias = 0.0;

    std::size_t input_dim() const { return w.cols; }
    std::size_t d() const { return w.rows; }
};

ShallowParams seeded_shallow(std::uint64_t seed, std::size_t k_c,
                             std::size_t k_o, std::size_t d, double gain,
                             double head_bias);

/// Everything a run needs: model parameters, cost coefficients, the seed
/// and init options they were generated from, and the shallow-baseline
/// knobs. Serialized as a single JSON document.
struct ParameterSet {
    std::string name = "default";
    std::uint64_t param_seed = 0;
    Dims dims;
    InitOptions init;
    double shallow_gain = 1.0;
    double shallow_bias = 0.0;
    ModelParams model;
    CostCoefficients cost;
    std::array<double, 3> pair_weights = {1.0, 1.0, 1.0};

    ShallowParams shallow() const;

    static ParameterSet seeded(const Dims& dims, std::uint64_t param_seed,
                               const InitOptions& init = {});
    static ParameterSet load(const std::string& path);
    void save(const std::string& path) const;

    std::string to_json_text() const;
    static ParameterSet from_json_text(const std::string& text);
};

}  // namespace fwrisk
