#include "fwrisk/cost_model.hpp"

#include <cmath>

namespace fwrisk {

void CostCoefficients::validate() const {
    for (const auto* arr : {&tau, &zeta, &gpu_coeff, &nu, &layer_weights})
        for (double x : *arr)
            if (x < 0.0 || !std::isfinite(x))
                throw std::invalid_argument(
                    "cost: coefficients must be finite and >= 0");
    if (eta <= 0.0 || rho <= 0.0)
        throw std::invalid_argument("cost: eta and rho must be > 0");
}

CostIndices layer_costs(const ModelParams& p, const LayerEmbeddings& emb,
                        const CostCoefficients& coeff) {
    coeff.validate();
    const double w3_frob =
        std::sqrt(frobenius_norm(p.a) * frobenius_norm(p.a) +
                  frobenius_norm(p.b) * frobenius_norm(p.b));
    const std::array<double, 3> w_frob = {frobenius_norm(p.w1),
                                          frobenius_norm(p.w2), w3_frob};
    const std::array<const Vec*, 3> h = {&emb.h1, &emb.h2, &emb.h3};

    CostIndices idx;
    for (int i = 0; i < 3; ++i) {
        idx.latency[i] = coeff.tau[i] * w_frob[i];
        idx.cpu[i] = coeff.zeta[i] * l1_norm(*h[i]);
        idx.gpu[i] = coeff.gpu_coeff[i] * l2_norm_sq(*h[i]);
        idx.tokens[i] = coeff.nu[i] * static_cast<double>(h[i]->size());
        idx.matrix[i][0] = idx.latency[i];
        idx.matrix[i][1] = idx.cpu[i];
        idx.matrix[i][2] = idx.gpu[i];
        idx.matrix[i][3] = idx.tokens[i];
    }
    for (int col = 0; col < 4; ++col) {
        double acc = 0.0;
        for (int row = 0; row < 3; ++row)
            acc += idx.matrix[row][col] * coeff.layer_weights[row];
        idx.weighted[col] = acc;
    }
    for (int i = 0; i < 3; ++i) {
        idx.latency_total += idx.latency[i];
        idx.cpu_total += idx.cpu[i];
        idx.gpu_total += idx.gpu[i];
        idx.tokens_total += idx.tokens[i];
    }
    return idx;
}

double conceptual_energy(const CostIndices& idx, const CostCoefficients& coeff) {
    return idx.latency_total * idx.cpu_total / (coeff.eta + idx.gpu_total) +
           coeff.rho * idx.tokens_total;
}

std::array<double, 3> per_layer_energy(const CostIndices& idx,
                                       const CostCoefficients& coeff,
                                       const LayerEmbeddings& emb) {
    const std::array<double, 3> dims = {static_cast<double>(emb.h1.size()),
                                        static_cast<double>(emb.h2.size()),
                                        static_cast<double>(emb.h3.size())};
    std::array<double, 3> e{};
    for (int j = 0; j < 3; ++j) {
        e[j] = idx.latency[j] * idx.cpu[j] / (coeff.eta + idx.gpu[j]) +
               coeff.rho * dims[j];
    }
    return e;
}

double aggregate_risk(double r1, double r2, double big_d,
                      const std::array<double, 3>& display_risks,
                      double energy_global,
                      const std::array<double, 3>& energy_per_layer,
                      const ModelParams& p, RiskMode mode) {
    switch (mode) {
        case RiskMode::Theory:
            return p.lambda1 * r1 + p.lambda2 * r2 + p.lambda3 * big_d +
                   p.kappa * energy_global;
        case RiskMode::Protocol: {
            double energy_sum = energy_per_layer[0] + energy_per_layer[1] +
                                energy_per_layer[2];
            return p.lambda1 * display_risks[0] + p.lambda2 * display_risks[1] +
                   p.lambda3 * display_risks[2] + p.kappa * energy_sum;
        }
    }
    throw std::invalid_argument("aggregate_risk: unknown mode");
}

double final_probability(double aggregated_risk, const ModelParams& p) {
    return stable_logistic(p.omega * aggregated_risk + p.xi_bias);
}

}  // namespace fwrisk
