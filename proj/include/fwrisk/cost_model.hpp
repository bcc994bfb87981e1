#pragma once

#include <array>

#include "fwrisk/reasoner.hpp"

namespace fwrisk {

/// Coefficients of the symbolic cost and energy model. Units are carried as
/// labels only (ms, %, MJ); no conversion is ever applied.
struct CostCoefficients {
    std::array<double, 3> tau = {1.0, 1.0, 1.0};        // latency
    std::array<double, 3> zeta = {1.0, 1.0, 1.0};       // cpu
    std::array<double, 3> gpu_coeff = {1.0, 1.0, 1.0};  // gpu
    std::array<double, 3> nu = {1.0, 1.0, 1.0};         // tokens
    double eta = 1.0;
    double rho = 1.0;
    std::array<double, 3> layer_weights = {1.0, 1.0, 1.0};

    void validate() const;
};

struct CostIndices {
    std::array<double, 3> latency{};  // tau_i * ||W_i||_F
    std::array<double, 3> cpu{};      // zeta_i * ||h_i||_1
    std::array<double, 3> gpu{};      // gpu_i * ||h_i||_2^2
    std::array<double, 3> tokens{};   // nu_i * dim(h_i)
    double matrix[3][4] = {};         // rows: layers; cols: (l, c, g, T)
    std::array<double, 4> weighted{}; // v = C^T w
    double latency_total = 0.0;
    double cpu_total = 0.0;
    double gpu_total = 0.0;
    double tokens_total = 0.0;
};

/// Layer weight matrices are W1, W2, and the concatenation [A|B] whose
/// Frobenius norm is sqrt(||A||_F^2 + ||B||_F^2).
CostIndices layer_costs(const ModelParams& p, const LayerEmbeddings& emb,
                        const CostCoefficients& coeff);

/// E = (l_tot * c_tot) / (eta + g_tot) + rho * T_tot
double conceptual_energy(const CostIndices& idx, const CostCoefficients& coeff);

/// E_j = (l_j * c_j) / (eta + g_j) + rho * dim(h_j). Note sum E_j differs
/// from the global E in general: the global formula couples the totals.
std::array<double, 3> per_layer_energy(const CostIndices& idx,
                                       const CostCoefficients& coeff,
                                       const LayerEmbeddings& emb);

enum class RiskMode { Theory, Protocol };

/// Theory mode: Psi + kappa*E with raw risks. Protocol mode:
/// lambda . display_risks + kappa * sum(E_j); this is the mode the
/// evaluation pipeline feeds into the final probability.
double aggregate_risk(double r1, double r2, double big_d,
                      const std::array<double, 3>& display_risks,
                      double energy_global,
                      const std::array<double, 3>& energy_per_layer,
                      const ModelParams& p, RiskMode mode);

/// sigma(omega * R + xi)
double final_probability(double aggregated_risk, const ModelParams& p);

struct EnergyReport {
    double energy_global = 0.0;
    std::array<double, 3> energy_per_layer{};
    double risk_theory = 0.0;
    double risk_protocol = 0.0;
    double p_final = 0.0;
};

}  // namespace fwrisk
