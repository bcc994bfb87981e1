#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fwrisk {

using Vec = std::vector<double>;

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    static Mat identity(std::size_t n);
};

/// Tracks fused multiply-add counts of the instrumented forward pass,
/// one slot per reasoning layer.
struct MulAddCounter {
    std::size_t layer[3] = {0, 0, 0};
    std::size_t total() const { return layer[0] + layer[1] + layer[2]; }
};

/// y = W x. When `counter` is given, adds rows*cols multiply-adds to
/// counter->layer[layer_index].
Vec matvec(const Mat& w, const Vec& x, MulAddCounter* counter = nullptr,
           int layer_index = 0);

double dot(const Vec& a, const Vec& b);
double l1_norm(const Vec& v);
double l2_norm_sq(const Vec& v);
double frobenius_norm(const Mat& m);
Vec add(const Vec& a, const Vec& b);
Vec sub(const Vec& a, const Vec& b);
bool all_finite(const Vec& v);
bool all_finite(const Mat& m);

struct CholeskyError : std::runtime_error {
    explicit CholeskyError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Lower-triangular factor L with A = L L^T. Accepts positive
/// *semi*-definite input: a pivot within tolerance of zero zeroes out its
/// column instead of failing, so e.g. the all-zero matrix factors to zero
/// exactly. A significantly negative pivot throws CholeskyError.
Mat cholesky_psd(const Mat& a);

}  // namespace fwrisk
