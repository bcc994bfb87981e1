#include "fwrisk/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace fwrisk {

Mat Mat::identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

Vec matvec(const Mat& w, const Vec& x, MulAddCounter* counter,
           int layer_index) {
    if (x.size() != w.cols) {
        throw std::invalid_argument("matvec: dimension mismatch (" +
                                    std::to_string(w.cols) + " cols vs " +
                                    std::to_string(x.size()) + " input)");
    }
    Vec y(w.rows, 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
        double acc = 0.0;
        const double* row = w.data.data() + r * w.cols;
        for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
    if (counter) counter->layer[layer_index] += w.rows * w.cols;
    return y;
}

double dot(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("dot: dimension mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double l1_norm(const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += std::abs(x);
    return acc;
}

double l2_norm_sq(const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

double frobenius_norm(const Mat& m) {
    double acc = 0.0;
    for (double x : m.data) acc += x * x;
    return std::sqrt(acc);
}

Vec add(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("add: dimension mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Vec sub(const Vec& a, const Vec& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("sub: dimension mismatch");
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

bool all_finite(const Vec& v) {
    return std::all_of(v.begin(), v.end(),
                       [](double x) { return std::isfinite(x); });
}

bool all_finite(const Mat& m) { return all_finite(m.data); }

Mat cholesky_psd(const Mat& a) {
    if (a.rows != a.cols)
        throw std::invalid_argument("cholesky: matrix not square");
    const std::size_t n = a.rows;
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diag = std::max(max_diag, std::abs(a.at(i, i)));
    const double tol = 1e-12 * std::max(max_diag, 1.0);

    Mat l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a.at(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l.at(j, k) * l.at(j, k);
        if (d < -tol) {
            throw CholeskyError("cholesky: matrix not positive semi-definite "
                                "(pivot " + std::to_string(d) + " at " +
                                std::to_string(j) + ")");
        }
        if (d <= tol) {
            // Semi-definite null direction: zero pivot, zero column.
            continue;
        }
        const double pivot = std::sqrt(d);
        l.at(j, j) = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a.at(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l.at(i, k) * l.at(j, k);
            l.at(i, j) = s / pivot;
        }
    }
    return l;
}

}  // namespace fwrisk
