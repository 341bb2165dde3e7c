#include "ttc/numeric.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ttc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool is_probability_vector(const Vector& v, double tol) {
    if (v.empty()) return false;
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0 && x <= 1.0)) return false;
        sum += x;
    }
    return std::abs(sum - 1.0) <= tol;
}

Vector affine(const Matrix& W, const Vector& a, const Vector& b) {
    require(W.cols == a.size(), "affine: W.cols != a.length");
    require(W.rows == b.size(), "affine: W.rows != b.length");
    Vector out(W.rows);
    for (std::size_t r = 0; r < W.rows; ++r) {
        double acc = 0.0;
        const double* row = W.data.data() + r * W.cols;
        for (std::size_t c = 0; c < W.cols; ++c) acc += row[c] * a[c];
        out[r] = acc + b[r];
    }
    return out;
}

ProbabilityVector softmax_temperature(const Vector& z, double tau) {
    require(!z.empty(), "softmax_temperature: empty input");
    require(tau > 0.0, "softmax_temperature: tau must be > 0");
    Vector scaled(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) scaled[i] = z[i] / tau;
    double max = scaled[0];
    for (double x : scaled) max = std::max(max, x);
    ProbabilityVector out(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        out[i] = std::exp(scaled[i] - max);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

Vector row_times_matrix(const Vector& y, const Matrix& M) {
    require(y.size() == M.rows, "row_times_matrix: y.length != M.rows");
    Vector out(M.cols, 0.0);
    for (std::size_t r = 0; r < M.rows; ++r) {
        const double yr = y[r];
        const double* row = M.data.data() + r * M.cols;
        for (std::size_t c = 0; c < M.cols; ++c) out[c] += yr * row[c];
    }
    return out;
}

Vector elementwise_product(const Vector& z, const Vector& m) {
    require(z.size() == m.size(), "elementwise_product: length mismatch");
    Vector out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] * m[i];
    return out;
}

double cross_entropy(std::size_t true_index, const ProbabilityVector& y_hat) {
    require(true_index < y_hat.size(), "cross_entropy: true index out of range");
    return -std::log(std::max(y_hat[true_index], 1e-300));
}

double cross_entropy(const Vector& y_true_onehot, const ProbabilityVector& y_hat) {
    require(y_true_onehot.size() == y_hat.size(), "cross_entropy: length mismatch");
    std::size_t ones = 0;
    std::size_t index = 0;
    for (std::size_t i = 0; i < y_true_onehot.size(); ++i) {
        const double x = y_true_onehot[i];
        if (std::abs(x - 1.0) <= 1e-12) {
            ++ones;
            index = i;
        } else if (std::abs(x) > 1e-12) {
            throw std::invalid_argument("cross_entropy: y_true is not one-hot");
        }
    }
    require(ones == 1, "cross_entropy: y_true is not one-hot");
    return cross_entropy(index, y_hat);
}

std::size_t argmax(const Vector& v) {
    require(!v.empty(), "argmax: empty input");
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

} // namespace ttc
