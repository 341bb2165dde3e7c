#pragma once

#include <cstddef>
#include <vector>

namespace ttc {

using Vector = std::vector<double>;

// A probability vector is a Vector whose entries lie in [0,1] and sum to 1
// (within 1e-12). Functions returning one guarantee that by construction.
using ProbabilityVector = Vector;

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

bool is_probability_vector(const Vector& v, double tol = 1e-12);

// W*a + b. Throws std::invalid_argument on shape mismatch.
Vector affine(const Matrix& W, const Vector& a, const Vector& b);

// softmax(z / tau) with the max logit subtracted before exponentiation.
// Requires tau > 0 and a non-empty input.
ProbabilityVector softmax_temperature(const Vector& z, double tau);

// Row vector times matrix: y * M, length M.cols.
Vector row_times_matrix(const Vector& y, const Matrix& M);

Vector elementwise_product(const Vector& z, const Vector& m);

// -log(y_hat[true_index]); probabilities are clamped at 1e-300 before the log.
double cross_entropy(std::size_t true_index, const ProbabilityVector& y_hat);

// One-hot overload; throws if y_true is not one-hot.
double cross_entropy(const Vector& y_true_onehot, const ProbabilityVector& y_hat);

// Index of the largest entry, ties broken by lowest index.
std::size_t argmax(const Vector& v);

} // namespace ttc
