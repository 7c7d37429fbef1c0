#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcs/errors.hpp"
#include "qcs/rng.hpp"

namespace qcs {

// Sparse binary sensing matrix with exactly 2 ones per column, stored by
// column supports. (rows, cols, seed) reconstruct it exactly.
struct SparseBinaryMatrix {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<std::array<std::uint32_t, 2>> column_supports;
    std::uint64_t seed = 0;

    Eigen::MatrixXd dense() const {
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
        for (std::uint32_t j = 0; j < cols; ++j) {
            out(column_supports[j][0], j) += 1.0;
            out(column_supports[j][1], j) += 1.0;
        }
        return out;
    }

    // y = Phi * x without forming the dense matrix.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
        if (x.size() != static_cast<Eigen::Index>(cols))
            throw DimensionError("SparseBinaryMatrix::apply: length mismatch");
        Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
        for (std::uint32_t j = 0; j < cols; ++j) {
            y[column_supports[j][0]] += x[j];
            y[column_supports[j][1]] += x[j];
        }
        return y;
    }

    // Y = Phi * X, row j of X being the coefficient of column j.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        if (x.rows() != static_cast<Eigen::Index>(cols))
            throw DimensionError("SparseBinaryMatrix::apply: row-count mismatch");
        Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, x.cols());
        for (std::uint32_t j = 0; j < cols; ++j) {
            y.row(column_supports[j][0]) += x.row(j);
            y.row(column_supports[j][1]) += x.row(j);
        }
        return y;
    }

    // x = Phi^T * v.
    Eigen::VectorXd apply_transpose(const Eigen::VectorXd& v) const {
        if (v.size() != static_cast<Eigen::Index>(rows))
            throw DimensionError("SparseBinaryMatrix::apply_transpose: length mismatch");
        Eigen::VectorXd x(cols);
        for (std::uint32_t j = 0; j < cols; ++j)
            x[j] = v[column_supports[j][0]] + v[column_supports[j][1]];
        return x;
    }
};

namespace detail {

// Row-echelon rank with a fixed pivot tolerance.
inline bool has_full_row_rank(const SparseBinaryMatrix& phi, double pivot_tol = 1e-10) {
    Eigen::MatrixXd a = phi.dense();
    const Eigen::Index m = a.rows(), n = a.cols();
    Eigen::Index rank = 0;
    for (Eigen::Index col = 0; col < n && rank < m; ++col) {
        Eigen::Index pivot = rank;
        double best = std::abs(a(pivot, col));
        for (Eigen::Index i = rank + 1; i < m; ++i) {
            if (std::abs(a(i, col)) > best) {
                best = std::abs(a(i, col));
                pivot = i;
            }
        }
        if (best <= pivot_tol) continue;
        a.row(pivot).swap(a.row(rank));
        for (Eigen::Index i = rank + 1; i < m; ++i)
            a.row(i) -= (a(i, col) / a(rank, col)) * a.row(rank);
        ++rank;
    }
    return rank == m;
}

}  // namespace detail

// Draws column supports uniformly without replacement; retries with an
// advanced seed until the matrix has full row rank.
inline SparseBinaryMatrix generate_matrix(std::uint32_t m, std::uint32_t n, std::uint64_t seed,
                                          int max_attempts = 1000) {
    if (m < 2) throw InvalidConfigError("generate_matrix: M must be at least 2");
    if (m > n) throw InvalidConfigError("generate_matrix: M must not exceed N");
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        SparseBinaryMatrix phi;
        phi.rows = m;
        phi.cols = n;
        phi.seed = seed + static_cast<std::uint64_t>(attempt);
        phi.column_supports.resize(n);
        Rng rng(phi.seed);
        for (std::uint32_t j = 0; j < n; ++j) {
            const auto r1 = static_cast<std::uint32_t>(rng.uniform_below(m));
            auto r2 = static_cast<std::uint32_t>(rng.uniform_below(m - 1));
            if (r2 >= r1) ++r2;
            phi.column_supports[j] = {r1, r2};
        }
        if (detail::has_full_row_rank(phi)) return phi;
    }
    throw GenerationFailureError("generate_matrix: no full-row-rank matrix within retry budget");
}

// One fixed-length window of a channel, unit-normalized with its norm kept.
struct Segment {
    Eigen::VectorXd samples;
    std::string channel;
    std::uint32_t index = 0;
    double norm = 1.0;
};

inline Eigen::VectorXd compress(const SparseBinaryMatrix& phi, const Segment& x) {
    return phi.apply(x.samples);
}

inline Eigen::VectorXd compress(const SparseBinaryMatrix& phi, const Eigen::VectorXd& x) {
    return phi.apply(x);
}

inline double compression_ratio(std::uint32_t m, std::uint32_t n) {
    if (m > n) throw InvalidConfigError("compression_ratio: M must not exceed N");
    return static_cast<double>(n - m) / static_cast<double>(n);
}

inline double bit_compression_ratio(std::uint32_t m, std::uint32_t n, int b, int b_i) {
    if (b > b_i) throw InvalidConfigError("bit_compression_ratio: B must not exceed B_i");
    const double cr = compression_ratio(m, n);
    return 1.0 - (1.0 - cr) * static_cast<double>(b) / static_cast<double>(b_i);
}

}  // namespace qcs
