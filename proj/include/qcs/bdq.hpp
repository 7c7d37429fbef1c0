#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcs/errors.hpp"
#include "qcs/sensing.hpp"
#include "qcs/truncnorm.hpp"

namespace qcs {

// Orthonormal DCT Type-2 matrix; row k holds frequency k.
inline Eigen::MatrixXd dct_matrix(int n) {
    if (n < 2) throw InvalidConfigError("dct_matrix: N must be at least 2");
    Eigen::MatrixXd c(n, n);
    const double s0 = std::sqrt(1.0 / n);
    const double sk = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k) {
        const double scale = (k == 0) ? s0 : sk;
        for (int j = 0; j < n; ++j)
            c(k, j) = scale * std::cos(M_PI * (2.0 * j + 1.0) * k / (2.0 * n));
    }
    return c;
}

// AR(1) correlation matrix with entries r^|i-j|.
inline Eigen::MatrixXd ar1_matrix(double r, int n) {
    if (std::abs(r) >= 1.0) throw InvalidConfigError("ar1_matrix: |r| must be below 1");
    if (n < 2) throw InvalidConfigError("ar1_matrix: N must be at least 2");
    Eigen::MatrixXd p(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) p(i, j) = std::pow(r, std::abs(i - j));
    return p;
}

// Tridiagonal inverse of the AR(1) correlation matrix.
inline Eigen::MatrixXd ar1_inverse(double r, int n) {
    if (std::abs(r) >= 1.0) throw InvalidConfigError("ar1_inverse: |r| must be below 1");
    if (n < 2) throw InvalidConfigError("ar1_inverse: N must be at least 2");
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
    const double scale = 1.0 / (1.0 - r * r);
    for (int i = 0; i < n; ++i) p(i, i) = (i == 0 || i == n - 1) ? scale : (1.0 + r * r) * scale;
    for (int i = 0; i + 1 < n; ++i) p(i, i + 1) = p(i + 1, i) = -r * scale;
    return p;
}

struct BdqOptions {
    double lambda = 0.001;
    int max_iter = 128;
    double tol = 1e-8;
    double eigen_floor = 1e-8;
    bool saturation_aware = true;
    std::optional<double> v_ref;
    double delta = 0.0;
    bool learn_lambda = false;  // exposed for completeness, off by default

    void validate() const {
        if (lambda <= 0.0) throw InvalidConfigError("BdqOptions: lambda must be positive");
        if (tol <= 0.0) throw InvalidConfigError("BdqOptions: tol must be positive");
        if (eigen_floor <= 0.0 || eigen_floor >= 1.0)
            throw InvalidConfigError("BdqOptions: eigen_floor must lie in (0, 1)");
        if (max_iter < 1) throw InvalidConfigError("BdqOptions: max_iter must be at least 1");
        if (delta <= 0.0) throw InvalidConfigError("BdqOptions: delta is required and must be positive");
        if (v_ref && *v_ref <= 0.0) throw InvalidConfigError("BdqOptions: v_ref must be positive");
    }
};

// Latent state of the recovery loop.
struct BdqState {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    double gamma = 1.0;
    Eigen::MatrixXd P;
    double lambda = 0.001;
    Eigen::VectorXd e_hat;
    Eigen::VectorXd y_work;
};

struct BdqDiagnostics {
    int iterations = 0;
    std::vector<double> nll_trace;
    std::vector<double> gamma_trace;
    double wall_time_s = 0.0;
};

struct RecoverResult {
    Eigen::VectorXd x_hat;
    Eigen::VectorXd e_hat;
    BdqDiagnostics diagnostics;
};

// Posterior mean and covariance of the signal given working measurements y.
// Sigma is computed in the M x M form gamma*P - gamma*P*Phi^T A^{-1} Phi*gamma*P
// with A = lambda*I + gamma*Phi*P*Phi^T, avoiding the inversion of P.
// PhiT is any linear operator exposing rows, cols and apply() for vectors and
// matrices (SparseBinaryMatrix, or a dense wrapper in oracle code).
template <typename PhiT>
std::pair<Eigen::VectorXd, Eigen::MatrixXd> posterior_update(
    const Eigen::VectorXd& y, const PhiT& phi, double gamma,
    const Eigen::MatrixXd& p, double lambda) {
    if (gamma < 0.0) throw InvalidConfigError("posterior_update: gamma must be non-negative");
    if (lambda <= 0.0) throw InvalidConfigError("posterior_update: lambda must be positive");
    const Eigen::MatrixXd g = gamma * p;
    const Eigen::MatrixXd phi_g = phi.apply(g);  // M x N
    Eigen::MatrixXd a = phi.apply(Eigen::MatrixXd(phi_g.transpose()));
    a.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw IllConditionedError("posterior_update: measurement-space system not SPD");
    const Eigen::VectorXd mu = phi_g.transpose() * llt.solve(y);
    Eigen::MatrixXd sigma = g - phi_g.transpose() * llt.solve(phi_g);
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    return {mu, sigma};
}

// Type-II update of the correlation matrix.
inline Eigen::MatrixXd update_correlation(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                          double gamma) {
    if (gamma <= 0.0) throw DegenerateError("update_correlation: gamma must be positive");
    Eigen::MatrixXd p = (sigma + mu * mu.transpose()) / gamma;
    return 0.5 * (p + p.transpose()).eval();
}

// DCT-diagonalized, diagonal-normalized replacement for P, plus the pieces
// (v, d) of the factorized inverse diag(v) C^T diag(1/d) C diag(v).
struct RegularizedCorrelation {
    Eigen::MatrixXd p_bar;
    Eigen::VectorXd v;  // sqrt of diag of C^T D C
    Eigen::VectorXd d;  // floored eigenvalues, descending

    Eigen::MatrixXd dense_inverse(const Eigen::MatrixXd& c) const {
        return v.asDiagonal() * (c.transpose() * d.cwiseInverse().asDiagonal() * c) *
               v.asDiagonal();
    }
};

inline RegularizedCorrelation regularize_correlation(const Eigen::MatrixXd& p,
                                                     double eigen_floor,
                                                     const Eigen::MatrixXd& c) {
    const Eigen::Index n = p.rows();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
        throw IllConditionedError("regularize_correlation: eigenvalue computation failed");
    RegularizedCorrelation out;
    out.d.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) out.d[k] = es.eigenvalues()[n - 1 - k];  // descending
    const double floor_value = eigen_floor * out.d[0];
    if (!(floor_value > 0.0))
        throw RegularizationFailureError("regularize_correlation: largest eigenvalue not positive");
    out.d = out.d.cwiseMax(floor_value);
    const Eigen::MatrixXd p_tilde = c.transpose() * out.d.asDiagonal() * c;
    const Eigen::VectorXd diag = p_tilde.diagonal();
    if ((diag.array() <= 0.0).any())
        throw RegularizationFailureError("regularize_correlation: non-positive diagonal");
    out.v = diag.cwiseSqrt();
    const Eigen::VectorXd inv_v = out.v.cwiseInverse();
    out.p_bar = inv_v.asDiagonal() * p_tilde * inv_v.asDiagonal();
    return out;
}

// gamma = Tr[P_bar^{-1} (Sigma + mu mu^T)] / N using the factorized inverse.
inline double update_gamma(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                           const RegularizedCorrelation& reg, const Eigen::MatrixXd& c) {
    const Eigen::Index n = mu.size();
    const Eigen::MatrixXd s = sigma + mu * mu.transpose();
    const Eigen::MatrixXd vsv = reg.v.asDiagonal() * s * reg.v.asDiagonal();
    const Eigen::MatrixXd w = c * vsv;
    double trace = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) trace += w.row(k).dot(c.row(k)) / reg.d[k];
    return std::max(trace / static_cast<double>(n), 0.0);
}

// Dense-oracle overload taking an explicit inverse.
inline double update_gamma(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                           const Eigen::MatrixXd& p_bar_inverse) {
    const Eigen::MatrixXd s = sigma + mu * mu.transpose();
    return std::max((p_bar_inverse * s).trace() / static_cast<double>(mu.size()), 0.0);
}

// Type-II update of the noise variance; gated off by default in the loop.
template <typename PhiT>
double update_lambda(const Eigen::VectorXd& y, const PhiT& phi,
                     const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma) {
    const Eigen::VectorXd residual = y - phi.apply(mu);
    const Eigen::MatrixXd phi_sigma = phi.apply(sigma);
    const Eigen::MatrixXd phi_sigma_phi_t = phi.apply(Eigen::MatrixXd(phi_sigma.transpose()));
    return (residual.squaredNorm() + phi_sigma_phi_t.trace()) / static_cast<double>(phi.rows);
}

// Expected quantization error per measurement given the current estimate.
// Interior cells use the two-sided truncated-normal mean on [-delta/2, delta/2].
// With a known v_ref, measurements decoded at an extreme level came from a
// one-sided cell (the error support is unbounded toward the rail), so the
// matching bound is dropped; when the estimate Phi*mu itself lies beyond the
// rail the kept bound tightens from +delta/2 to -delta/2 (mirrored below).
template <typename PhiT>
Eigen::VectorXd estimate_quantization_error(const Eigen::VectorXd& z,
                                            const Eigen::VectorXd& mu,
                                            const PhiT& phi, double lambda,
                                            double delta,
                                            std::optional<double> v_ref = std::nullopt,
                                            bool saturation_aware = true) {
    if (lambda <= 0.0)
        throw InvalidConfigError("estimate_quantization_error: lambda must be positive");
    if (delta <= 0.0)
        throw InvalidConfigError("estimate_quantization_error: delta must be positive");
    const Eigen::VectorXd z_hat = phi.apply(mu);
    const Eigen::VectorXd mu_e = z - z_hat;
    const double s = std::sqrt(lambda);
    const double half = 0.5 * delta;
    Eigen::VectorXd e(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        if (saturation_aware && v_ref) {
            const double rail = *v_ref - half;
            if (z[i] >= rail - 1e-9 * delta) {  // top level
                const double bound = (z_hat[i] > *v_ref) ? -half : half;
                e[i] = trunc_normal_mean_upper(mu_e[i], s, bound);
                continue;
            }
            if (z[i] <= -rail + 1e-9 * delta) {  // bottom level
                const double bound = (z_hat[i] < -*v_ref) ? half : -half;
                e[i] = trunc_normal_mean_lower(mu_e[i], s, bound);
                continue;
            }
        }
        e[i] = trunc_normal_mean(mu_e[i], s, -half, half);
    }
    return e;
}

// Negative log evidence of the working measurements.
template <typename PhiT>
double negative_log_likelihood(const Eigen::VectorXd& y, const PhiT& phi,
                               double gamma, const Eigen::MatrixXd& p, double lambda) {
    if (lambda <= 0.0) throw InvalidConfigError("negative_log_likelihood: lambda must be positive");
    const Eigen::MatrixXd g = gamma * p;
    const Eigen::MatrixXd phi_g = phi.apply(g);
    Eigen::MatrixXd a = phi.apply(Eigen::MatrixXd(phi_g.transpose()));
    a.diagonal().array() += lambda;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw IllConditionedError("negative_log_likelihood: covariance not SPD");
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return log_det + y.dot(llt.solve(y));
}

namespace detail {

template <typename PhiT>
RecoverResult run_bdq(const Eigen::VectorXd& z, const PhiT& phi,
                      const BdqOptions& opts, bool estimate_error) {
    opts.validate();
    if (z.size() != static_cast<Eigen::Index>(phi.rows))
        throw DimensionError("recover: measurement length does not match matrix rows");
    const auto t0 = std::chrono::steady_clock::now();
    const int n = static_cast<int>(phi.cols);
    const Eigen::MatrixXd c = dct_matrix(n);

    BdqState st;
    st.gamma = 1.0;
    st.P = Eigen::MatrixXd::Identity(n, n);
    st.lambda = opts.lambda;
    st.e_hat = Eigen::VectorXd::Zero(phi.rows);
    st.y_work = z;

    BdqDiagnostics diag;
    Eigen::VectorXd mu_prev;
    bool have_prev = false;
    for (int it = 1; it <= opts.max_iter; ++it) {
        diag.iterations = it;
        std::tie(st.mu, st.sigma) = posterior_update(st.y_work, phi, st.gamma, st.P, st.lambda);
        const Eigen::MatrixXd p_raw = update_correlation(st.mu, st.sigma, st.gamma);
        const RegularizedCorrelation reg = regularize_correlation(p_raw, opts.eigen_floor, c);
        st.P = reg.p_bar;
        st.gamma = update_gamma(st.mu, st.sigma, reg, c);
        if (opts.learn_lambda) st.lambda = update_lambda(st.y_work, phi, st.mu, st.sigma);
        if (estimate_error)
            st.e_hat = estimate_quantization_error(z, st.mu, phi, st.lambda, opts.delta,
                                                   opts.v_ref, opts.saturation_aware);
        st.y_work = z - st.e_hat;
        diag.gamma_trace.push_back(st.gamma);
        diag.nll_trace.push_back(
            negative_log_likelihood(st.y_work, phi, st.gamma, st.P, st.lambda));
        if (have_prev) {
            const double rel = (st.mu - mu_prev).norm() / std::max(mu_prev.norm(), 1e-12);
            if (rel < opts.tol) break;
        }
        mu_prev = st.mu;
        have_prev = true;
    }
    diag.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {st.mu, st.e_hat, std::move(diag)};
}

}  // namespace detail

// Bayesian de-quantization: recovers a length-N signal from M quantized
// (mid-point dequantized) measurements.
template <typename PhiT>
RecoverResult recover(const Eigen::VectorXd& z, const PhiT& phi, const BdqOptions& opts) {
    return detail::run_bdq(z, phi, opts, true);
}

// Baseline arm: identical loop with the quantization-error step disabled.
template <typename PhiT>
RecoverResult recover_blind(const Eigen::VectorXd& z, const PhiT& phi, const BdqOptions& opts) {
    return detail::run_bdq(z, phi, opts, false);
}

}  // namespace qcs
