#pragma once

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcs/errors.hpp"

namespace qcs {

// Reconstruction SNR in dB; +infinity when the reconstruction is exact.
inline double rsnr(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
    if (x.size() != x_hat.size()) throw DimensionError("rsnr: length mismatch");
    const double signal = x.squaredNorm();
    if (signal <= 0.0) throw UndefinedMetricError("rsnr: reference signal has zero norm");
    const double err = (x_hat - x).squaredNorm();
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / err);
}

// Average RSNR over segments: 10*log10 of the mean of the linear per-segment
// ratios, not the mean of the dB values. Exact-reconstruction segments carry
// an infinite ratio and are excluded with a warning.
inline double arsnr_from_rsnr(const std::vector<double>& rsnr_db) {
    if (rsnr_db.empty()) throw InvalidConfigError("arsnr: needs at least one segment");
    double sum = 0.0;
    std::size_t kept = 0;
    for (double v : rsnr_db) {
        if (std::isinf(v)) continue;
        sum += std::pow(10.0, v / 10.0);
        ++kept;
    }
    if (kept < rsnr_db.size())
        std::cerr << "arsnr: excluded " << (rsnr_db.size() - kept)
                  << " zero-error segment(s) from the average\n";
    if (kept == 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(sum / static_cast<double>(kept));
}

inline double arsnr(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& segments) {
    std::vector<double> values;
    values.reserve(segments.size());
    for (const auto& [x, x_hat] : segments) values.push_back(rsnr(x, x_hat));
    return arsnr_from_rsnr(values);
}

// Mean local structural similarity over length-8 sliding windows (stride 1,
// rectangular, population moments). The dynamic range comes from the
// reference signal.
inline double ssim_1d(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat, int window = 8) {
    if (x.size() != x_hat.size()) throw DimensionError("ssim_1d: length mismatch");
    if (x.size() < window) throw DimensionError("ssim_1d: input shorter than window");
    const double range = x.maxCoeff() - x.minCoeff();
    if (range <= 0.0) throw UndefinedMetricError("ssim_1d: reference has zero dynamic range");
    const double c1 = (0.01 * range) * (0.01 * range);
    const double c2 = (0.03 * range) * (0.03 * range);
    const double inv_w = 1.0 / window;
    double total = 0.0;
    const Eigen::Index count = x.size() - window + 1;
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto a = x.segment(i, window);
        const auto b = x_hat.segment(i, window);
        const double ma = a.mean();
        const double mb = b.mean();
        const double va = a.squaredNorm() * inv_w - ma * ma;
        const double vb = b.squaredNorm() * inv_w - mb * mb;
        const double cov = a.dot(b) * inv_w - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(count);
}

namespace detail {

// Drops pairs where the estimate carries the undefined marker (NaN).
inline std::vector<std::pair<double, double>> paired_bpm(const std::vector<double>& est,
                                                         const std::vector<double>& truth) {
    if (est.size() != truth.size()) throw DimensionError("hr metrics: length mismatch");
    std::vector<std::pair<double, double>> out;
    out.reserve(est.size());
    for (std::size_t i = 0; i < est.size(); ++i)
        if (!std::isnan(est[i]) && !std::isnan(truth[i])) out.emplace_back(est[i], truth[i]);
    if (out.empty()) throw UndefinedMetricError("hr metrics: no defined estimate pairs");
    return out;
}

}  // namespace detail

// Mean absolute heart-rate error in BPM.
inline double error1(const std::vector<double>& bpm_est, const std::vector<double>& bpm_true) {
    const auto pairs = detail::paired_bpm(bpm_est, bpm_true);
    double sum = 0.0;
    for (const auto& [e, t] : pairs) sum += std::abs(e - t);
    return sum / static_cast<double>(pairs.size());
}

// Root-mean-square heart-rate error in BPM.
inline double sd_bpm(const std::vector<double>& bpm_est, const std::vector<double>& bpm_true) {
    const auto pairs = detail::paired_bpm(bpm_est, bpm_true);
    double sum = 0.0;
    for (const auto& [e, t] : pairs) sum += (e - t) * (e - t);
    return std::sqrt(sum / static_cast<double>(pairs.size()));
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("pearson: length mismatch");
    if (a.size() < 2) throw InvalidConfigError("pearson: needs at least two points");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
        sab += (a[i] - ma) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) throw UndefinedMetricError("pearson: constant input");
    return sab / std::sqrt(saa * sbb);
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

// Least squares b ~ slope*a + intercept.
inline LinearFit linear_fit(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DimensionError("linear_fit: length mismatch");
    if (a.size() < 2) throw InvalidConfigError("linear_fit: needs at least two points");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sab = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        saa += (a[i] - ma) * (a[i] - ma);
        sab += (a[i] - ma) * (b[i] - mb);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0) throw UndefinedMetricError("linear_fit: constant predictor");
    LinearFit fit;
    fit.slope = sab / saa;
    fit.intercept = mb - fit.slope * ma;
    if (sbb <= 0.0) throw UndefinedMetricError("linear_fit: constant response");
    double ss_res = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double r = b[i] - (fit.slope * a[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r_squared = 1.0 - ss_res / sbb;
    return fit;
}

struct RecoveryReport {
    std::vector<double> rsnr_db;
    double arsnr_db = 0.0;
    std::vector<double> ssim;
    std::size_t segment_count = 0;

    std::string to_kv() const {
        std::ostringstream os;
        os.precision(17);
        os << "segments=" << segment_count << "\narsnr_db=" << arsnr_db << "\n";
        for (std::size_t i = 0; i < rsnr_db.size(); ++i)
            os << "rsnr_db[" << i << "]=" << rsnr_db[i] << "\n";
        for (std::size_t i = 0; i < ssim.size(); ++i) os << "ssim[" << i << "]=" << ssim[i] << "\n";
        return os.str();
    }
};

struct HrReport {
    double error1_bpm = 0.0;
    double sd_bpm = 0.0;
    double pearson_r = 0.0;
    LinearFit fit;
    std::size_t window_count = 0;

    std::string to_kv() const {
        std::ostringstream os;
        os.precision(17);
        os << "windows=" << window_count << "\nerror1_bpm=" << error1_bpm
           << "\nsd_bpm=" << sd_bpm << "\npearson_r=" << pearson_r
           << "\nfit_slope=" << fit.slope << "\nfit_intercept=" << fit.intercept
           << "\nfit_r_squared=" << fit.r_squared << "\n";
        return os.str();
    }
};

}  // namespace qcs
