#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "qcs/errors.hpp"
#include "qcs/metrics.hpp"
#include "qcs/signals.hpp"

namespace qcs {

// Per-window heart-rate estimates; NaN marks windows with no usable content.
struct HrTrack {
    std::vector<double> estimates_bpm;
    std::vector<double> window_start_s;
    double window_s = 8.0;
    double step_s = 2.0;
};

// Sliding-window spectral estimator: mean-detrended window, magnitude
// spectrum on a grid of at least 4096 bins, peak restricted to the
// physiological band [40, 240] BPM. Spectral ties resolve toward the
// previous window's estimate for temporal stability.
inline HrTrack estimate_bpm(const std::vector<double>& ppg, double fs, double window_s = 8.0,
                            double step_s = 2.0) {
    if (fs < 25.0) throw InvalidConfigError("estimate_bpm: sample rate must be at least 25 Hz");
    if (window_s <= 0.0 || step_s <= 0.0)
        throw InvalidConfigError("estimate_bpm: window and step must be positive");
    const std::size_t wlen = static_cast<std::size_t>(std::llround(window_s * fs));
    const std::size_t step = static_cast<std::size_t>(std::llround(step_s * fs));
    if (wlen == 0 || step == 0)
        throw InvalidConfigError("estimate_bpm: window and step must span samples");
    if (ppg.size() < wlen)
        throw DimensionError("estimate_bpm: signal shorter than one analysis window");

    std::size_t nfft = 4096;
    while (nfft < wlen) nfft *= 2;
    const double f_lo = 40.0 / 60.0, f_hi = 240.0 / 60.0;
    const std::size_t k_lo = static_cast<std::size_t>(std::ceil(f_lo * nfft / fs));
    const std::size_t k_hi = static_cast<std::size_t>(std::floor(f_hi * nfft / fs));

    HrTrack track;
    track.window_s = window_s;
    track.step_s = step_s;
    double prev_bpm = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t start = 0; start + wlen <= ppg.size(); start += step) {
        track.window_start_s.push_back(static_cast<double>(start) / fs);
        double mean = 0.0;
        for (std::size_t i = 0; i < wlen; ++i) mean += ppg[start + i];
        mean /= static_cast<double>(wlen);
        double energy = 0.0;
        for (std::size_t i = 0; i < wlen; ++i) {
            const double d = ppg[start + i] - mean;
            energy += d * d;
        }
        if (energy == 0.0) {
            track.estimates_bpm.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double best_power = -1.0, best_bpm = 0.0;
        for (std::size_t k = k_lo; k <= k_hi; ++k) {
            const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(nfft);
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < wlen; ++i) {
                const double v = ppg[start + i] - mean;
                const double ang = w * static_cast<double>(i);
                re += v * std::cos(ang);
                im -= v * std::sin(ang);
            }
            const double power = re * re + im * im;
            const double bpm = 60.0 * static_cast<double>(k) * fs / static_cast<double>(nfft);
            const bool better =
                power > best_power ||
                (power == best_power && std::isfinite(prev_bpm) &&
                 std::abs(bpm - prev_bpm) < std::abs(best_bpm - prev_bpm));
            if (better) {
                best_power = power;
                best_bpm = bpm;
            }
        }
        track.estimates_bpm.push_back(best_bpm);
        prev_bpm = best_bpm;
    }
    return track;
}

// Samples the ground-truth profile at each window centre and summarizes
// estimator accuracy. Windows with NaN estimates are excluded pairwise.
inline HrReport hr_report(const HrTrack& estimated, const BpmTrack& truth) {
    std::vector<double> reference;
    reference.reserve(estimated.window_start_s.size());
    for (double start : estimated.window_start_s)
        reference.push_back(truth.at(start + estimated.window_s / 2.0));
    const auto pairs = detail::paired_bpm(estimated.estimates_bpm, reference);
    std::vector<double> est, ref;
    est.reserve(pairs.size());
    ref.reserve(pairs.size());
    for (const auto& [e, t] : pairs) {
        est.push_back(e);
        ref.push_back(t);
    }
    HrReport report;
    report.window_count = estimated.estimates_bpm.size();
    report.error1_bpm = error1(est, ref);
    report.sd_bpm = qcs::sd_bpm(est, ref);
    report.pearson_r = pearson(est, ref);
    report.fit = linear_fit(ref, est);
    return report;
}

}  // namespace qcs
