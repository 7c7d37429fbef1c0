#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcs/errors.hpp"
#include "qcs/rng.hpp"
#include "qcs/sensing.hpp"

namespace qcs {

// Piecewise-linear ground-truth heart-rate profile.
struct BpmTrack {
    std::vector<double> time_s;
    std::vector<double> bpm;

    void validate() const {
        if (time_s.size() != bpm.size() || time_s.empty())
            throw InvalidConfigError("BpmTrack: needs matching non-empty columns");
        for (std::size_t i = 1; i < time_s.size(); ++i)
            if (time_s[i] <= time_s[i - 1])
                throw InvalidConfigError("BpmTrack: timestamps must increase");
        for (double b : bpm)
            if (b < 40.0 || b > 240.0)
                throw InvalidConfigError("BpmTrack: BPM outside [40, 240]");
    }

    double at(double t) const {
        if (t <= time_s.front()) return bpm.front();
        if (t >= time_s.back()) return bpm.back();
        const auto it = std::upper_bound(time_s.begin(), time_s.end(), t);
        const std::size_t hi = static_cast<std::size_t>(it - time_s.begin());
        const std::size_t lo = hi - 1;
        const double w = (t - time_s[lo]) / (time_s[hi] - time_s[lo]);
        return bpm[lo] + w * (bpm[hi] - bpm[lo]);
    }
};

// Multichannel sampled recording.
struct Dataset {
    std::vector<std::string> channel_names;
    std::vector<std::vector<double>> channels;
    double sample_rate = 0.0;
    int input_bit_depth = 12;
    std::optional<BpmTrack> bpm_true;

    const std::vector<double>& channel(const std::string& name) const {
        for (std::size_t i = 0; i < channel_names.size(); ++i)
            if (channel_names[i] == name) return channels[i];
        throw InvalidConfigError("Dataset: no channel named " + name);
    }
};

// Fixed-length unit-norm windows of one channel plus what is needed to
// reassemble it: the retained length and per-segment norms. Zero-norm
// windows are skipped (their samples are all zero, so reassembly still
// reproduces the channel exactly).
struct SegmentStream {
    std::uint32_t segment_length = 0;
    std::uint32_t source_length = 0;  // retained prefix, a multiple of segment_length
    std::vector<Segment> segments;
};

inline SegmentStream segment_and_normalize(const std::vector<double>& channel, std::uint32_t n,
                                           const std::string& channel_name = "") {
    if (n == 0) throw InvalidConfigError("segment_and_normalize: N must be positive");
    if (channel.size() < n)
        throw DimensionError("segment_and_normalize: channel shorter than one segment");
    SegmentStream out;
    out.segment_length = n;
    const std::uint32_t count = static_cast<std::uint32_t>(channel.size() / n);
    out.source_length = count * n;
    for (std::uint32_t s = 0; s < count; ++s) {
        Segment seg;
        seg.samples = Eigen::Map<const Eigen::VectorXd>(channel.data() + std::size_t{s} * n, n);
        seg.channel = channel_name;
        seg.index = s;
        seg.norm = seg.samples.norm();
        if (seg.norm == 0.0) {
            std::cerr << "segment_and_normalize: skipping zero-norm segment " << s << "\n";
            continue;
        }
        seg.samples /= seg.norm;
        out.segments.push_back(std::move(seg));
    }
    return out;
}

inline std::vector<double> denormalize(const SegmentStream& stream) {
    std::vector<double> out(stream.source_length, 0.0);
    for (const Segment& seg : stream.segments) {
        const std::size_t offset = std::size_t{seg.index} * stream.segment_length;
        for (std::uint32_t i = 0; i < stream.segment_length; ++i)
            out[offset + i] = seg.samples[i] * seg.norm;
    }
    return out;
}

// Independent stationary AR(1) Gaussian paths, one per segment, unit-normalized.
inline SegmentStream synth_ar1(double r, std::uint32_t n, std::uint32_t count,
                               std::uint64_t seed) {
    if (std::abs(r) >= 1.0) throw InvalidConfigError("synth_ar1: |r| must be below 1");
    if (n == 0 || count == 0) throw InvalidConfigError("synth_ar1: empty request");
    Rng rng(seed);
    const double innovation = std::sqrt(1.0 - r * r);
    SegmentStream out;
    out.segment_length = n;
    out.source_length = n * count;
    for (std::uint32_t s = 0; s < count; ++s) {
        Segment seg;
        seg.samples.resize(n);
        seg.samples[0] = rng.normal();
        for (std::uint32_t i = 1; i < n; ++i)
            seg.samples[i] = r * seg.samples[i - 1] + innovation * rng.normal();
        seg.channel = "ar1";
        seg.index = s;
        seg.norm = seg.samples.norm();
        seg.samples /= seg.norm;
        out.segments.push_back(std::move(seg));
    }
    return out;
}

// Synthetic wrist PPG with three harmonics, a band-limited motion artifact
// shared with the accelerometer channels, and 30 dB white noise.
inline Dataset synth_ppg(double duration_s, double fs, const BpmTrack& bpm_track,
                         double artifact_level, std::uint64_t seed) {
    if (fs < 25.0) throw InvalidConfigError("synth_ppg: sample rate must be at least 25 Hz");
    if (duration_s <= 0.0) throw InvalidConfigError("synth_ppg: duration must be positive");
    if (artifact_level < 0.0) throw InvalidConfigError("synth_ppg: artifact level must be >= 0");
    bpm_track.validate();

    const std::size_t samples = static_cast<std::size_t>(std::llround(duration_s * fs));
    Rng rng(seed);
    const double harmonic_amp[3] = {1.0, 0.4, 0.15};
    double harmonic_phase[3];
    for (double& p : harmonic_phase) p = 2.0 * M_PI * rng.uniform01();

    constexpr int kTones = 8;
    double tone_freq[kTones], tone_phase[kTones], tone_weight[4][kTones];
    for (int j = 0; j < kTones; ++j) {
        tone_freq[j] = 0.3 + 3.7 * rng.uniform01();
        tone_phase[j] = 2.0 * M_PI * rng.uniform01();
        for (int ch = 0; ch < 4; ++ch) tone_weight[ch][j] = 0.5 + 0.5 * rng.uniform01();
    }

    std::vector<double> pulse(samples), artifact[4];
    for (auto& a : artifact) a.resize(samples);
    double phase = 0.0;
    double pulse_power = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / fs;
        double v = 0.0;
        for (int h = 0; h < 3; ++h)
            v += harmonic_amp[h] * std::sin((h + 1) * phase + harmonic_phase[h]);
        pulse[i] = v;
        pulse_power += v * v;
        phase += 2.0 * M_PI * (bpm_track.at(t) / 60.0) / fs;
        for (int ch = 0; ch < 4; ++ch) {
            double a = 0.0;
            for (int j = 0; j < kTones; ++j)
                a += tone_weight[ch][j] * std::sin(2.0 * M_PI * tone_freq[j] * t + tone_phase[j]);
            artifact[ch][i] = a;
        }
    }
    const double pulse_rms = std::sqrt(pulse_power / static_cast<double>(samples));
    for (int ch = 0; ch < 4; ++ch) {
        double p = 0.0;
        for (double v : artifact[ch]) p += v * v;
        const double scale = 1.0 / std::sqrt(p / static_cast<double>(samples));
        for (double& v : artifact[ch]) v *= scale;
    }

    Dataset out;
    out.sample_rate = fs;
    out.input_bit_depth = 12;
    out.bpm_true = bpm_track;
    out.channel_names = {"ppg", "ax", "ay", "az"};
    out.channels.assign(4, std::vector<double>(samples));
    const double artifact_rms = artifact_level * pulse_rms;
    for (std::size_t i = 0; i < samples; ++i)
        out.channels[0][i] = pulse[i] + artifact_rms * artifact[0][i];
    double signal_power = 0.0;
    for (double v : out.channels[0]) signal_power += v * v;
    const double noise_std =
        std::sqrt(signal_power / static_cast<double>(samples)) * std::pow(10.0, -30.0 / 20.0);
    for (std::size_t i = 0; i < samples; ++i) out.channels[0][i] += noise_std * rng.normal();
    for (int ch = 1; ch < 4; ++ch)
        for (std::size_t i = 0; i < samples; ++i)
            out.channels[ch][i] = artifact_rms * artifact[ch][i];
    return out;
}

// Keeps every factor-th sample. Intentionally applies no anti-alias filter.
inline std::vector<double> decimate(const std::vector<double>& channel, std::uint32_t factor) {
    if (factor < 1) throw InvalidConfigError("decimate: factor must be at least 1");
    std::vector<double> out;
    out.reserve((channel.size() + factor - 1) / factor);
    for (std::size_t i = 0; i < channel.size(); i += factor) out.push_back(channel[i]);
    return out;
}

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double parse_double(const std::string& field, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ParseError("csv: bad numeric field on line " + std::to_string(line_no));
    }
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    return out;
}

}  // namespace detail

// Dataset CSV: `# fs=<Hz> bi=<bits>`, channel-name row, then numeric rows.
inline void save_csv(const Dataset& data, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_csv: cannot open " + path);
    os << "# fs=" << detail::format_g17(data.sample_rate) << " bi=" << data.input_bit_depth
       << "\n";
    for (std::size_t c = 0; c < data.channel_names.size(); ++c)
        os << data.channel_names[c] << (c + 1 < data.channel_names.size() ? "," : "\n");
    const std::size_t rows = data.channels.empty() ? 0 : data.channels[0].size();
    for (const auto& ch : data.channels)
        if (ch.size() != rows) throw InvalidConfigError("save_csv: unequal channel lengths");
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < data.channels.size(); ++c)
            os << detail::format_g17(data.channels[c][i]) << (c + 1 < data.channels.size() ? "," : "\n");
    }
    if (!os) throw IoError("save_csv: write failure on " + path);
}

inline Dataset load_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(is, line)) throw ParseError("csv: empty file " + path);
    Dataset out;
    if (std::sscanf(line.c_str(), "# fs=%lf bi=%d", &out.sample_rate, &out.input_bit_depth) != 2)
        throw ParseError("csv: malformed metadata line 1");
    if (out.sample_rate <= 0.0) throw ParseError("csv: non-positive sample rate");
    if (!std::getline(is, line)) throw ParseError("csv: missing channel-name row");
    out.channel_names = detail::split_csv(line);
    if (out.channel_names.empty()) throw ParseError("csv: no channels on line 2");
    out.channels.assign(out.channel_names.size(), {});
    std::size_t line_no = 2;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != out.channel_names.size())
            throw ParseError("csv: ragged row on line " + std::to_string(line_no));
        for (std::size_t c = 0; c < fields.size(); ++c)
            out.channels[c].push_back(detail::parse_double(fields[c], line_no));
    }
    // A column named bpm_true is folded into the ground-truth track.
    for (std::size_t c = 0; c < out.channel_names.size(); ++c) {
        if (out.channel_names[c] != "bpm_true") continue;
        BpmTrack track;
        for (std::size_t i = 0; i < out.channels[c].size(); ++i) {
            track.time_s.push_back(static_cast<double>(i) / out.sample_rate);
            track.bpm.push_back(out.channels[c][i]);
        }
        out.bpm_true = std::move(track);
        out.channel_names.erase(out.channel_names.begin() + static_cast<std::ptrdiff_t>(c));
        out.channels.erase(out.channels.begin() + static_cast<std::ptrdiff_t>(c));
        break;
    }
    return out;
}

// Two-column (time_s, bpm) CSV used for ground truth and estimator output.
inline void save_bpm_csv(const BpmTrack& track, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("save_bpm_csv: cannot open " + path);
    os << "time_s,bpm\n";
    for (std::size_t i = 0; i < track.time_s.size(); ++i)
        os << detail::format_g17(track.time_s[i]) << "," << detail::format_g17(track.bpm[i])
           << "\n";
    if (!os) throw IoError("save_bpm_csv: write failure on " + path);
}

inline BpmTrack load_bpm_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_bpm_csv: cannot open " + path);
    std::string line;
    BpmTrack track;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1 && line == "time_s,bpm") continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 2)
            throw ParseError("bpm csv: expected two columns on line " + std::to_string(line_no));
        track.time_s.push_back(detail::parse_double(fields[0], line_no));
        track.bpm.push_back(detail::parse_double(fields[1], line_no));
    }
    return track;
}

}  // namespace qcs
