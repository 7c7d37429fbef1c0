// Command-line front end: dataset synthesis, compression to the wire format,
// recovery, metric reports, and the (M, B) sweep harness.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcs/qcs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g17(double v) { return qcs::detail::format_g17(v); }

// Runs fn(0..count) on a bounded pool; rethrows the lowest-index failure so
// behaviour is independent of scheduling.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (count == 0) return;
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    std::vector<std::thread> threads;
    threads.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
        threads.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

unsigned default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

std::string sibling_path(const std::string& path, const std::string& suffix) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size()) + suffix;
    return path + suffix;
}

// Ground-truth BPM comes from an explicit path, a bpm_true column folded into
// the dataset, or the <name>.bpm.csv sidecar the ppg synthesizer writes.
std::optional<qcs::BpmTrack> find_bpm_track(const std::string& explicit_path,
                                            const qcs::Dataset& ds,
                                            const std::string& dataset_path) {
    if (!explicit_path.empty()) return qcs::load_bpm_csv(explicit_path);
    if (ds.bpm_true) return ds.bpm_true;
    const std::string sidecar = sibling_path(dataset_path, ".bpm.csv");
    if (fs::exists(sidecar)) return qcs::load_bpm_csv(sidecar);
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Shared compression / recovery engine (used by compress, recover, sweep).
// ---------------------------------------------------------------------------

struct PipelineSettings {
    std::uint32_t n = 128;
    std::uint32_t m = 64;
    int b = 2;
    int bi = 12;
    double vref_frac = 0.70;
    std::uint64_t seed = 1;
    bool per_segment_matrix = false;
};

struct CompressedSegment {
    qcs::QuantizedPayload payload;
    double norm = 1.0;
};

struct CompressedChannel {
    std::string name;
    std::uint32_t n = 0;
    std::uint32_t source_length = 0;
    std::vector<CompressedSegment> items;
    std::size_t skipped = 0;
};

CompressedChannel compress_channel(const std::string& name, const std::vector<double>& data,
                                   int input_bits, const PipelineSettings& s) {
    if (s.m >= s.n) throw qcs::InvalidConfigError("compress: M must be below N");
    if (s.b > input_bits)
        throw qcs::InvalidConfigError("compress: B must not exceed the input bit depth");
    if (!(s.vref_frac > 0.0) || s.vref_frac > 1.0)
        throw qcs::InvalidConfigError("compress: vref fraction must lie in (0, 1]");
    const qcs::SegmentStream stream = qcs::segment_and_normalize(data, s.n, name);
    CompressedChannel out;
    out.name = name;
    out.n = s.n;
    out.source_length = stream.source_length;
    qcs::SparseBinaryMatrix shared;
    if (!s.per_segment_matrix) shared = qcs::generate_matrix(s.m, s.n, s.seed);
    for (const qcs::Segment& seg : stream.segments) {
        const qcs::SparseBinaryMatrix phi =
            s.per_segment_matrix ? qcs::generate_matrix(s.m, s.n, s.seed + seg.index + 1)
                                 : shared;
        const Eigen::VectorXd y = qcs::compress(phi, seg);
        // Reference voltage from the peak measurement magnitude: the quantizer
        // range is symmetric, so the sign of the peak must not matter.
        const double v_ref = s.vref_frac * y.cwiseAbs().maxCoeff();
        if (!(v_ref > 0.0)) {
            std::cerr << "compress: segment " << seg.index << " of channel " << name
                      << " has no measurement energy; skipping\n";
            ++out.skipped;
            continue;
        }
        const qcs::QuantizerConfig cfg(v_ref, s.b);
        CompressedSegment item;
        item.payload.header = {s.n,
                               s.m,
                               static_cast<std::uint8_t>(s.b),
                               static_cast<std::uint8_t>(input_bits),
                               v_ref,
                               phi.seed,
                               seg.index};
        item.payload.levels = qcs::quantize(y, cfg);
        item.norm = seg.norm;
        out.items.push_back(std::move(item));
    }
    return out;
}

struct RecoveredChannel {
    qcs::SegmentStream stream;
    json diagnostics = json::array();
};

RecoveredChannel recover_channel(const CompressedChannel& ch, const std::string& algo,
                                 const qcs::BdqOptions& base, unsigned jobs) {
    RecoveredChannel out;
    out.stream.segment_length = ch.n;
    out.stream.source_length = ch.source_length;
    out.stream.segments.resize(ch.items.size());
    std::vector<json> diag(ch.items.size());
    parallel_for(ch.items.size(), jobs, [&](std::size_t i) {
        const qcs::PayloadHeader& h = ch.items[i].payload.header;
        const qcs::SparseBinaryMatrix phi = qcs::generate_matrix(h.m, h.n, h.matrix_seed);
        const qcs::QuantizerConfig cfg(h.v_ref, h.bits);
        const Eigen::VectorXd z = qcs::dequantize(ch.items[i].payload.levels, cfg);
        qcs::BdqOptions opts = base;
        opts.delta = cfg.delta();
        opts.v_ref = h.v_ref;
        const qcs::RecoverResult result = (algo == "bdq") ? qcs::recover(z, phi, opts)
                                                          : qcs::recover_blind(z, phi, opts);
        qcs::Segment seg;
        seg.samples = result.x_hat;
        seg.channel = ch.name;
        seg.index = h.segment_index;
        seg.norm = ch.items[i].norm;
        out.stream.segments[i] = std::move(seg);
        diag[i] = {{"channel", ch.name},
                   {"segment", h.segment_index},
                   {"iterations", result.diagnostics.iterations},
                   {"converged", result.diagnostics.iterations < base.max_iter},
                   {"gamma", result.diagnostics.gamma_trace.empty()
                                 ? 0.0
                                 : result.diagnostics.gamma_trace.back()},
                   {"wall_time_s", result.diagnostics.wall_time_s}};
    });
    for (auto& d : diag) out.diagnostics.push_back(std::move(d));
    return out;
}

// Raw (denormalized) truth windows matched against recovered windows.
struct ChannelComparison {
    qcs::RecoveryReport report;
    std::size_t skipped_windows = 0;
};

ChannelComparison compare_channel(const std::vector<double>& truth,
                                  const std::vector<double>& recovered, std::uint32_t n) {
    ChannelComparison out;
    const std::size_t count = std::min(truth.size(), recovered.size()) / n;
    for (std::size_t sgm = 0; sgm < count; ++sgm) {
        const Eigen::Map<const Eigen::VectorXd> x(truth.data() + sgm * n, n);
        const Eigen::Map<const Eigen::VectorXd> x_hat(recovered.data() + sgm * n, n);
        try {
            out.report.rsnr_db.push_back(qcs::rsnr(x, x_hat));
            out.report.ssim.push_back(qcs::ssim_1d(x, x_hat));
        } catch (const qcs::UndefinedMetricError&) {
            ++out.skipped_windows;
        }
    }
    if (out.report.rsnr_db.empty())
        throw qcs::UndefinedMetricError("metrics: no comparable windows");
    out.report.segment_count = out.report.rsnr_db.size();
    out.report.arsnr_db = qcs::arsnr_from_rsnr(out.report.rsnr_db);
    return out;
}

// ---------------------------------------------------------------------------
// Sidecar I/O: per-segment norms and reference voltages, plus the metadata
// needed to reassemble the recovered dataset.
// ---------------------------------------------------------------------------

struct SidecarRow {
    std::string channel;
    std::uint32_t segment = 0;
    std::uint32_t source_length = 0;
    double norm = 1.0;
    double v_ref = 0.0;
};

struct Sidecar {
    double fs = 0.0;
    int bi = 12;
    std::uint32_t n = 0;
    std::vector<SidecarRow> rows;
};

void save_sidecar(const Sidecar& sc, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw qcs::IoError("sidecar: cannot open " + path);
    os << "# fs=" << g17(sc.fs) << " bi=" << sc.bi << " n=" << sc.n << "\n";
    os << "channel,segment,source_length,norm,v_ref\n";
    for (const SidecarRow& r : sc.rows)
        os << r.channel << "," << r.segment << "," << r.source_length << "," << g17(r.norm)
           << "," << g17(r.v_ref) << "\n";
    if (!os) throw qcs::IoError("sidecar: write failure on " + path);
}

Sidecar load_sidecar(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw qcs::IoError("sidecar: cannot open " + path);
    Sidecar sc;
    std::string line;
    if (!std::getline(is, line) ||
        std::sscanf(line.c_str(), "# fs=%lf bi=%d n=%u", &sc.fs, &sc.bi, &sc.n) != 3)
        throw qcs::ParseError("sidecar: malformed metadata line");
    if (!std::getline(is, line) || line != "channel,segment,source_length,norm,v_ref")
        throw qcs::ParseError("sidecar: malformed header row");
    std::size_t line_no = 2;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = qcs::detail::split_csv(line);
        if (f.size() != 5)
            throw qcs::ParseError("sidecar: ragged row on line " + std::to_string(line_no));
        SidecarRow r;
        r.channel = f[0];
        r.segment = static_cast<std::uint32_t>(qcs::detail::parse_double(f[1], line_no));
        r.source_length = static_cast<std::uint32_t>(qcs::detail::parse_double(f[2], line_no));
        r.norm = qcs::detail::parse_double(f[3], line_no);
        r.v_ref = qcs::detail::parse_double(f[4], line_no);
        sc.rows.push_back(std::move(r));
    }
    return sc;
}

std::string payload_path(const std::string& dir, const std::string& channel,
                         std::uint32_t segment) {
    return dir + "/" + channel + "_" + std::to_string(segment) + ".qcsp";
}

void write_binary(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw qcs::IoError("cannot open " + path);
    os.write(reinterpret_cast<const char*>(bytes.data()),
             static_cast<std::streamsize>(bytes.size()));
    if (!os) throw qcs::IoError("write failure on " + path);
}

std::vector<std::uint8_t> read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw qcs::IoError("cannot open " + path);
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Subcommands.
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string kind;
    std::string out;
    std::uint64_t seed = 1;
    double duration = 300.0;
    double fs = 31.75;
    std::string bpm_profile = "ramp:80:160";
    double artifact = 0.2;
    double r = 0.95;
    std::uint32_t segments = 74;
    std::uint32_t n = 128;
    int bi = 12;
};

qcs::BpmTrack parse_bpm_profile(const std::string& profile, double duration) {
    double a = 0.0, b = 0.0;
    if (std::sscanf(profile.c_str(), "ramp:%lf:%lf", &a, &b) == 2)
        return {{0.0, duration}, {a, b}};
    if (std::sscanf(profile.c_str(), "const:%lf", &a) == 1) return {{0.0, duration}, {a, a}};
    throw qcs::InvalidConfigError("synth: bpm profile must be ramp:<a>:<b> or const:<v>");
}

void cmd_synth(const SynthArgs& a) {
    if (a.kind == "ppg") {
        const qcs::BpmTrack track = parse_bpm_profile(a.bpm_profile, a.duration);
        qcs::Dataset ds = qcs::synth_ppg(a.duration, a.fs, track, a.artifact, a.seed);
        ds.input_bit_depth = a.bi;
        qcs::save_csv(ds, a.out);
        const std::string bpm_path = sibling_path(a.out, ".bpm.csv");
        qcs::save_bpm_csv(track, bpm_path);
        std::cout << "wrote " << a.out << " channels=" << ds.channel_names.size()
                  << " samples=" << ds.channels[0].size() << "\nwrote " << bpm_path << "\n";
        return;
    }
    if (a.kind == "ar1") {
        const qcs::SegmentStream stream = qcs::synth_ar1(a.r, a.n, a.segments, a.seed);
        qcs::Dataset ds;
        ds.sample_rate = a.fs;
        ds.input_bit_depth = a.bi;
        ds.channel_names = {"ar1"};
        ds.channels = {qcs::denormalize(stream)};
        qcs::save_csv(ds, a.out);
        std::cout << "wrote " << a.out << " segments=" << stream.segments.size()
                  << " samples=" << ds.channels[0].size() << "\n";
        return;
    }
    throw qcs::InvalidConfigError("synth: kind must be ppg or ar1");
}

struct CompressArgs {
    std::string in;
    std::string out;
    PipelineSettings pipe;
    int bi_override = 0;  // 0: take the dataset's input bit depth
    std::vector<std::string> channels;
};

void cmd_compress(const CompressArgs& a) {
    const qcs::Dataset ds = qcs::load_csv(a.in);
    const int input_bits = a.bi_override > 0 ? a.bi_override : ds.input_bit_depth;
    std::vector<std::string> names = a.channels.empty() ? ds.channel_names : a.channels;
    fs::create_directories(a.out);
    Sidecar sc;
    sc.fs = ds.sample_rate;
    sc.bi = input_bits;
    sc.n = a.pipe.n;
    std::size_t total = 0, skipped = 0;
    std::size_t body_bytes = 0;
    for (const std::string& name : names) {
        const CompressedChannel ch = compress_channel(name, ds.channel(name), input_bits, a.pipe);
        for (const CompressedSegment& item : ch.items) {
            write_binary(payload_path(a.out, name, item.payload.header.segment_index),
                         qcs::serialize_payload(item.payload));
            sc.rows.push_back({name, item.payload.header.segment_index, ch.source_length,
                               item.norm, item.payload.header.v_ref});
            body_bytes = (static_cast<std::size_t>(a.pipe.m) * a.pipe.b + 7) / 8;
        }
        total += ch.items.size();
        skipped += ch.skipped;
    }
    save_sidecar(sc, a.out + "/sidecar.csv");
    char cr_buf[64], crb_buf[64];
    std::snprintf(cr_buf, sizeof(cr_buf), "%.6f", qcs::compression_ratio(a.pipe.m, a.pipe.n));
    std::snprintf(crb_buf, sizeof(crb_buf), "%.6f",
                  qcs::bit_compression_ratio(a.pipe.m, a.pipe.n, a.pipe.b, input_bits));
    std::cout << "channels=" << names.size() << " segments=" << total << " skipped=" << skipped
              << "\ncr=" << cr_buf << "\ncr_b=" << crb_buf << "\nbody_bytes=" << body_bytes
              << "\n";
}

struct RecoverArgs {
    std::string in;
    std::string out;
    std::string algo = "bdq";
    double lambda = 0.001;
    int max_iter = 128;
    double tol = 1e-8;
    std::string report;
    std::string diag;
    std::string truth;
    unsigned jobs = default_jobs();
};

void cmd_recover(const RecoverArgs& a) {
    const Sidecar sc = load_sidecar(a.in + "/sidecar.csv");
    // Group rows per channel, keeping first-appearance order.
    std::vector<std::string> order;
    std::map<std::string, CompressedChannel> channels;
    for (const SidecarRow& r : sc.rows) {
        auto it = channels.find(r.channel);
        if (it == channels.end()) {
            order.push_back(r.channel);
            it = channels.emplace(r.channel, CompressedChannel{}).first;
            it->second.name = r.channel;
            it->second.n = sc.n;
            it->second.source_length = r.source_length;
        }
        const auto bytes = read_binary(payload_path(a.in, r.channel, r.segment));
        qcs::QuantizedPayload payload = qcs::parse_payload(bytes);
        const qcs::PayloadHeader& h = payload.header;
        if (h.n != sc.n || h.segment_index != r.segment ||
            std::abs(h.v_ref - r.v_ref) > 1e-9 * std::abs(r.v_ref))
            throw qcs::CorruptPayloadError("recover: header/sidecar mismatch for " + r.channel +
                                           " segment " + std::to_string(r.segment));
        channels[r.channel].items.push_back({std::move(payload), r.norm});
    }

    qcs::BdqOptions base;
    base.lambda = a.lambda;
    base.max_iter = a.max_iter;
    base.tol = a.tol;
    base.delta = 1.0;  // replaced per segment
    qcs::Dataset recovered;
    recovered.sample_rate = sc.fs;
    recovered.input_bit_depth = sc.bi;
    json diag = json::array();
    std::size_t total = 0;
    for (const std::string& name : order) {
        RecoveredChannel rc = recover_channel(channels[name], a.algo, base, a.jobs);
        recovered.channel_names.push_back(name);
        recovered.channels.push_back(qcs::denormalize(rc.stream));
        for (auto& d : rc.diagnostics) diag.push_back(std::move(d));
        total += channels[name].items.size();
    }
    qcs::save_csv(recovered, a.out);
    const std::string diag_path = a.diag.empty() ? sibling_path(a.out, ".diag.json") : a.diag;
    std::ofstream ds(diag_path);
    if (!ds) throw qcs::IoError("recover: cannot open " + diag_path);
    ds << diag.dump(2) << "\n";
    std::cout << "recovered channels=" << order.size() << " segments=" << total << " -> "
              << a.out << "\n";

    if (a.truth.empty()) return;
    const qcs::Dataset truth = qcs::load_csv(a.truth);
    std::ostringstream report;
    for (std::size_t c = 0; c < recovered.channel_names.size(); ++c) {
        const std::string& name = recovered.channel_names[c];
        const ChannelComparison cmp = compare_channel(truth.channel(name), recovered.channels[c], sc.n);
        report << "channel=" << name << "\n" << cmp.report.to_kv();
        if (cmp.skipped_windows > 0)
            report << "skipped_windows=" << cmp.skipped_windows << "\n";
    }
    if (a.report.empty()) {
        std::cout << report.str();
    } else {
        std::ofstream rs(a.report);
        if (!rs) throw qcs::IoError("recover: cannot open " + a.report);
        rs << report.str();
    }
}

struct MetricsArgs {
    std::string truth;
    std::string recovered;
    std::uint32_t n = 128;
    std::vector<std::string> channels;
    std::string bpm;
    double window_s = 8.0;
    double step_s = 2.0;
    std::string out;
};

void cmd_metrics(const MetricsArgs& a) {
    const qcs::Dataset truth = qcs::load_csv(a.truth);
    const qcs::Dataset recovered = qcs::load_csv(a.recovered);
    std::vector<std::string> names = a.channels;
    if (names.empty()) {
        for (const std::string& name : recovered.channel_names)
            for (const std::string& t : truth.channel_names)
                if (name == t) names.push_back(name);
    }
    if (names.empty()) throw qcs::InvalidConfigError("metrics: no common channels");
    std::ostringstream report;
    for (const std::string& name : names) {
        const ChannelComparison cmp =
            compare_channel(truth.channel(name), recovered.channel(name), a.n);
        report << "channel=" << name << "\n" << cmp.report.to_kv();
        if (cmp.skipped_windows > 0) report << "skipped_windows=" << cmp.skipped_windows << "\n";
    }

    const std::optional<qcs::BpmTrack> track = find_bpm_track(a.bpm, truth, a.truth);
    const bool has_ppg =
        std::find(names.begin(), names.end(), "ppg") != names.end();
    if (track && has_ppg && truth.sample_rate >= 25.0) {
        const qcs::HrTrack est_rec =
            qcs::estimate_bpm(recovered.channel("ppg"), recovered.sample_rate, a.window_s, a.step_s);
        const qcs::HrTrack est_ref =
            qcs::estimate_bpm(truth.channel("ppg"), truth.sample_rate, a.window_s, a.step_s);
        report << "hr_recovered\n" << qcs::hr_report(est_rec, *track).to_kv();
        report << "hr_reference\n" << qcs::hr_report(est_ref, *track).to_kv();
    }
    if (a.out.empty()) {
        std::cout << report.str();
    } else {
        std::ofstream os(a.out);
        if (!os) throw qcs::IoError("metrics: cannot open " + a.out);
        os << report.str();
        std::cout << "wrote " << a.out << "\n";
    }
}

struct SweepArgs {
    std::string in;
    std::string out;
    std::string channel;
    std::string bpm;
    std::vector<std::uint32_t> ms = {32, 64, 96};
    std::vector<int> bs = {2, 3, 4, 6, 8};
    std::uint32_t n = 128;
    int bi_override = 0;
    double vref_frac = 0.70;
    std::uint64_t seed = 1;
    std::vector<std::string> algos = {"bdq", "bdq-blind"};
    double lambda = 0.001;
    int max_iter = 128;
    double tol = 1e-8;
    bool per_segment_matrix = false;
    double window_s = 8.0;
    double step_s = 2.0;
    unsigned jobs = default_jobs();
};

void cmd_sweep(const SweepArgs& a) {
    qcs::Dataset ds = qcs::load_csv(a.in);
    ds.bpm_true = find_bpm_track(a.bpm, ds, a.in);
    std::string channel = a.channel;
    if (channel.empty()) {
        channel = ds.channel_names.front();
        for (const std::string& name : ds.channel_names)
            if (name == "ppg") channel = name;
    }
    const std::vector<double>& data = ds.channel(channel);
    const int input_bits = a.bi_override > 0 ? a.bi_override : ds.input_bit_depth;
    const bool hr_possible = ds.bpm_true.has_value() && ds.sample_rate >= 25.0 &&
                             static_cast<double>(data.size()) >= a.window_s * ds.sample_rate;

    std::ofstream os(a.out);
    if (!os) throw qcs::IoError("sweep: cannot open " + a.out);
    os << "algo,m,b,mb_bits,arsnr_db,ssim,error1_bpm,sd_bpm,pearson_r,status\n";
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const std::string& algo : a.algos) {
        for (const std::uint32_t m : a.ms) {
            for (const int b : a.bs) {
                double arsnr_db = nan, ssim = nan, error1_bpm = nan, sd = nan, r = nan;
                std::string status = "ok";
                try {
                    PipelineSettings pipe{a.n, m, b, input_bits, a.vref_frac, a.seed,
                                          a.per_segment_matrix};
                    const CompressedChannel compressed =
                        compress_channel(channel, data, input_bits, pipe);
                    qcs::BdqOptions base;
                    base.lambda = a.lambda;
                    base.max_iter = a.max_iter;
                    base.tol = a.tol;
                    base.delta = 1.0;  // replaced per segment
                    const RecoveredChannel rec = recover_channel(compressed, algo, base, a.jobs);
                    const std::vector<double> recovered = qcs::denormalize(rec.stream);
                    const ChannelComparison cmp = compare_channel(data, recovered, a.n);
                    arsnr_db = cmp.report.arsnr_db;
                    double ssim_sum = 0.0;
                    for (double v : cmp.report.ssim) ssim_sum += v;
                    ssim = ssim_sum / static_cast<double>(cmp.report.ssim.size());
                    if (hr_possible) {
                        const qcs::HrTrack est = qcs::estimate_bpm(recovered, ds.sample_rate,
                                                                   a.window_s, a.step_s);
                        const qcs::HrReport hr = qcs::hr_report(est, *ds.bpm_true);
                        error1_bpm = hr.error1_bpm;
                        sd = hr.sd_bpm;
                        r = hr.pearson_r;
                    }
                } catch (const qcs::Error& e) {
                    std::string msg = e.what();
                    for (char& c : msg)
                        if (c == ',' || c == '\n') c = ';';
                    status = "error: " + msg;
                }
                os << algo << "," << m << "," << b << "," << (m * static_cast<unsigned>(b))
                   << "," << g17(arsnr_db) << "," << g17(ssim) << "," << g17(error1_bpm) << ","
                   << g17(sd) << "," << g17(r) << "," << status << "\n";
                std::cerr << "sweep: " << algo << " m=" << m << " b=" << b << " " << status
                          << "\n";
            }
        }
    }
    if (!os) throw qcs::IoError("sweep: write failure on " + a.out);
    std::cout << "wrote " << a.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantized compressed sensing pipeline"};
    app.require_subcommand(1);
    app.set_config("--config");

    SynthArgs synth;
    CLI::App* s = app.add_subcommand("synth", "Generate a synthetic dataset");
    s->add_option("--kind", synth.kind, "ppg or ar1")->required();
    s->add_option("--out", synth.out, "Output CSV path")->required();
    s->add_option("--seed", synth.seed, "RNG seed");
    s->add_option("--duration", synth.duration, "Duration in seconds (ppg)");
    s->add_option("--fs", synth.fs, "Sample rate in Hz");
    s->add_option("--bpm-profile", synth.bpm_profile, "ramp:<a>:<b> or const:<v> (ppg)");
    s->add_option("--artifact", synth.artifact, "Motion artifact level (ppg)");
    s->add_option("--r", synth.r, "AR(1) correlation (ar1)");
    s->add_option("--segments", synth.segments, "Segment count (ar1)");
    s->add_option("--n", synth.n, "Segment length (ar1)");
    s->add_option("--bi", synth.bi, "Input bit depth recorded in the dataset");

    CompressArgs comp;
    CLI::App* c = app.add_subcommand("compress", "Compress a dataset into payloads");
    c->add_option("--in", comp.in, "Input dataset CSV")->required();
    c->add_option("--out", comp.out, "Output payload directory")->required();
    c->add_option("--n", comp.pipe.n, "Segment length");
    c->add_option("--m", comp.pipe.m, "Measurement count");
    c->add_option("--b", comp.pipe.b, "Quantizer bit depth");
    c->add_option("--bi", comp.bi_override, "Input bit depth override");
    c->add_option("--vref-frac", comp.pipe.vref_frac, "V_ref as a fraction of max |y|");
    c->add_option("--seed", comp.pipe.seed, "Sensing matrix seed");
    c->add_flag("--per-segment-matrix", comp.pipe.per_segment_matrix,
                "Draw a fresh sensing matrix per segment");
    c->add_option("--channel", comp.channels, "Channels to compress (default: all)")
        ->delimiter(',');

    RecoverArgs rec;
    CLI::App* r = app.add_subcommand("recover", "Recover a dataset from payloads");
    r->add_option("--in", rec.in, "Payload directory")->required();
    r->add_option("--out", rec.out, "Recovered dataset CSV")->required();
    r->add_option("--algo", rec.algo, "Recovery algorithm")
        ->check(CLI::IsMember({"bdq", "bdq-blind"}));
    r->add_option("--lambda", rec.lambda, "Noise-floor variance");
    r->add_option("--max-iter", rec.max_iter, "Iteration cap");
    r->add_option("--tol", rec.tol, "Relative convergence tolerance");
    r->add_option("--report", rec.report, "Report path (needs --truth)");
    r->add_option("--diag", rec.diag, "Diagnostics JSON path");
    r->add_option("--truth", rec.truth, "Original dataset for RSNR/SSIM reporting");
    r->add_option("--jobs", rec.jobs, "Worker pool size");

    MetricsArgs met;
    CLI::App* mt = app.add_subcommand("metrics", "Compare a recovered dataset to the original");
    mt->add_option("--truth", met.truth, "Original dataset CSV")->required();
    mt->add_option("--recovered", met.recovered, "Recovered dataset CSV")->required();
    mt->add_option("--n", met.n, "Segment length");
    mt->add_option("--channel", met.channels, "Channels (default: common)")->delimiter(',');
    mt->add_option("--bpm", met.bpm, "Ground-truth BPM CSV");
    mt->add_option("--window", met.window_s, "HR window seconds");
    mt->add_option("--step", met.step_s, "HR step seconds");
    mt->add_option("--out", met.out, "Report path (default: stdout)");

    SweepArgs sw;
    CLI::App* w = app.add_subcommand("sweep", "Run the (M, B) grid and emit a CSV");
    w->add_option("--in", sw.in, "Input dataset CSV")->required();
    w->add_option("--out", sw.out, "Output CSV path")->required();
    w->add_option("--channel", sw.channel, "Channel (default: ppg, else first)");
    w->add_option("--bpm", sw.bpm, "Ground-truth BPM CSV (default: sibling .bpm.csv)");
    w->add_option("--m", sw.ms, "Measurement counts")->delimiter(',');
    w->add_option("--b", sw.bs, "Bit depths")->delimiter(',');
    w->add_option("--n", sw.n, "Segment length");
    w->add_option("--bi", sw.bi_override, "Input bit depth override");
    w->add_option("--vref-frac", sw.vref_frac, "V_ref as a fraction of max |y|");
    w->add_option("--seed", sw.seed, "Sensing matrix seed");
    w->add_option("--algo", sw.algos, "Algorithm arms")
        ->delimiter(',')
        ->check(CLI::IsMember({"bdq", "bdq-blind"}));
    w->add_option("--lambda", sw.lambda, "Noise-floor variance");
    w->add_option("--max-iter", sw.max_iter, "Iteration cap");
    w->add_option("--tol", sw.tol, "Relative convergence tolerance");
    w->add_flag("--per-segment-matrix", sw.per_segment_matrix,
                "Draw a fresh sensing matrix per segment");
    w->add_option("--window", sw.window_s, "HR window seconds");
    w->add_option("--step", sw.step_s, "HR step seconds");
    w->add_option("--jobs", sw.jobs, "Worker pool size");

    try {
        app.parse(argc, argv);
        if (s->parsed()) cmd_synth(synth);
        if (c->parsed()) cmd_compress(comp);
        if (r->parsed()) cmd_recover(rec);
        if (mt->parsed()) cmd_metrics(met);
        if (w->parsed()) cmd_sweep(sw);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const qcs::InvalidConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const qcs::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
