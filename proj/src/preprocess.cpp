#include "wawenet/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace wawenet {

namespace {

constexpr int kThresholds = 17;        // 0 dBov, -6, -12, ..., about -96
constexpr double kMarginDb = 15.9;     // required gap between level and threshold
constexpr double kSmootherSeconds = 0.03;
constexpr double kHangoverSeconds = 0.2;

double power_db(double energy, double samples) { return 10.0 * std::log10(energy / samples); }

}  // namespace

LevelReport active_level(std::span<const float> x, double sample_rate) {
    if (x.size() < 16000)
        throw InvalidLength("active_level: need at least one second of audio, got " +
                            std::to_string(x.size()) + " samples");

    const double g = std::exp(-1.0 / (sample_rate * kSmootherSeconds));
    const long long hangover = (long long)std::lround(sample_rate * kHangoverSeconds);
    const long long n = (long long)x.size();

    // Rectify, smooth twice, and count per-threshold activity in one sweep.
    double energy = 0.0;
    double e1 = 0.0, e2 = 0.0;
    long long active[kThresholds] = {};
    long long hang[kThresholds];
    std::fill(hang, hang + kThresholds, hangover);
    for (long long i = 0; i < n; ++i) {
        const double v = double(x[std::size_t(i)]);
        energy += v * v;
        e1 = g * e1 + (1.0 - g) * std::abs(v);
        e2 = g * e2 + (1.0 - g) * e1;
        double threshold = 1.0;
        for (int j = 0; j < kThresholds; ++j, threshold *= 0.5) {
            if (e2 >= threshold) {
                ++active[j];
                hang[j] = 0;
            } else if (hang[j] < hangover) {
                ++active[j];
                ++hang[j];
            }
        }
    }

    // Scan from the overload threshold downward; the first threshold leaving
    // a margin of at least 15.9 dB below the level it implies wins.  The
    // reported level is interpolated between that threshold and the previous
    // one (where the margin was still short) so the measurement varies
    // continuously with signal scale instead of jumping at threshold steps.
    double threshold = 1.0;
    double prev_level = 0.0, prev_margin = 0.0;
    bool have_prev = false;
    for (int j = 0; j < kThresholds; ++j, threshold *= 0.5) {
        if (active[j] == 0) continue;
        const double level = power_db(energy, double(active[j]));
        const double margin = level - 20.0 * std::log10(threshold);
        if (margin >= kMarginDb) {
            LevelReport r;
            r.active_level_dbov = level;
            if (have_prev && margin > prev_margin) {
                const double t = (kMarginDb - prev_margin) / (margin - prev_margin);
                r.active_level_dbov = prev_level + t * (level - prev_level);
            }
            r.long_run_rms_dbov = power_db(energy, double(n));
            r.active_count = active[j];
            r.total_count = n;
            r.saf = double(active[j]) / double(n);
            return r;
        }
        prev_level = level;
        prev_margin = margin;
        have_prev = true;
    }
    throw NoSpeech("active_level: no speech activity found");
}

NormalizeResult normalize_level(std::span<const float> x, double target_dbov) {
    const LevelReport before = active_level(x);
    NormalizeResult r;
    r.gain = std::pow(10.0, (target_dbov - before.active_level_dbov) / 20.0);
    r.samples.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        r.samples[i] = float(r.gain * double(x[i]));
        if (std::abs(r.samples[i]) > 1.0f) r.clipped = true;
    }
    r.measured_dbov = active_level(r.samples).active_level_dbov;
    return r;
}

std::vector<Segment> extract_segments(std::span<const float> x) {
    std::vector<Segment> out;

    auto keep = [&](std::span<const float> window, double start_seconds, double saf, bool padded) {
        Segment seg;
        auto norm = normalize_level(window);
        seg.samples = std::move(norm.samples);
        seg.gain = norm.gain;
        seg.active_level_dbov = norm.measured_dbov;
        seg.clipped = norm.clipped;
        seg.saf = saf;
        seg.start_seconds = start_seconds;
        seg.padded = padded;
        out.push_back(std::move(seg));
    };

    if (x.size() < std::size_t(kSegmentSamples)) {
        // zero-pad the tail to one full window; padding counts as inactive
        std::vector<float> window(std::size_t(kSegmentSamples), 0.0f);
        std::copy(x.begin(), x.end(), window.begin());
        try {
            const LevelReport report = active_level(window);
            if (report.saf >= 0.5) keep(window, 0.0, report.saf, true);
        } catch (const NoSpeech&) {
        }
    } else {
        const long long grid_count = 1 + (long long)(x.size() - kSegmentSamples) / kSegmentHop;
        auto window_of = [&](long long grid) {
            const float* p = x.data() + std::size_t(grid) * kSegmentHop;
            return std::span<const float>(p, std::size_t(kSegmentSamples));
        };
        std::vector<double> saf(std::size_t(grid_count), -1.0);  // negative: silent
        for (long long t = 0; t < grid_count; ++t) {
            try {
                saf[std::size_t(t)] = active_level(window_of(t)).saf;
            } catch (const NoSpeech&) {
            }
        }
        auto ok = [&](long long t) { return saf[std::size_t(t)] >= 0.5; };

        long long last = -2;  // grid index of the last kept window
        for (long long t = 0; t < grid_count; ++t) {
            if (!ok(t)) continue;
            if (t == last + 1) {
                // Half-overlapping candidate: take it only when the disjoint
                // continuation one more hop ahead is unavailable or silent,
                // so skipping would lose coverage.
                const long long disjoint = last + 2;
                if (disjoint < grid_count && ok(disjoint)) continue;
            }
            keep(window_of(t), double(t) * kSegmentHop / kSampleRate, saf[std::size_t(t)], false);
            last = t;
        }
    }

    if (out.empty()) throw EmptyResult("extract_segments: no qualifying 3 s window");
    return out;
}

std::vector<float> ipa(std::span<const float> x) {
    std::vector<float> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = -x[i];
    return y;
}

const std::vector<TargetSpec>& target_registry() {
    static const std::vector<TargetSpec> registry{
        {"wb-pesq", 1.02, 4.64, 4.0},   {"polqa", 1.0, 4.75, 4.0},
        {"pemo", 0.0, 1.0, 1.0},        {"visqol", 1.0, 5.0, 4.0},
        {"stoi", 0.45, 1.0, 1.0},       {"estoi", 0.23, 1.0, 1.0},
        {"siibgauss", 0.0, 750.0, 750.0},
        {"mos", 1.0, 5.0, 4.0},         {"mos10", 0.0, 10.0, 10.0},
        // computable stand-in targets produced by the impairment generator
        {"seg-snr", -10.0, 35.0, 45.0}, {"frame-drop", 0.0, 1.0, 1.0},
        {"spec-dist", 0.0, 30.0, 30.0},
    };
    return registry;
}

const TargetSpec& find_target(const std::string& name) {
    for (const auto& spec : target_registry())
        if (spec.name == name) return spec;
    throw InvalidConfig("unknown target name: " + name);
}

double to_unit_range(const TargetSpec& spec, double v) {
    if (v < spec.lo - 1e-9 || v > spec.hi + 1e-9)
        throw RangeError(spec.name + " value " + std::to_string(v) + " outside [" +
                         std::to_string(spec.lo) + ", " + std::to_string(spec.hi) + "]");
    return (v - spec.lo) / (spec.hi - spec.lo) * 2.0 - 1.0;
}

double from_unit_range(const TargetSpec& spec, double u) {
    if (u < -1.0 - 1e-9 || u > 1.0 + 1e-9)
        throw RangeError(spec.name + " scaled value " + std::to_string(u) + " outside [-1, 1]");
    return (u + 1.0) / 2.0 * (spec.hi - spec.lo) + spec.lo;
}

}  // namespace wawenet
