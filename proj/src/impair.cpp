#include "wawenet/impair.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

namespace wawenet {

namespace {

constexpr int kFrameSamples = 320;  // 20 ms at 16 kHz
constexpr double kPi = 3.14159265358979323846;

long long frame_count(std::size_t n) {
    return (long long)((n + kFrameSamples - 1) / kFrameSamples);
}

}  // namespace

std::vector<float> add_noise_snr(std::span<const float> x, double snr_db, std::uint64_t seed) {
    const LevelReport report = active_level(x);
    const double speech_power = std::pow(10.0, report.active_level_dbov / 10.0);
    const double sigma = std::sqrt(speech_power * std::pow(10.0, -snr_db / 10.0));

    Rng rng(seed);
    std::vector<float> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = float(double(x[i]) + sigma * rng.next_gaussian());
    return y;
}

std::vector<double> lowpass_kernel() {
    constexpr int kTaps = 255;
    constexpr double kCutoffHz = 3400.0;
    const double fc = kCutoffHz / double(kSampleRate);  // cycles per sample
    std::vector<double> h(kTaps);
    double sum = 0.0;
    for (int k = 0; k < kTaps; ++k) {
        const int m = k - (kTaps - 1) / 2;
        const double sinc = m == 0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * m) / (kPi * m);
        const double hann = 0.5 * (1.0 - std::cos(2.0 * kPi * k / (kTaps - 1)));
        h[std::size_t(k)] = sinc * hann;
        sum += h[std::size_t(k)];
    }
    for (double& v : h) v /= sum;  // unit DC gain
    return h;
}

std::vector<float> lowpass_nb(std::span<const float> x) {
    static const std::vector<double> h = lowpass_kernel();
    const int half = int(h.size() - 1) / 2;
    const long long n = (long long)x.size();
    std::vector<float> y(x.size());
    for (long long i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < int(h.size()); ++k) {
            const long long src = i + half - k;
            if (src >= 0 && src < n) acc += h[std::size_t(k)] * double(x[std::size_t(src)]);
        }
        y[std::size_t(i)] = float(acc);
    }
    return y;
}

std::vector<float> clip_peak(std::span<const float> x, double level) {
    if (!(level > 0.0 && level <= 1.0))
        throw InvalidConfig("clip_peak: level must lie in (0, 1], got " + std::to_string(level));
    const float lim = float(level);
    std::vector<float> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::clamp(x[i], -lim, lim);
    return y;
}

std::vector<bool> drop_mask(long long frames, double rate, double burstiness, Rng& rng) {
    if (rate < 0.0 || rate > 1.0)
        throw InvalidConfig("drop_mask: rate must lie in [0, 1], got " + std::to_string(rate));
    if (burstiness < 0.0 || burstiness >= 1.0)
        throw InvalidConfig("drop_mask: burstiness must lie in [0, 1), got " +
                            std::to_string(burstiness));

    // Two-state Gilbert chain. Leaving either state is damped by (1 - b), so
    // the stationary loss probability stays `rate` while runs lengthen.
    auto bad = std::vector<bool>(std::size_t(frames));
    bool state = rng.next_unit() < rate;  // start from the stationary law
    for (long long f = 0; f < frames; ++f) {
        bad[std::size_t(f)] = state;
        const double leave = state ? (1.0 - rate) * (1.0 - burstiness)
                                   : rate * (1.0 - burstiness);
        if (rng.next_unit() < leave) state = !state;
    }
    return bad;
}

std::vector<float> drop_frames(std::span<const float> x, double rate, double burstiness,
                               std::uint64_t seed) {
    Rng rng(seed);
    const std::vector<bool> bad = drop_mask(frame_count(x.size()), rate, burstiness, rng);
    std::vector<float> y(x.begin(), x.end());
    for (std::size_t f = 0; f < bad.size(); ++f) {
        if (!bad[f]) continue;
        const std::size_t lo = f * kFrameSamples;
        const std::size_t hi = std::min(lo + kFrameSamples, y.size());
        std::fill(y.begin() + (long)lo, y.begin() + (long)hi, 0.0f);
    }
    return y;
}

ImpairResult apply_condition(std::span<const float> x, const Condition& c, std::uint64_t seed) {
    ImpairResult r;
    r.total_frames = frame_count(x.size());
    switch (c.kind) {
        case ImpairmentKind::Identity:
            r.samples.assign(x.begin(), x.end());
            break;
        case ImpairmentKind::Noise:
            r.samples = add_noise_snr(x, c.snr_db, seed);
            break;
        case ImpairmentKind::Lowpass:
            r.samples = lowpass_nb(x);
            break;
        case ImpairmentKind::Clip:
            r.samples = clip_peak(x, c.clip_level);
            break;
        case ImpairmentKind::FrameDrop: {
            Rng rng(seed);
            const std::vector<bool> bad = drop_mask(r.total_frames, c.drop_rate, c.burstiness, rng);
            r.samples.assign(x.begin(), x.end());
            for (std::size_t f = 0; f < bad.size(); ++f) {
                if (!bad[f]) continue;
                ++r.dropped_frames;
                const std::size_t lo = f * kFrameSamples;
                const std::size_t hi = std::min(lo + kFrameSamples, r.samples.size());
                std::fill(r.samples.begin() + (long)lo, r.samples.begin() + (long)hi, 0.0f);
            }
            break;
        }
    }
    return r;
}

namespace {

// Fixed 64-band magnitude filterbank over Hann-windowed 20 ms frames, used
// for the log-spectral-distortion proxy. Band centers at (k + 1/2) * 125 Hz.
constexpr int kBands = 64;

struct Filterbank {
    Eigen::MatrixXd cosm{kBands, kFrameSamples};
    Eigen::MatrixXd sinm{kBands, kFrameSamples};
    Filterbank() {
        for (int i = 0; i < kFrameSamples; ++i) {
            const double w = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (kFrameSamples - 1)));
            for (int k = 0; k < kBands; ++k) {
                const double f = (k + 0.5) * 125.0 / double(kSampleRate);
                cosm(k, i) = w * std::cos(2.0 * kPi * f * i);
                sinm(k, i) = w * std::sin(2.0 * kPi * f * i);
            }
        }
    }
};

// Band powers per whole frame, floored so ratios stay finite.
Eigen::MatrixXd band_powers(std::span<const float> x) {
    static const Filterbank fb;
    const long long frames = (long long)x.size() / kFrameSamples;
    Eigen::MatrixXd frame_mat(kFrameSamples, frames);
    for (long long f = 0; f < frames; ++f)
        for (int i = 0; i < kFrameSamples; ++i)
            frame_mat(i, f) = double(x[std::size_t(f * kFrameSamples + i)]);
    Eigen::MatrixXd p = (fb.cosm * frame_mat).array().square() +
                        (fb.sinm * frame_mat).array().square();
    return p.cwiseMax(1e-12);
}

std::vector<double> frame_powers(std::span<const float> x) {
    const long long frames = (long long)x.size() / kFrameSamples;
    auto p = std::vector<double>(std::size_t(frames));
    for (long long f = 0; f < frames; ++f) {
        double acc = 0.0;
        for (int i = 0; i < kFrameSamples; ++i) {
            const double v = double(x[std::size_t(f * kFrameSamples + i)]);
            acc += v * v;
        }
        p[std::size_t(f)] = acc / kFrameSamples;
    }
    return p;
}

}  // namespace

const std::vector<std::string>& corpus_target_names() {
    static const std::vector<std::string> names = {"seg-snr", "frame-drop", "spec-dist"};
    return names;
}

std::vector<SegmentRecord> make_corpus(const std::vector<std::vector<float>>& clean,
                                       const std::vector<Condition>& conditions,
                                       std::uint64_t seed) {
    if (clean.empty() || conditions.empty())
        throw InvalidConfig("make_corpus: need at least one segment and one condition");

    const TargetSpec& snr_spec = find_target("seg-snr");
    const TargetSpec& drop_spec = find_target("frame-drop");
    const TargetSpec& dist_spec = find_target("spec-dist");

    std::vector<SegmentRecord> out;
    out.reserve(clean.size() * conditions.size());

    for (std::size_t si = 0; si < clean.size(); ++si) {
        const std::vector<float>& c = clean[si];
        const LevelReport clean_report = active_level(c);
        const std::vector<double> clean_power = frame_powers(c);
        const Eigen::MatrixXd clean_bands = band_powers(c);

        // Speech-carrying frames: the largest set of loudest frames whose
        // mean dB power still reaches the measured active level. This keeps
        // the per-frame average consistent with the level meter regardless
        // of pause structure.
        std::vector<std::size_t> order(clean_power.size());
        for (std::size_t f = 0; f < order.size(); ++f) order[f] = f;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return clean_power[a] > clean_power[b]; });
        std::size_t kept = 1;
        double db_sum = 0.0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            db_sum += 10.0 * std::log10(std::max(clean_power[order[k]], 1e-12));
            if (db_sum / double(k + 1) >= clean_report.active_level_dbov) kept = k + 1;
        }
        std::vector<std::size_t> active(order.begin(), order.begin() + (long)kept);

        for (std::size_t ci = 0; ci < conditions.size(); ++ci) {
            const Condition& cond = conditions[ci];
            const std::uint64_t pair_seed = derive_seed(seed, std::uint64_t(ci), std::uint64_t(si));
            ImpairResult imp = apply_condition(c, cond, pair_seed);

            // Segmental SNR over speech-carrying frames, per-frame clipped.
            double snr_sum = 0.0;
            for (std::size_t f : active) {
                double err = 0.0;
                for (int i = 0; i < kFrameSamples; ++i) {
                    const std::size_t k = f * kFrameSamples + std::size_t(i);
                    const double d = double(imp.samples[k]) - double(c[k]);
                    err += d * d;
                }
                err /= kFrameSamples;
                const double snr = err == 0.0
                                       ? snr_spec.hi
                                       : 10.0 * std::log10(clean_power[f] / err);
                snr_sum += std::clamp(snr, snr_spec.lo, snr_spec.hi);
            }
            const double seg_snr = snr_sum / double(active.size());

            const double dropped = double(imp.dropped_frames) / double(imp.total_frames);

            const Eigen::MatrixXd imp_bands = band_powers(imp.samples);
            double dist_sum = 0.0;
            for (std::size_t f : active) {
                const Eigen::ArrayXd diff =
                    10.0 * (clean_bands.col((long)f).array() / imp_bands.col((long)f).array())
                              .log10();
                dist_sum += std::sqrt(diff.square().mean());
            }
            const double spec_dist =
                std::clamp(dist_sum / double(active.size()), dist_spec.lo, dist_spec.hi);

            SegmentRecord rec;
            NormalizeResult norm = normalize_level(imp.samples);
            rec.samples = std::move(norm.samples);
            const LevelReport stored = active_level(rec.samples);
            rec.saf = stored.saf;
            rec.active_level_dbov = stored.active_level_dbov;
            rec.condition = cond.id;
            rec.targets = {to_unit_range(snr_spec, seg_snr), to_unit_range(drop_spec, dropped),
                           to_unit_range(dist_spec, spec_dist)};
            out.push_back(std::move(rec));
        }
    }
    return out;
}

}  // namespace wawenet
