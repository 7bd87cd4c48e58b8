#pragma once

#include <span>
#include <string>
#include <vector>

#include "wawenet/errors.hpp"

namespace wawenet {

constexpr double kSampleRate = 16000.0;
constexpr int kSegmentSamples = 48000;  // 3 s
constexpr int kSegmentHop = 24000;      // 1.5 s

// Active-speech level relative to the overload point (0 dBov = RMS of a
// full-scale square wave), plus the speech activity factor.
struct LevelReport {
    double active_level_dbov = 0.0;
    double long_run_rms_dbov = 0.0;
    double saf = 0.0;  // active samples / total samples
    long long active_count = 0;
    long long total_count = 0;
};

// Method-B style speech voltmeter: rectified signal through two cascaded
// 30 ms one-pole smoothers, activity judged against half-level thresholds
// (0, -6, -12, ... dBov) with 0.2 s hangover; the reported level comes from
// the highest threshold that keeps at least a 15.9 dB margin below the level
// it implies. Throws NoSpeech when no threshold qualifies.
LevelReport active_level(std::span<const float> x, double sample_rate = kSampleRate);

struct NormalizeResult {
    std::vector<float> samples;
    double gain = 1.0;
    double measured_dbov = 0.0;  // re-measured active level of the output
    bool clipped = false;        // |sample| > 1 somewhere (not clamped)
};

// Scales the whole signal so its active level lands on the target. Clipping
// is reported, never applied.
NormalizeResult normalize_level(std::span<const float> x, double target_dbov = -26.0);

struct Segment {
    std::vector<float> samples;  // kSegmentSamples, normalized to -26 dBov
    double start_seconds = 0.0;
    double saf = 0.0;
    double active_level_dbov = 0.0;
    double gain = 1.0;
    bool padded = false;
    bool clipped = false;
};

// Cuts 3 s windows on a 1.5 s grid, keeps windows with SAF >= 0.5, prefers
// disjoint coverage (an overlapping window is taken only when the disjoint
// alternative does not qualify), zero-pads sub-3 s input to a single window,
// and normalizes every kept segment. Throws EmptyResult when nothing
// qualifies.
std::vector<Segment> extract_segments(std::span<const float> x);

// Inverse phase augmentation: y = -x. Level and targets are unchanged.
std::vector<float> ipa(std::span<const float> x);

// A named estimation target with its native range and the full-scale width
// used for normalized error reporting.
struct TargetSpec {
    std::string name;
    double lo = 0.0;
    double hi = 0.0;
    double full_scale = 0.0;
};

const std::vector<TargetSpec>& target_registry();
const TargetSpec& find_target(const std::string& name);  // InvalidConfig if unknown

// Affine bijection [lo, hi] <-> [-1, 1].
double to_unit_range(const TargetSpec& spec, double v);    // RangeError outside [lo, hi]
double from_unit_range(const TargetSpec& spec, double u);  // RangeError outside [-1, 1]

}  // namespace wawenet
