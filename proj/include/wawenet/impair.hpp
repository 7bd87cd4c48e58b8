#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wawenet/preprocess.hpp"
#include "wawenet/rng.hpp"

namespace wawenet {

// Synthetic degradations plus the proxy quality targets computed from them.

enum class ImpairmentKind { Identity, Noise, Lowpass, Clip, FrameDrop };

struct Condition {
    std::string id;
    ImpairmentKind kind = ImpairmentKind::Identity;
    double snr_db = 0.0;       // Noise
    double clip_level = 1.0;   // Clip, in (0, 1]
    double drop_rate = 0.0;    // FrameDrop, in [0, 1]
    double burstiness = 0.0;   // FrameDrop, in [0, 1)
};

// White Gaussian noise scaled so active-speech power over noise power hits
// snr_db. Deterministic for a given seed.
std::vector<float> add_noise_snr(std::span<const float> x, double snr_db, std::uint64_t seed);

// 255-tap Hann windowed-sinc lowpass, 3.4 kHz cutoff at 16 kHz, linear phase
// with the 127-sample delay removed.
std::vector<float> lowpass_nb(std::span<const float> x);
std::vector<double> lowpass_kernel();

// Elementwise clamp to [-level, +level].
std::vector<float> clip_peak(std::span<const float> x, double level);

// Frame-loss pattern from a two-state Gilbert chain with stationary loss
// probability `rate`; burstiness 0 makes losses independent.
std::vector<bool> drop_mask(long long frames, double rate, double burstiness, Rng& rng);

// Zero out 20 ms frames per drop_mask. Deterministic for a given seed.
std::vector<float> drop_frames(std::span<const float> x, double rate, double burstiness,
                               std::uint64_t seed);

struct ImpairResult {
    std::vector<float> samples;
    long long dropped_frames = 0;
    long long total_frames = 0;
};

ImpairResult apply_condition(std::span<const float> x, const Condition& c, std::uint64_t seed);

struct SegmentRecord {
    std::vector<float> samples;  // impaired, re-normalized to -26 dBov
    double saf = 0.0;
    double active_level_dbov = 0.0;
    std::string condition;
    std::vector<double> targets;  // scaled to [-1, 1], order = corpus_target_names()
};

// Names of the proxy targets carried by corpus records, in vector order.
const std::vector<std::string>& corpus_target_names();

// Cross every clean segment (already at -26 dBov) with every condition.
// Each record gets a per-pair derived seed, proxy targets computed against
// the clean original, and storage samples re-normalized to -26 dBov.
// Conditions must leave measurable speech behind (NoSpeech propagates).
std::vector<SegmentRecord> make_corpus(const std::vector<std::vector<float>>& clean,
                                       const std::vector<Condition>& conditions,
                                       std::uint64_t seed);

}  // namespace wawenet
