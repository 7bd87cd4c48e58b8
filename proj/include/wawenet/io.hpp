#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wawenet/model.hpp"

namespace wawenet {

// ---- audio files ----------------------------------------------------------
// Only RIFF/WAVE, PCM 16-bit, mono, 16 kHz is accepted; anything else is
// refused rather than resampled or converted.

struct Waveform {
    std::vector<float> samples;  // int16 / 32768, in [-1, 1)
    int sample_rate = 16000;
};

Waveform wav_read(const std::string& path);

// Round-to-nearest (ties away from zero) 16-bit PCM. Returns how many
// samples fell outside [-1, 1] and were clamped; callers decide whether to
// warn.
std::size_t wav_write(const std::string& path, const std::vector<float>& samples);

// ---- weight files ---------------------------------------------------------
// Binary format, all multi-byte fields little-endian:
//   bytes 0-3    magic "WAWE"
//   bytes 4-5    format version (u16, currently 1)
//   bytes 6-7    reserved, zero
//   bytes 8-55   f64 norm epsilon, f64 norm momentum, u64 parameter count,
//                then u32 input_channels, channels, n_targets, input_length,
//                n_sections, and four reserved zero bytes
//   then         per section: u32 pool, u32 pad_after
//   then         payload: f32 values in forward order -- for each section
//                conv weights (output-channel major, then input channel,
//                then tap), conv offsets, norm gain, norm offset, running
//                mean, running variance; finally dense weights (row major)
//                and dense offsets
//   trailing     u32 CRC-32 (zlib) of the payload bytes
// The declared parameter count covers trainable values only; the payload
// additionally carries the running statistics.

struct WeightFileInfo {
    std::uint16_t version = 0;
    std::uint32_t input_channels = 0;
    std::uint32_t channels = 0;
    std::uint32_t n_targets = 0;
    std::uint32_t input_length = 0;
    std::uint32_t n_sections = 0;
    double bn_epsilon = 0.0;
    double bn_momentum = 0.0;
    std::uint64_t parameter_count = 0;
};

void save_weights(const std::string& path, const NetF& net);
NetF load_weights(const std::string& path);
WeightFileInfo read_weight_info(const std::string& path);

// ---- manifests -------------------------------------------------------------
// Comma-separated text with a header row: path,condition,split,<target...>.
// Target columns must name registered TargetSpecs and hold values scaled to
// [-1, 1]. Paths are checked for existence at load.

enum class Split { Train, Val, Test, Unseen };

Split parse_split(const std::string& tag);
std::string split_name(Split s);

struct ManifestRecord {
    std::string path;
    std::string condition;
    Split split = Split::Train;
    std::vector<double> targets;  // aligned with Manifest::target_names
};

struct Manifest {
    std::vector<std::string> target_names;
    std::vector<ManifestRecord> records;
    double fraction(Split s) const;
};

Manifest manifest_load(const std::string& path);
void manifest_save(const std::string& path, const Manifest& m);

// Full round-trip float text (17 significant digits), shared by every
// emitter so logs and records compare bit-exactly across runs.
std::string format_real(double v);

}  // namespace wawenet
