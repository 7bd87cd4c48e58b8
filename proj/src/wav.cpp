#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "wawenet/errors.hpp"
#include "wawenet/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

namespace wawenet {

namespace {

struct ChunkHeader {
    char id[4];
    std::uint32_t size;
};

template <typename T>
T read_pod(std::ifstream& f, const char* what) {
    T v{};
    if (!f.read(reinterpret_cast<char*>(&v), sizeof v))
        throw UnsupportedFormat(std::string("wav_read: truncated file while reading ") + what);
    return v;
}

}  // namespace

Waveform wav_read(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("wav_read: cannot open " + path);

    char riff[4], wave[4];
    f.read(riff, 4);
    auto total = read_pod<std::uint32_t>(f, "RIFF size");
    (void)total;
    f.read(wave, 4);
    if (!f || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0)
        throw UnsupportedFormat("wav_read: " + path + " is not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::vector<float> samples;
    bool have_data = false;

    while (!have_data) {
        ChunkHeader ch{};
        if (!f.read(reinterpret_cast<char*>(&ch), sizeof ch)) break;
        if (std::memcmp(ch.id, "fmt ", 4) == 0) {
            format = read_pod<std::uint16_t>(f, "format tag");
            channels = read_pod<std::uint16_t>(f, "channel count");
            rate = read_pod<std::uint32_t>(f, "sample rate");
            (void)read_pod<std::uint32_t>(f, "byte rate");
            (void)read_pod<std::uint16_t>(f, "block align");
            bits = read_pod<std::uint16_t>(f, "bit depth");
            if (ch.size > 16) f.seekg(ch.size - 16 + (ch.size & 1), std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(ch.id, "data", 4) == 0) {
            if (!have_fmt) throw UnsupportedFormat("wav_read: data chunk before fmt in " + path);
            const std::size_t count = ch.size / 2;
            std::vector<std::int16_t> raw(count);
            if (!f.read(reinterpret_cast<char*>(raw.data()), std::streamsize(ch.size)))
                throw UnsupportedFormat("wav_read: truncated data chunk in " + path);
            samples.resize(count);
            for (std::size_t i = 0; i < count; ++i) samples[i] = float(raw[i]) / 32768.0f;
            have_data = true;
        } else {
            f.seekg(ch.size + (ch.size & 1), std::ios::cur);
        }
    }

    if (!have_fmt || !have_data)
        throw UnsupportedFormat("wav_read: missing fmt or data chunk in " + path);
    if (format != 1)
        throw UnsupportedFormat("wav_read: " + path + " uses encoding tag " +
                                std::to_string(format) + "; only PCM (1) is supported");
    if (channels != 1)
        throw UnsupportedFormat("wav_read: " + path + " has " + std::to_string(channels) +
                                " channels; only mono is supported");
    if (bits != 16)
        throw UnsupportedFormat("wav_read: " + path + " has " + std::to_string(bits) +
                                "-bit samples; only 16-bit is supported");
    if (rate != 16000)
        throw UnsupportedFormat("wav_read: " + path + " is sampled at " + std::to_string(rate) +
                                " Hz; only 16000 Hz is supported");

    Waveform w;
    w.samples = std::move(samples);
    w.sample_rate = int(rate);
    return w;
}

std::size_t wav_write(const std::string& path, const std::vector<float>& samples) {
    std::vector<std::int16_t> raw(samples.size());
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (std::abs(samples[i]) > 1.0f) ++clamped;
        const long q = std::lround(double(samples[i]) * 32768.0);  // ties away from zero
        raw[i] = std::int16_t(std::min(32767L, std::max(-32768L, q)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("wav_write: cannot open " + path);

    const std::uint32_t data_bytes = std::uint32_t(raw.size() * 2);
    const std::uint32_t riff_bytes = 36 + data_bytes;
    const std::uint16_t u16_one = 1, u16_two = 2, u16_sixteen = 16;
    const std::uint32_t rate = 16000, byte_rate = 32000, fmt_size = 16;

    f.write("RIFF", 4);
    f.write(reinterpret_cast<const char*>(&riff_bytes), 4);
    f.write("WAVE", 4);
    f.write("fmt ", 4);
    f.write(reinterpret_cast<const char*>(&fmt_size), 4);
    f.write(reinterpret_cast<const char*>(&u16_one), 2);      // PCM
    f.write(reinterpret_cast<const char*>(&u16_one), 2);      // mono
    f.write(reinterpret_cast<const char*>(&rate), 4);
    f.write(reinterpret_cast<const char*>(&byte_rate), 4);
    f.write(reinterpret_cast<const char*>(&u16_two), 2);      // block align
    f.write(reinterpret_cast<const char*>(&u16_sixteen), 2);  // bits
    f.write("data", 4);
    f.write(reinterpret_cast<const char*>(&data_bytes), 4);
    f.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(data_bytes));
    if (!f) throw Error("wav_write: write failed for " + path);
    return clamped;
}

}  // namespace wawenet
