#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "wawenet/io.hpp"

using namespace wawenet;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "wawenet_io_test";
    fs::create_directories(dir);
    return dir;
}

std::vector<char> slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(bool(f));
    return std::vector<char>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), std::streamsize(bytes.size()));
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::trunc);
    f << text;
}

template <typename T>
bool same_net(const Net<T>& a, const Net<T>& b) {
    if (a.sections.size() != b.sections.size()) return false;
    for (std::size_t s = 0; s < a.sections.size(); ++s) {
        const auto& x = a.sections[s];
        const auto& y = b.sections[s];
        for (int d = 0; d < 3; ++d)
            if (x.taps[std::size_t(d)] != y.taps[std::size_t(d)]) return false;
        if (x.offset != y.offset || x.gamma != y.gamma || x.beta != y.beta ||
            x.running_mean != y.running_mean || x.running_var != y.running_var)
            return false;
    }
    return a.head.W == b.head.W && a.head.offset == b.head.offset;
}

std::int16_t pcm_at(const std::vector<char>& bytes, std::size_t index) {
    std::int16_t v;
    std::memcpy(&v, bytes.data() + 44 + 2 * index, 2);
    return v;
}

}  // namespace

TEST_CASE("wav files quantize with ties away from zero") {
    const fs::path p = scratch_dir() / "quant.wav";
    const std::vector<float> x = {0.5f,          -1.0f,         3.5f / 32768.0f,
                                  -3.5f / 32768.0f, 0.0f,       1.0f,
                                  1.5f};
    CHECK(wav_write(p.string(), x) == 1);  // only 1.5 lies beyond [-1, 1]

    const auto bytes = slurp(p);
    REQUIRE(bytes.size() == 44 + 2 * x.size());
    CHECK(pcm_at(bytes, 0) == 16384);
    CHECK(pcm_at(bytes, 1) == -32768);
    CHECK(pcm_at(bytes, 2) == 4);
    CHECK(pcm_at(bytes, 3) == -4);
    CHECK(pcm_at(bytes, 4) == 0);
    CHECK(pcm_at(bytes, 5) == 32767);  // full scale saturates the 16-bit grid
    CHECK(pcm_at(bytes, 6) == 32767);

    const Waveform w = wav_read(p.string());
    CHECK(w.sample_rate == 16000);
    REQUIRE(w.samples.size() == x.size());
    CHECK(w.samples[0] == 0.5f);
    CHECK(w.samples[1] == -1.0f);
    CHECK(w.samples[4] == 0.0f);

    // quantization roundtrip on arbitrary material
    Rng rng(31);
    std::vector<float> noise(4000);
    for (auto& v : noise) v = float(0.9 * (2.0 * rng.next_unit() - 1.0));
    const fs::path p2 = scratch_dir() / "round.wav";
    CHECK(wav_write(p2.string(), noise) == 0);
    const Waveform back = wav_read(p2.string());
    REQUIRE(back.samples.size() == noise.size());
    for (std::size_t i = 0; i < noise.size(); ++i)
        CHECK(std::abs(back.samples[i] - noise[i]) <= 1.0f / 32768.0f);

    std::vector<float> silence(100, 0.0f);
    const fs::path p3 = scratch_dir() / "silence.wav";
    wav_write(p3.string(), silence);
    CHECK(wav_read(p3.string()).samples == silence);
}

TEST_CASE("wav reader refuses everything but 16 kHz mono PCM16") {
    const fs::path good = scratch_dir() / "good.wav";
    wav_write(good.string(), std::vector<float>(64, 0.25f));
    const std::vector<char> base = slurp(good);

    const auto patched = [&](std::size_t offset, std::uint32_t value, int width) {
        std::vector<char> bytes = base;
        std::memcpy(bytes.data() + offset, &value, std::size_t(width));
        const fs::path p = scratch_dir() / "patched.wav";
        spit(p, bytes);
        return p.string();
    };

    // fmt chunk fields: tag at 20, channels at 22, rate at 24, bits at 34
    CHECK_THROWS_WITH_AS((void)wav_read(patched(20, 3, 2)), doctest::Contains("encoding"),
                         UnsupportedFormat);
    CHECK_THROWS_WITH_AS((void)wav_read(patched(22, 2, 2)), doctest::Contains("channels"),
                         UnsupportedFormat);
    CHECK_THROWS_WITH_AS((void)wav_read(patched(24, 8000, 4)), doctest::Contains("8000"),
                         UnsupportedFormat);
    CHECK_THROWS_WITH_AS((void)wav_read(patched(34, 8, 2)), doctest::Contains("8-bit"),
                         UnsupportedFormat);

    const fs::path garbage = scratch_dir() / "garbage.wav";
    write_text(garbage, "this is not audio");
    CHECK_THROWS_AS((void)wav_read(garbage.string()), UnsupportedFormat);

    CHECK_THROWS_AS((void)wav_read((scratch_dir() / "missing.wav").string()), Error);
}

TEST_CASE("weight files roundtrip bit-exactly") {
    auto net = build<float>(ModelConfig::standard(1, 7), 3);
    Rng rng(12);
    testutil::randomize_norms(net, rng);

    const fs::path p = scratch_dir() / "n7.bin";
    save_weights(p.string(), net);

    const WeightFileInfo info = read_weight_info(p.string());
    CHECK(info.version == 1);
    CHECK(info.parameter_count == 336487);
    CHECK(info.channels == 96);
    CHECK(info.n_sections == 13);
    CHECK(info.n_targets == 7);
    CHECK(info.bn_epsilon == net.config.bn_epsilon);

    auto loaded = load_weights(p.string());
    CHECK(same_net(net, loaded));
    CHECK(loaded.config.table_conformant);

    // saving the loaded net reproduces the file byte for byte
    const fs::path p2 = scratch_dir() / "n7b.bin";
    save_weights(p2.string(), loaded);
    CHECK(slurp(p) == slurp(p2));
}

TEST_CASE("weight files carry free-form layouts too") {
    std::vector<SectionSpec> secs(2);
    secs[0] = {1, SectionKind::ConvA, 4, 0, 44, 11, 16000.0, 0.0625};
    secs[1] = {2, SectionKind::PConvA, 2, 1, 11, 6, 4000.0, 0.25};
    auto net = build<float>(ModelConfig::custom(1, 4, 1, 44, secs), 5);

    const fs::path p = scratch_dir() / "mini.bin";
    save_weights(p.string(), net);
    auto loaded = load_weights(p.string());
    CHECK(same_net(net, loaded));
    CHECK(!loaded.config.table_conformant);
    CHECK(loaded.config.sections[1].pad_after == 1);
    CHECK(loaded.config.sections[1].kind == SectionKind::PConvA);
}

TEST_CASE("weight files reject tampering") {
    auto net = build<float>(ModelConfig::standard(1, 1), 9);
    const fs::path p = scratch_dir() / "w.bin";
    save_weights(p.string(), net);
    const std::vector<char> base = slurp(p);
    const fs::path bad = scratch_dir() / "bad.bin";

    auto flipped = base;  // payload byte (past 56-byte header + 13*8 table)
    flipped[200] = char(flipped[200] ^ 0x10);
    spit(bad, flipped);
    CHECK_THROWS_AS((void)load_weights(bad.string()), CorruptFile);

    auto vers = base;  // version field sits at bytes 4-5
    vers[4] = 0;
    vers[5] = 0;
    spit(bad, vers);
    CHECK_THROWS_AS((void)load_weights(bad.string()), UnsupportedVersion);
    CHECK_THROWS_AS((void)read_weight_info(bad.string()), UnsupportedVersion);

    auto magic = base;
    magic[0] = 'X';
    spit(bad, magic);
    CHECK_THROWS_AS((void)load_weights(bad.string()), CorruptFile);

    auto count = base;  // declared parameter count at bytes 24-31
    count[24] = char(count[24] ^ 0x01);
    spit(bad, count);
    CHECK_THROWS_AS((void)load_weights(bad.string()), CorruptFile);

    auto crc = base;
    crc[crc.size() - 2] = char(crc[crc.size() - 2] ^ 0xFF);
    spit(bad, crc);
    CHECK_THROWS_AS((void)load_weights(bad.string()), CorruptFile);

    auto shorter = base;
    shorter.resize(shorter.size() - 10);
    spit(bad, shorter);
    CHECK_THROWS_AS((void)load_weights(bad.string()), CorruptFile);
}

TEST_CASE("manifests roundtrip and report split fractions") {
    const fs::path dir = scratch_dir() / "man";
    fs::create_directories(dir);

    Manifest m;
    m.target_names = {"mos", "seg-snr"};
    for (int i = 0; i < 10; ++i) {
        const std::string name = "seg" + std::to_string(i) + ".wav";
        wav_write((dir / name).string(), std::vector<float>(32, 0.1f));
        ManifestRecord rec;
        rec.path = name;  // relative to the manifest
        rec.condition = i % 2 ? "snr10" : "identity";
        rec.split = i < 5 ? Split::Train : (i < 9 ? Split::Test : Split::Val);
        rec.targets = {0.12345678901234567 * (i + 1) / 10.0, i == 0 ? -1.0 : 1.0 / (i + 1)};
        m.records.push_back(rec);
    }
    const fs::path mp = dir / "list.csv";
    manifest_save(mp.string(), m);

    const Manifest r = manifest_load(mp.string());
    CHECK(r.target_names == m.target_names);
    REQUIRE(r.records.size() == 10);
    CHECK(r.fraction(Split::Train) == 0.5);
    CHECK(r.fraction(Split::Test) == 0.4);
    CHECK(r.fraction(Split::Val) == 0.1);
    CHECK(r.fraction(Split::Unseen) == 0.0);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(r.records[i].targets == m.records[i].targets);  // 17 digits roundtrip exactly
        CHECK(fs::path(r.records[i].path).is_absolute());
        CHECK(fs::exists(r.records[i].path));
        CHECK(r.records[i].condition == m.records[i].condition);
    }
}

TEST_CASE("manifest loading rejects malformed records") {
    const fs::path dir = scratch_dir() / "man_err";
    fs::create_directories(dir);
    wav_write((dir / "a.wav").string(), std::vector<float>(32, 0.1f));
    const fs::path mp = dir / "m.csv";

    write_text(mp, "");
    CHECK_THROWS_AS((void)manifest_load(mp.string()), EmptyResult);

    write_text(mp, "path,condition,split,mos\n");
    CHECK_THROWS_AS((void)manifest_load(mp.string()), EmptyResult);

    write_text(mp, "path,condition,split,bogus\na.wav,c,train,0\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains("bogus"), ParseError);

    write_text(mp, "path,condition,split,mos\na.wav,c,train,0\na.wav,c,train,1.2\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains(":3"), ParseError);

    write_text(mp, "path,condition,split,mos\nnope.wav,c,train,0\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains("does not exist"),
                         ParseError);

    write_text(mp, "path,condition,split,mos\na.wav,c,eval,0\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains("split"), ParseError);

    write_text(mp, "path,condition,split,mos\na.wav,c,train\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains("columns"),
                         ParseError);

    write_text(mp, "path,condition,split,mos\na.wav,c,train,abc\n");
    CHECK_THROWS_WITH_AS((void)manifest_load(mp.string()), doctest::Contains("parse"), ParseError);

    write_text(mp, "kind,condition,split\n");
    CHECK_THROWS_AS((void)manifest_load(mp.string()), ParseError);
}
