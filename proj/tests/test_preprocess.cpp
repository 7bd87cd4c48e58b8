#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "wawenet/preprocess.hpp"

using namespace wawenet;

TEST_CASE("active level of canonical signals") {
    // full-scale square wave defines the overload point
    std::vector<float> square(48000);
    for (int i = 0; i < 48000; ++i) square[std::size_t(i)] = (i / 80) % 2 ? -1.0f : 1.0f;
    auto sq = active_level(square);
    CHECK(std::abs(sq.active_level_dbov) <= 0.2);
    CHECK(sq.saf >= 0.99);

    auto sine = testutil::tone(48000, 440.0, 1.0);
    auto sr = active_level(sine);
    CHECK(sr.active_level_dbov == doctest::Approx(-3.01).epsilon(0.07));
    CHECK(sr.saf >= 0.99);

    std::vector<float> zeros(48000, 0.0f);
    CHECK_THROWS_AS(active_level(zeros), NoSpeech);
    auto faint = testutil::tone(48000, 440.0, 1e-6);
    CHECK_THROWS_AS(active_level(faint), NoSpeech);

    std::vector<float> brief(8000, 0.5f);
    CHECK_THROWS_AS(active_level(brief), InvalidLength);
}

TEST_CASE("active level properties on speech-shaped signals") {
    Rng rng(404);
    for (int trial = 0; trial < 5; ++trial) {
        auto x = testutil::speech_like(64000, rng);
        auto r = active_level(x);
        CHECK(r.active_level_dbov >= r.long_run_rms_dbov);
        CHECK(r.saf > 0.2);
        CHECK(r.saf <= 1.0);

        // scaling the signal moves the level by exactly the applied gain
        for (double c : {0.01, 0.0316, 0.1, 0.316}) {
            std::vector<float> scaled(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = float(c * x[i]);
            auto rs = active_level(scaled);
            CHECK(std::abs(rs.active_level_dbov - r.active_level_dbov - 20.0 * std::log10(c)) <=
                  0.05);
        }
    }
}

TEST_CASE("level normalization") {
    // sine whose active level sits at -10 dBov
    const double amp = std::sqrt(2.0) * std::pow(10.0, -10.0 / 20.0);
    auto x = testutil::tone(48000, 440.0, amp);
    CHECK(active_level(x).active_level_dbov == doctest::Approx(-10.0).epsilon(0.02));

    auto n = normalize_level(x);
    CHECK(n.gain == doctest::Approx(std::pow(10.0, -16.0 / 20.0)).epsilon(0.03));
    CHECK(std::abs(n.measured_dbov - (-26.0)) <= 0.2);
    CHECK(!n.clipped);

    // near-identity when already on target
    auto again = normalize_level(n.samples);
    CHECK(again.gain >= std::pow(10.0, -0.01));
    CHECK(again.gain <= std::pow(10.0, 0.01));

    std::vector<float> zeros(48000, 0.0f);
    CHECK_THROWS_AS(normalize_level(zeros), NoSpeech);

    // an isolated spike survives scaling and is reported, not clamped
    auto quiet = testutil::tone(48000, 300.0, 0.001);
    quiet[24000] = 0.5f;
    auto big = normalize_level(quiet);
    CHECK(big.clipped);
    float peak = 0.0f;
    for (float v : big.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak > 1.0f);
}

TEST_CASE("segment extraction prefers disjoint coverage") {
    auto six = testutil::tone(96000, 220.0, 0.1);
    auto segs = extract_segments(six);
    REQUIRE(segs.size() == 2);
    CHECK(segs[0].start_seconds == 0.0);
    CHECK(segs[1].start_seconds == 3.0);
    for (const auto& s : segs) {
        CHECK(s.samples.size() == 48000);
        CHECK(std::abs(s.active_level_dbov - (-26.0)) <= 0.2);
        CHECK(s.saf >= 0.99);
        CHECK(!s.padded);
    }

    // with 7.5 s the tail window cannot land disjoint, so it half-overlaps
    auto seven5 = testutil::tone(120000, 220.0, 0.1);
    auto segs3 = extract_segments(seven5);
    REQUIRE(segs3.size() == 3);
    CHECK(segs3[0].start_seconds == 0.0);
    CHECK(segs3[1].start_seconds == 3.0);
    CHECK(segs3[2].start_seconds == 4.5);
}

TEST_CASE("segment extraction pads short input and rejects silence") {
    auto two = testutil::tone(32000, 220.0, 0.1);
    auto segs = extract_segments(two);
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].padded);
    CHECK(segs[0].samples.size() == 48000);
    CHECK(segs[0].saf == doctest::Approx(2.0 / 3.0).epsilon(0.12));
    for (std::size_t i = 32000; i < 48000; ++i) CHECK(segs[0].samples[i] == 0.0f);
    CHECK(std::abs(segs[0].active_level_dbov - (-26.0)) <= 0.2);

    std::vector<float> silence(48000, 0.0f);
    CHECK_THROWS_AS(extract_segments(silence), EmptyResult);

    // 1.2 s of activity padded to 3 s has SAF 0.4 and does not qualify
    auto brief = testutil::tone(19200, 220.0, 0.1);
    CHECK_THROWS_AS(extract_segments(brief), EmptyResult);
}

TEST_CASE("segments re-measure above the activity gate") {
    Rng rng(11);
    auto x = testutil::speech_like(160000, rng, 0.08);
    auto segs = extract_segments(x);
    REQUIRE(!segs.empty());
    double prev = -10.0;
    for (const auto& s : segs) {
        CHECK(active_level(s.samples).saf >= 0.5);
        CHECK(std::abs(s.active_level_dbov - (-26.0)) <= 0.2);
        CHECK(s.start_seconds - prev >= 1.5);  // overlap never exceeds half a window
        prev = s.start_seconds;
    }
}

TEST_CASE("inverse phase augmentation is a level-preserving involution") {
    Rng rng(31);
    auto x = testutil::speech_like(48000, rng);
    auto y = ipa(x);
    auto back = ipa(y);
    REQUIRE(back.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(back[i] == x[i]);
        CHECK(y[i] == -x[i]);
    }
    auto rx = active_level(x);
    auto ry = active_level(y);
    CHECK(rx.active_level_dbov == ry.active_level_dbov);
    CHECK(rx.saf == ry.saf);
}

TEST_CASE("target registry and scaling") {
    const struct {
        const char* name;
        double lo, hi, full_scale;
    } expected[] = {
        {"wb-pesq", 1.02, 4.64, 4.0}, {"polqa", 1.0, 4.75, 4.0},  {"pemo", 0.0, 1.0, 1.0},
        {"visqol", 1.0, 5.0, 4.0},    {"stoi", 0.45, 1.0, 1.0},   {"estoi", 0.23, 1.0, 1.0},
        {"siibgauss", 0.0, 750.0, 750.0}, {"mos", 1.0, 5.0, 4.0}, {"mos10", 0.0, 10.0, 10.0},
    };
    for (const auto& e : expected) {
        const TargetSpec& spec = find_target(e.name);
        CHECK(spec.lo == e.lo);
        CHECK(spec.hi == e.hi);
        CHECK(spec.full_scale == e.full_scale);
    }
    CHECK_THROWS_AS(find_target("mosnet"), InvalidConfig);

    const TargetSpec& pesq = find_target("wb-pesq");
    CHECK(to_unit_range(pesq, 4.64) == 1.0);
    CHECK(to_unit_range(pesq, 1.02) == -1.0);
    CHECK(std::abs(to_unit_range(pesq, 2.83)) <= 1e-12);
    CHECK(to_unit_range(find_target("siibgauss"), 375.0) == 0.0);

    CHECK_THROWS_AS(to_unit_range(pesq, 4.65), RangeError);
    CHECK_THROWS_AS(to_unit_range(pesq, 1.0), RangeError);
    CHECK_NOTHROW(to_unit_range(pesq, 4.64 + 1e-10));  // measurement jitter tolerated
    CHECK_THROWS_AS(from_unit_range(pesq, 1.5), RangeError);

    Rng rng(77);
    for (const auto& spec : target_registry()) {
        for (int i = 0; i < 10000; ++i) {
            const double v = spec.lo + (spec.hi - spec.lo) * rng.next_unit();
            CHECK(std::abs(from_unit_range(spec, to_unit_range(spec, v)) - v) <= 1e-9);
        }
    }
}
