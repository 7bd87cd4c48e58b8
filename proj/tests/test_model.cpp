#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "wawenet/model.hpp"

using namespace wawenet;

namespace {

template <typename T>
bool nets_equal(const Net<T>& a, const Net<T>& b) {
    if (a.sections.size() != b.sections.size()) return false;
    for (std::size_t i = 0; i < a.sections.size(); ++i) {
        const auto& u = a.sections[i];
        const auto& v = b.sections[i];
        for (int d = 0; d < 3; ++d)
            if (u.taps[std::size_t(d)] != v.taps[std::size_t(d)]) return false;
        if (u.offset != v.offset || u.gamma != v.gamma || u.beta != v.beta ||
            u.running_mean != v.running_mean || u.running_var != v.running_var)
            return false;
    }
    return a.head.W == b.head.W && a.head.offset == b.head.offset;
}

template <typename T>
std::int64_t count_stored_parameters(const Net<T>& net) {
    std::int64_t n = 0;
    for (const auto& s : net.sections) {
        for (const auto& t : s.taps) n += t.size();
        n += s.offset.size() + s.gamma.size() + s.beta.size();  // running stats are state
    }
    return n + net.head.W.size() + net.head.offset.size();
}

Mat<float> random_input(int channels, int length, Rng& rng) {
    Mat<float> x(channels, length);
    for (int j = 0; j < length; ++j)
        for (int c = 0; c < channels; ++c) x(c, j) = float(0.25 * rng.next_gaussian());
    return x;
}

ModelConfig miniature() {
    std::vector<SectionSpec> secs(2);
    secs[0] = {1, SectionKind::ConvA, 4, 0, 48, 12, 16000.0, 0.0625};
    secs[1] = {2, SectionKind::ConvA, 2, 0, 12, 6, 4000.0, 0.25};
    return ModelConfig::custom(1, 4, 1, 48, secs);
}

}  // namespace

TEST_CASE("parameter counts") {
    CHECK(ModelConfig::standard(1, 1).parameter_count() == 335905);
    CHECK(ModelConfig::standard(1, 11).parameter_count() == 336875);
    CHECK(ModelConfig::standard(2, 1).parameter_count() == 336193);
    CHECK(ModelConfig::standard(1, 7).parameter_count() == 336487);

    // closed form agrees with the tensors actually allocated
    auto net = build<float>(ModelConfig::standard(2, 3), 99);
    CHECK(count_stored_parameters(net) == net.config.parameter_count());
    auto mini = build<float>(miniature(), 4);
    CHECK(count_stored_parameters(mini) == mini.config.parameter_count());
}

TEST_CASE("construction is deterministic and follows the declared statistics") {
    auto a = build<float>(ModelConfig::standard(1, 1), 7);
    auto b = build<float>(ModelConfig::standard(1, 1), 7);
    auto c = build<float>(ModelConfig::standard(1, 1), 8);
    CHECK(nets_equal(a, b));
    CHECK(!nets_equal(a, c));

    for (const auto& s : a.sections) {
        CHECK(s.offset.isZero(0.0f));
        CHECK(s.beta.isZero(0.0f));
        CHECK(s.running_mean.isZero(0.0f));
        CHECK((s.gamma.array() == 1.0f).all());
        CHECK((s.running_var.array() == 1.0f).all());
    }
    CHECK(a.head.offset.isZero(0.0f));

    // weight variance tracks 2 / fan_in
    auto sample_var = [](const std::array<Mat<float>, 3>& taps) {
        double sum = 0.0, sumsq = 0.0, n = 0.0;
        for (const auto& t : taps)
            for (Eigen::Index i = 0; i < t.size(); ++i) {
                sum += t.data()[i];
                sumsq += double(t.data()[i]) * t.data()[i];
                n += 1.0;
            }
        const double mean = sum / n;
        return sumsq / n - mean * mean;
    };
    CHECK(sample_var(a.sections[0].taps) == doctest::Approx(2.0 / 3.0).epsilon(0.2));
    CHECK(sample_var(a.sections[4].taps) == doctest::Approx(2.0 / 288.0).epsilon(0.2));
}

TEST_CASE("architecture table") {
    auto d = describe(ModelConfig::standard(1, 1));
    REQUIRE(d.rows.size() == 13);

    const int l_out[13] = {12000, 6000, 3000, 750, 375, 188, 94, 47, 24, 12, 6, 3, 1};
    const int l_in_display[13] = {48000, 12000, 6000, 3000, 750, 376, 188, 94, 48, 24, 12, 6, 3};
    const double rates[13] = {16000, 4000, 2000, 1000, 250, 125, 62.5, 31.25,
                              15.625, 7.8125, 3.90625, 1.953125, 0.9765625};
    const double spacing[13] = {0.0625, 0.25, 0.5, 1, 4, 8, 16, 32, 64, 128, 256, 512, 1024};
    for (int i = 0; i < 13; ++i) {
        CHECK(d.rows[std::size_t(i)].l_out == l_out[i]);
        CHECK(d.rows[std::size_t(i)].l_in == l_in_display[i]);
        CHECK(d.rows[std::size_t(i)].rate_hz == doctest::Approx(rates[i]).epsilon(1e-12));
        CHECK(d.rows[std::size_t(i)].spacing_ms == doctest::Approx(spacing[i]).epsilon(1e-12));
    }
    CHECK(d.rows[1].kind == "Conv A-2");   // 4,000 Hz, 0.25 ms, 12,000 -> 6,000
    CHECK(d.rows[1].rate_hz == 4000.0);
    CHECK(d.rows[5].kind == "P Conv A-2");
    CHECK(d.rows[8].kind == "P Conv A-2");
    CHECK(d.rows[12].pool == 3);
    CHECK(d.rows[12].l_in == 3);
    CHECK(d.rows[12].l_out == 1);
    CHECK(d.norm_total == 2496);
    CHECK(d.conv_total + d.norm_total + d.head_params == d.total);
    CHECK(d.total == 335905);
    CHECK(d.latent_size == 96);

    const std::string text = format_description(d);
    CHECK(text.find("P Conv A-2") != std::string::npos);
    CHECK(text.find("335905") != std::string::npos);
}

TEST_CASE("forward pass basics") {
    auto net = build<float>(ModelConfig::standard(1, 3), 12);
    Rng rng(55);
    Mat<float> x = random_input(1, 48000, rng);

    Vec<float> latent;
    Vec<float> est = forward(net, x, &latent);
    CHECK(est.size() == 3);
    CHECK(latent.size() == 96);

    // bit-identical on repeat
    Vec<float> latent2;
    Vec<float> est2 = forward(net, x, &latent2);
    CHECK(est == est2);
    CHECK(latent == latent2);

    // zeros propagate to the head offset while beta stays at zero
    net.head.offset << 0.5f, -1.0f, 2.0f;
    Mat<float> zero = Mat<float>::Zero(1, 48000);
    Vec<float> zl;
    Vec<float> ze = forward(net, zero, &zl);
    CHECK(zl.isZero(0.0f));
    CHECK(ze == net.head.offset);

    Mat<float> short_input = Mat<float>::Zero(1, 47999);
    CHECK_THROWS_AS(forward(net, short_input), InvalidShape);
    Mat<float> two_ch = Mat<float>::Zero(2, 48000);
    CHECK_THROWS_AS(forward(net, two_ch), InvalidShape);
}

TEST_CASE("dual-input net with duplicated, halved first-section weights matches") {
    auto net = build<float>(ModelConfig::standard(1, 1), 31);
    Rng rng(77);
    testutil::randomize_norms(net, rng);

    Mat<float> x = random_input(1, 48000, rng);
    Vec<float> latent;
    Vec<float> est = forward(net, x, &latent);
    REQUIRE(latent.cwiseAbs().maxCoeff() > 1e-3);  // the comparison must be non-trivial

    auto dual = adapt(net, 1, 2);
    for (auto& t : dual.sections[0].taps) t *= 0.5f;
    Mat<float> x2(2, 48000);
    x2.row(0) = x.row(0);
    x2.row(1) = x.row(0);
    Vec<float> latent_dual;
    Vec<float> est_dual = forward(dual, x2, &latent_dual);

    CHECK((latent - latent_dual).cwiseAbs().maxCoeff() <= 1e-5);
    CHECK((est - est_dual).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("adapt widens by duplication") {
    auto net = build<float>(ModelConfig::standard(1, 1), 3);

    auto seven = adapt(net, 7, 1);
    CHECK(seven.head.W.rows() == 7);
    for (int r = 1; r < 7; ++r) CHECK(seven.head.W.row(r) == seven.head.W.row(0));
    CHECK(seven.config.parameter_count() == 336487);

    auto dual = adapt(net, 1, 2);
    for (const auto& t : dual.sections[0].taps) {
        REQUIRE(t.cols() == 2);
        CHECK(t.col(0) == t.col(1));
    }
    CHECK(dual.config.parameter_count() == 336193);

    auto same = adapt(net, 1, 1);
    CHECK(nets_equal(net, same));

    auto wide = adapt(net, 3, 1);
    CHECK_THROWS_AS(adapt(wide, 2, 1), InvalidConfig);
    CHECK_THROWS_AS(adapt(dual, 1, 1), InvalidConfig);
}

TEST_CASE("configuration validation") {
    CHECK_NOTHROW(ModelConfig::standard(2, 11).validate());

    auto tampered = ModelConfig::standard(1, 1);
    tampered.sections[5].pool = 4;  // no longer the published layout
    CHECK_THROWS_AS(tampered.validate(), InvalidConfig);

    auto longer = ModelConfig::standard(1, 1);
    longer.input_length = 96000;  // higher-rate front end is out of scope
    CHECK_THROWS_AS(longer.validate(), InvalidConfig);

    auto extra = ModelConfig::standard(1, 1);
    extra.sections.push_back(extra.sections.back());  // deeper pooling is out of scope
    extra.sections.back().index = 14;
    CHECK_THROWS_AS(extra.validate(), InvalidConfig);

    auto nt = ModelConfig::standard(1, 1);
    nt.n_targets = 0;
    CHECK_THROWS_AS(nt.validate(), InvalidConfig);

    // custom nets must still chain
    std::vector<SectionSpec> bad(1);
    bad[0] = {1, SectionKind::ConvA, 4, 0, 40, 10, 16000.0, 0.0625};
    CHECK_THROWS_AS(ModelConfig::custom(1, 4, 1, 48, bad), InvalidConfig);

    CHECK_NOTHROW(miniature().validate());
    CHECK(miniature().latent_size() == 24);
}
