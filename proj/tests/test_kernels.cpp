#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "wawenet/dsp.hpp"
#include "wawenet/kernels.hpp"

using namespace wawenet;
using testutil::FdProblem;

// The matrix-shaped kernels must agree with the per-channel reference
// implementations: same convolution alignment, same statistics, same
// gradients.

namespace {

template <typename T>
Mat<T> random_mat(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
    Mat<T> m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = T(scale * rng.next_gaussian());
    return m;
}

// multichannel convolution the slow way: one fir_filter per (out, in) pair
template <typename T>
Mat<T> conv3_reference(const std::array<Mat<T>, 3>& W, const Vec<T>& offset, const Mat<T>& X) {
    const Eigen::Index out_ch = W[0].rows(), L = X.cols();
    Mat<T> Y = Mat<T>::Zero(out_ch, L);
    for (Eigen::Index oc = 0; oc < out_ch; ++oc) {
        for (Eigen::Index ic = 0; ic < X.rows(); ++ic) {
            FilterKernel<T> k{{W[0](oc, ic), W[1](oc, ic), W[2](oc, ic)}, T(0)};
            auto x = std::vector<T>(std::size_t(L));
            for (Eigen::Index j = 0; j < L; ++j) x[std::size_t(j)] = X(ic, j);
            auto y = fir_filter<T>(x, k);
            for (Eigen::Index j = 0; j < L; ++j) Y(oc, j) += y[std::size_t(j)];
        }
        for (Eigen::Index j = 0; j < L; ++j) Y(oc, j) += offset[oc];
    }
    return Y;
}

}  // namespace

TEST_CASE("matrix convolution equals summed per-channel filtering") {
    Rng rng(101);
    const int in_ch = 3, out_ch = 5, L = 33;
    std::array<Mat<double>, 3> W{random_mat<double>(out_ch, in_ch, rng),
                                 random_mat<double>(out_ch, in_ch, rng),
                                 random_mat<double>(out_ch, in_ch, rng)};
    Vec<double> offset = random_mat<double>(out_ch, 1, rng);
    Mat<double> X = random_mat<double>(in_ch, L, rng);

    Mat<double> Y(out_ch, L);
    kernels::conv3<double>(W, offset, X, Y);
    Mat<double> R = conv3_reference(W, offset, X);
    CHECK((Y - R).cwiseAbs().maxCoeff() <= 1e-12);

    // and in single precision at a correspondingly looser tolerance
    std::array<Mat<float>, 3> Wf{W[0].cast<float>(), W[1].cast<float>(), W[2].cast<float>()};
    Vec<float> offf = offset.cast<float>();
    Mat<float> Xf = X.cast<float>();
    Mat<float> Yf(out_ch, L);
    kernels::conv3<float>(Wf, offf, Xf, Yf);
    Mat<float> Rf = conv3_reference(Wf, offf, Xf);
    CHECK((Yf - Rf).cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("matrix convolution gradients match finite differences") {
    Rng rng(102);
    const int in_ch = 2, out_ch = 3, L = 14;
    std::array<Mat<double>, 3> W{random_mat<double>(out_ch, in_ch, rng),
                                 random_mat<double>(out_ch, in_ch, rng),
                                 random_mat<double>(out_ch, in_ch, rng)};
    Vec<double> offset = random_mat<double>(out_ch, 1, rng);
    Mat<double> X = random_mat<double>(in_ch, L, rng);
    Mat<double> G = random_mat<double>(out_ch, L, rng);  // fixed projection

    Mat<double> dX(in_ch, L);
    kernels::conv3_grad_input<double>(W, G, dX);
    std::array<Mat<double>, 3> dW{Mat<double>::Zero(out_ch, in_ch),
                                  Mat<double>::Zero(out_ch, in_ch),
                                  Mat<double>::Zero(out_ch, in_ch)};
    Eigen::VectorXd doff = Eigen::VectorXd::Zero(out_ch);
    kernels::conv3_grad_params<double>(X, G, dW, doff);

    FdProblem p;
    p.params = {{X.data(), std::size_t(X.size())},
                {W[0].data(), std::size_t(W[0].size())},
                {W[1].data(), std::size_t(W[1].size())},
                {W[2].data(), std::size_t(W[2].size())},
                {offset.data(), std::size_t(offset.size())}};
    p.grads = {{dX.data(), std::size_t(dX.size())},
               {dW[0].data(), std::size_t(dW[0].size())},
               {dW[1].data(), std::size_t(dW[1].size())},
               {dW[2].data(), std::size_t(dW[2].size())},
               {doff.data(), std::size_t(doff.size())}};
    p.eval = [&] {
        Mat<double> Y(out_ch, L);
        kernels::conv3<double>(W, offset, X, Y);
        return double(Y.cwiseProduct(G).sum());
    };
    CHECK(testutil::fd_max_rel_err(p) <= 1e-4);
}

TEST_CASE("row statistics and normalization agree with the reference") {
    Rng rng(103);
    const int channels = 4, length = 25, items = 3;
    std::vector<ChannelSignal<float>> batch;
    for (int i = 0; i < items; ++i) {
        ChannelSignal<float> s(channels, length);
        testutil::fill_gaussian(s.values, rng);
        batch.push_back(std::move(s));
    }

    // pack the batch side by side into one matrix block
    Mat<float> big(channels, items * length);
    for (int i = 0; i < items; ++i)
        for (int c = 0; c < channels; ++c)
            for (int j = 0; j < length; ++j)
                big(c, i * length + j) = batch[std::size_t(i)].channel(c)[std::size_t(j)];

    Eigen::VectorXd mean, var;
    kernels::row_stats<float>(big, mean, var);

    NormParams<float> p(channels);
    p.gamma = {1.5f, 0.5f, -1.0f, 2.0f};
    p.beta = {0.0f, 1.0f, 0.25f, -0.5f};
    auto ref = batch_norm_train(batch, p);
    for (int c = 0; c < channels; ++c) {
        CHECK(mean[c] == doctest::Approx(ref.mean[std::size_t(c)]).epsilon(1e-9));
        CHECK(var[c] == doctest::Approx(ref.var[std::size_t(c)]).epsilon(1e-7));
    }

    Mat<float> xhat = big;
    kernels::normalize_rows<float>(xhat, mean, var, p.epsilon);
    Mat<float> y = xhat;
    Vec<float> gamma(channels), beta(channels);
    for (int c = 0; c < channels; ++c) {
        gamma[c] = p.gamma[std::size_t(c)];
        beta[c] = p.beta[std::size_t(c)];
    }
    kernels::affine_rows<float>(y, gamma, beta);
    for (int i = 0; i < items; ++i)
        for (int c = 0; c < channels; ++c)
            for (int j = 0; j < length; ++j) {
                CHECK(std::abs(xhat(c, i * length + j) -
                               ref.xhat[std::size_t(i)].channel(c)[std::size_t(j)]) <= 1e-6);
                CHECK(std::abs(y(c, i * length + j) -
                               ref.y[std::size_t(i)].channel(c)[std::size_t(j)]) <= 1e-6);
            }
}

TEST_CASE("normalization backward on matrix blocks matches the reference") {
    Rng rng(104);
    const int channels = 3, length = 11, items = 2;
    std::vector<ChannelSignal<double>> batch, upstream;
    for (int i = 0; i < items; ++i) {
        ChannelSignal<double> s(channels, length), w(channels, length);
        testutil::fill_gaussian(s.values, rng);
        testutil::fill_gaussian(w.values, rng);
        batch.push_back(std::move(s));
        upstream.push_back(std::move(w));
    }
    NormParams<double> p(channels);
    p.gamma = {1.4, 0.6, -0.8};
    p.beta = {0.1, -0.2, 0.5};
    auto saved = batch_norm_train(batch, p);
    auto ref = batch_norm_backward(saved, upstream, p);

    auto pack = [&](const std::vector<ChannelSignal<double>>& v) {
        Mat<double> m(channels, items * length);
        for (int i = 0; i < items; ++i)
            for (int c = 0; c < channels; ++c)
                for (int j = 0; j < length; ++j)
                    m(c, i * length + j) = v[std::size_t(i)].channel(c)[std::size_t(j)];
        return m;
    };
    Mat<double> xhat = pack(saved.xhat);
    Mat<double> dy = pack(upstream);
    Eigen::VectorXd var = Eigen::Map<const Eigen::VectorXd>(saved.var.data(), channels);
    Vec<double> gamma(channels);
    for (int c = 0; c < channels; ++c) gamma[c] = p.gamma[std::size_t(c)];

    Eigen::VectorXd dgamma = Eigen::VectorXd::Zero(channels);
    Eigen::VectorXd dbeta = Eigen::VectorXd::Zero(channels);
    kernels::bn_grad_rows<double>(dy, xhat, gamma, var, p.epsilon, double(items) * length, dgamma,
                                  dbeta);

    Mat<double> dx_ref = pack(ref.dx);
    CHECK((dy - dx_ref).cwiseAbs().maxCoeff() <= 1e-12);
    for (int c = 0; c < channels; ++c) {
        CHECK(dgamma[c] == doctest::Approx(double(ref.dgamma[std::size_t(c)])).epsilon(1e-10));
        CHECK(dbeta[c] == doctest::Approx(double(ref.dbeta[std::size_t(c)])).epsilon(1e-10));
    }
}

TEST_CASE("column pooling and its gradient") {
    Rng rng(105);
    Mat<float> X = random_mat<float>(3, 12, rng);
    Mat<float> Y(3, 4);
    kernels::pool_cols<float>(X, 3, Y);

    ChannelSignal<float> s(3, 12);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 12; ++j) s.channel(c)[std::size_t(j)] = X(c, j);
    auto ref = avg_pool(s, 3);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 4; ++j)
            CHECK(Y(c, j) == doctest::Approx(double(ref.channel(c)[std::size_t(j)])).epsilon(1e-6));

    Mat<float> G = random_mat<float>(3, 4, rng);
    Mat<float> dX(3, 12);
    kernels::pool_grad_cols<float>(G, 3, dX);
    for (int c = 0; c < 3; ++c)
        for (int j = 0; j < 12; ++j)
            CHECK(dX(c, j) == doctest::Approx(double(G(c, j / 3)) / 3.0).epsilon(1e-6));

    Mat<float> bad(3, 11), out(3, 5);
    CHECK_THROWS_AS(kernels::pool_cols<float>(bad, 2, out), InvalidLength);
}

TEST_CASE("rectifier gradient mask uses the pre-rectification activation") {
    Rng rng(106);
    const int channels = 2, length = 9;
    Mat<float> xhat = random_mat<float>(channels, length, rng);
    Vec<float> gamma(channels), beta(channels);
    gamma << 1.5f, -0.5f;
    beta << 0.2f, -0.1f;
    Mat<float> dy = random_mat<float>(channels, length, rng);
    Mat<float> dy_orig = dy;
    kernels::hwr_grad_rows<float>(dy, xhat, gamma, beta);
    for (int c = 0; c < channels; ++c)
        for (int j = 0; j < length; ++j) {
            const float pre = gamma[c] * xhat(c, j) + beta[c];
            CHECK(dy(c, j) == (pre > 0.0f ? dy_orig(c, j) : 0.0f));
        }
}
