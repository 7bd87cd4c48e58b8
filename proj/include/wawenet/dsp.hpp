#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "wawenet/errors.hpp"

// Reference implementations of the small set of signal operations the network
// is built from, together with their adjoints (reverse-mode derivatives).
// These are written for clarity and auditability; the batched Eigen versions
// used on the hot path live in kernels.hpp and are tested against these.
//
// Conventions, used consistently everywhere:
//   * a length-3 filter is applied centered:  y[k] = h0*x[k-1] + h1*x[k] + h2*x[k+1]
//     with zero padding at both ends, so output length equals input length;
//   * reductions (sums, means, variances, dot products) accumulate in double
//     regardless of the storage scalar.

namespace wawenet {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Multichannel signal, channel-major storage: values[c * length + i].
template <typename T>
struct ChannelSignal {
    std::vector<T> values;
    int channels = 1;
    int length = 0;

    ChannelSignal() = default;
    ChannelSignal(int channels_, int length_)
        : values(std::size_t(channels_) * std::size_t(length_), T(0)),
          channels(channels_),
          length(length_) {}

    std::span<T> channel(int c) { return {values.data() + std::size_t(c) * length, std::size_t(length)}; }
    std::span<const T> channel(int c) const {
        return {values.data() + std::size_t(c) * length, std::size_t(length)};
    }
};

// One length-3 filter plus the additive offset applied after it.
template <typename T>
struct FilterKernel {
    std::array<T, 3> taps{T(0), T(0), T(0)};
    T offset = T(0);
};

// Per-channel normalization parameters with running statistics.
template <typename T>
struct NormParams {
    std::vector<T> gamma, beta, running_mean, running_var;
    double epsilon = 1e-5;
    double momentum = 0.1;

    explicit NormParams(int channels = 0)
        : gamma(channels, T(1)),
          beta(channels, T(0)),
          running_mean(channels, T(0)),
          running_var(channels, T(1)) {}

    int channels() const { return int(gamma.size()); }

    // Collapse normalization into one gain/bias pair per channel:
    //   a = gamma / sqrt(var + eps),  b = beta - a * mean.
    struct Folded {
        std::vector<T> a, b;
    };
    Folded fold() const {
        Folded f;
        f.a.resize(gamma.size());
        f.b.resize(gamma.size());
        for (std::size_t c = 0; c < gamma.size(); ++c) {
            const double a = double(gamma[c]) / std::sqrt(double(running_var[c]) + epsilon);
            f.a[c] = T(a);
            f.b[c] = T(double(beta[c]) - a * double(running_mean[c]));
        }
        return f;
    }
};

// ---------------------------------------------------------------------------
// fir_filter

template <typename T>
std::vector<T> fir_filter(std::span<const T> x, const FilterKernel<T>& k) {
    const std::ptrdiff_t n = std::ptrdiff_t(x.size());
    std::vector<T> y(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = double(k.offset);
        if (i > 0) acc += double(k.taps[0]) * double(x[i - 1]);
        acc += double(k.taps[1]) * double(x[i]);
        if (i + 1 < n) acc += double(k.taps[2]) * double(x[i + 1]);
        y[std::size_t(i)] = T(acc);
    }
    return y;
}

template <typename T>
struct FirGrad {
    std::vector<T> dx;
    std::array<T, 3> dtaps{T(0), T(0), T(0)};
    T doffset = T(0);
};

template <typename T>
FirGrad<T> fir_filter_backward(std::span<const T> x, const FilterKernel<T>& k,
                               std::span<const T> dy) {
    if (dy.size() != x.size()) throw InvalidLength("fir_filter_backward: gradient length mismatch");
    const std::ptrdiff_t n = std::ptrdiff_t(x.size());
    FirGrad<T> g;
    g.dx.assign(x.size(), T(0));
    std::array<double, 3> dtaps{0.0, 0.0, 0.0};
    double doffset = 0.0;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        // y[i] consumed x[i-1], x[i], x[i+1]; flip for the input gradient.
        double acc = double(k.taps[1]) * double(dy[i]);
        if (i + 1 < n) acc += double(k.taps[0]) * double(dy[i + 1]);
        if (i > 0) acc += double(k.taps[2]) * double(dy[i - 1]);
        g.dx[std::size_t(i)] = T(acc);

        const double d = double(dy[i]);
        if (i > 0) dtaps[0] += d * double(x[i - 1]);
        dtaps[1] += d * double(x[i]);
        if (i + 1 < n) dtaps[2] += d * double(x[i + 1]);
        doffset += d;
    }
    for (int t = 0; t < 3; ++t) g.dtaps[std::size_t(t)] = T(dtaps[std::size_t(t)]);
    g.doffset = T(doffset);
    return g;
}

// Appends `before` zeros in front of and `after` zeros behind every channel.
template <typename T>
ChannelSignal<T> pad_signal(const ChannelSignal<T>& x, int before, int after) {
    if (before < 0 || after < 0) throw InvalidLength("pad_signal: negative padding");
    ChannelSignal<T> y(x.channels, x.length + before + after);
    for (int c = 0; c < x.channels; ++c) {
        auto in = x.channel(c);
        auto out = y.channel(c);
        for (int i = 0; i < x.length; ++i) out[std::size_t(i + before)] = in[std::size_t(i)];
    }
    return y;
}

// ---------------------------------------------------------------------------
// apply_gain_bias:  y_c = a_c * x_c + b_c

template <typename T>
ChannelSignal<T> apply_gain_bias(const ChannelSignal<T>& x, std::span<const T> a,
                                 std::span<const T> b) {
    if (int(a.size()) != x.channels || int(b.size()) != x.channels)
        throw InvalidShape("apply_gain_bias: one gain and one bias per channel required");
    ChannelSignal<T> y(x.channels, x.length);
    for (int c = 0; c < x.channels; ++c) {
        auto in = x.channel(c);
        auto out = y.channel(c);
        for (int i = 0; i < x.length; ++i) out[std::size_t(i)] = a[std::size_t(c)] * in[std::size_t(i)] + b[std::size_t(c)];
    }
    return y;
}

template <typename T>
struct GainBiasGrad {
    ChannelSignal<T> dx;
    std::vector<T> da, db;
};

template <typename T>
GainBiasGrad<T> apply_gain_bias_backward(const ChannelSignal<T>& x, std::span<const T> a,
                                         const ChannelSignal<T>& dy) {
    GainBiasGrad<T> g;
    g.dx = ChannelSignal<T>(x.channels, x.length);
    g.da.assign(std::size_t(x.channels), T(0));
    g.db.assign(std::size_t(x.channels), T(0));
    for (int c = 0; c < x.channels; ++c) {
        auto xin = x.channel(c);
        auto din = dy.channel(c);
        auto dout = g.dx.channel(c);
        double da = 0.0, db = 0.0;
        for (int i = 0; i < x.length; ++i) {
            dout[std::size_t(i)] = a[std::size_t(c)] * din[std::size_t(i)];
            da += double(din[std::size_t(i)]) * double(xin[std::size_t(i)]);
            db += double(din[std::size_t(i)]);
        }
        g.da[std::size_t(c)] = T(da);
        g.db[std::size_t(c)] = T(db);
    }
    return g;
}

// ---------------------------------------------------------------------------
// hwr: half-wave rectification, y = max(x, 0)

template <typename T>
ChannelSignal<T> hwr(const ChannelSignal<T>& x) {
    ChannelSignal<T> y = x;
    for (auto& v : y.values) v = v > T(0) ? v : T(0);
    return y;
}

template <typename T>
ChannelSignal<T> hwr_backward(const ChannelSignal<T>& x, const ChannelSignal<T>& dy) {
    ChannelSignal<T> dx(x.channels, x.length);
    for (std::size_t i = 0; i < x.values.size(); ++i)
        dx.values[i] = x.values[i] > T(0) ? dy.values[i] : T(0);
    return dx;
}

// ---------------------------------------------------------------------------
// avg_pool: mean over non-overlapping blocks of m samples per channel

template <typename T>
ChannelSignal<T> avg_pool(const ChannelSignal<T>& x, int m) {
    if (m < 1) throw InvalidConfig("avg_pool: block size must be positive");
    if (x.length % m != 0)
        throw InvalidLength("avg_pool: length " + std::to_string(x.length) +
                            " not divisible by " + std::to_string(m));
    ChannelSignal<T> y(x.channels, x.length / m);
    const double inv = 1.0 / m;
    for (int c = 0; c < x.channels; ++c) {
        auto in = x.channel(c);
        auto out = y.channel(c);
        for (int j = 0; j < y.length; ++j) {
            double acc = 0.0;
            for (int t = 0; t < m; ++t) acc += double(in[std::size_t(j * m + t)]);
            out[std::size_t(j)] = T(acc * inv);
        }
    }
    return y;
}

template <typename T>
ChannelSignal<T> avg_pool_backward(int input_length, int m, const ChannelSignal<T>& dy) {
    ChannelSignal<T> dx(dy.channels, input_length);
    const T inv = T(1.0 / m);
    for (int c = 0; c < dy.channels; ++c) {
        auto din = dy.channel(c);
        auto dout = dx.channel(c);
        for (int i = 0; i < input_length; ++i) dout[std::size_t(i)] = din[std::size_t(i / m)] * inv;
    }
    return dx;
}

// ---------------------------------------------------------------------------
// dense_map: e = W v + c

template <typename T>
Vec<T> dense_map(const Vec<T>& v, const Mat<T>& W, const Vec<T>& c) {
    if (W.cols() != v.size() || W.rows() != c.size())
        throw InvalidShape("dense_map: weight matrix does not match vector sizes");
    Vec<T> e(W.rows());
    for (Eigen::Index r = 0; r < W.rows(); ++r) {
        double acc = double(c[r]);
        for (Eigen::Index j = 0; j < W.cols(); ++j) acc += double(W(r, j)) * double(v[j]);
        e[r] = T(acc);
    }
    return e;
}

template <typename T>
struct DenseGrad {
    Vec<T> dv;
    Mat<T> dW;
    Vec<T> dc;
};

template <typename T>
DenseGrad<T> dense_map_backward(const Vec<T>& v, const Mat<T>& W, const Vec<T>& de) {
    DenseGrad<T> g;
    g.dv = Vec<T>::Zero(v.size());
    g.dW = de * v.transpose();
    g.dc = de;
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        double acc = 0.0;
        for (Eigen::Index r = 0; r < W.rows(); ++r) acc += double(W(r, j)) * double(de[r]);
        g.dv[j] = T(acc);
    }
    return g;
}

// ---------------------------------------------------------------------------
// batch_norm
//
// Training mode normalizes with statistics of the current batch (biased
// variance), applies gamma/beta, and moves the running statistics toward the
// batch values:  r <- (1 - momentum) * r + momentum * batch.
// Evaluation mode is exactly apply_gain_bias with the folded parameters.

template <typename T>
struct BatchNormResult {
    std::vector<ChannelSignal<T>> y;
    std::vector<ChannelSignal<T>> xhat;  // saved for backward
    std::vector<double> mean, var;       // batch statistics per channel
};

template <typename T>
BatchNormResult<T> batch_norm_train(const std::vector<ChannelSignal<T>>& batch,
                                    NormParams<T>& params) {
    if (batch.empty()) throw InvalidShape("batch_norm: empty batch");
    const int channels = batch.front().channels;
    const int length = batch.front().length;
    if (channels != params.channels())
        throw InvalidShape("batch_norm: channel count does not match parameters");
    for (const auto& item : batch)
        if (item.channels != channels || item.length != length)
            throw InvalidShape("batch_norm: ragged batch");

    BatchNormResult<T> r;
    r.mean.resize(std::size_t(channels));
    r.var.resize(std::size_t(channels));
    const double n = double(batch.size()) * double(length);
    for (int c = 0; c < channels; ++c) {
        double sum = 0.0, sumsq = 0.0;
        for (const auto& item : batch)
            for (T v : item.channel(c)) {
                sum += double(v);
                sumsq += double(v) * double(v);
            }
        const double mean = sum / n;
        const double var = std::max(0.0, sumsq / n - mean * mean);
        r.mean[std::size_t(c)] = mean;
        r.var[std::size_t(c)] = var;
        params.running_mean[std::size_t(c)] =
            T((1.0 - params.momentum) * double(params.running_mean[std::size_t(c)]) + params.momentum * mean);
        params.running_var[std::size_t(c)] =
            T((1.0 - params.momentum) * double(params.running_var[std::size_t(c)]) + params.momentum * var);
    }

    r.y.reserve(batch.size());
    r.xhat.reserve(batch.size());
    for (const auto& item : batch) {
        ChannelSignal<T> xh(channels, length), y(channels, length);
        for (int c = 0; c < channels; ++c) {
            const double inv = 1.0 / std::sqrt(r.var[std::size_t(c)] + params.epsilon);
            const double g = double(params.gamma[std::size_t(c)]);
            const double b = double(params.beta[std::size_t(c)]);
            auto in = item.channel(c);
            auto xo = xh.channel(c);
            auto yo = y.channel(c);
            for (int i = 0; i < length; ++i) {
                const double v = (double(in[std::size_t(i)]) - r.mean[std::size_t(c)]) * inv;
                xo[std::size_t(i)] = T(v);
                yo[std::size_t(i)] = T(g * v + b);
            }
        }
        r.xhat.push_back(std::move(xh));
        r.y.push_back(std::move(y));
    }
    return r;
}

template <typename T>
std::vector<ChannelSignal<T>> batch_norm_eval(const std::vector<ChannelSignal<T>>& batch,
                                              const NormParams<T>& params) {
    auto f = params.fold();
    std::vector<ChannelSignal<T>> out;
    out.reserve(batch.size());
    for (const auto& item : batch) out.push_back(apply_gain_bias<T>(item, f.a, f.b));
    return out;
}

template <typename T>
struct BatchNormGrad {
    std::vector<ChannelSignal<T>> dx;
    std::vector<T> dgamma, dbeta;
};

template <typename T>
BatchNormGrad<T> batch_norm_backward(const BatchNormResult<T>& saved,
                                     const std::vector<ChannelSignal<T>>& dy,
                                     const NormParams<T>& params) {
    const int channels = params.channels();
    const int length = saved.xhat.front().length;
    const double n = double(dy.size()) * double(length);

    BatchNormGrad<T> g;
    g.dgamma.assign(std::size_t(channels), T(0));
    g.dbeta.assign(std::size_t(channels), T(0));
    g.dx.reserve(dy.size());
    for (const auto& item : dy) g.dx.emplace_back(item.channels, item.length);

    for (int c = 0; c < channels; ++c) {
        double sum_dy = 0.0, sum_dy_xhat = 0.0;
        for (std::size_t b = 0; b < dy.size(); ++b) {
            auto d = dy[b].channel(c);
            auto xh = saved.xhat[b].channel(c);
            for (int i = 0; i < length; ++i) {
                sum_dy += double(d[std::size_t(i)]);
                sum_dy_xhat += double(d[std::size_t(i)]) * double(xh[std::size_t(i)]);
            }
        }
        g.dgamma[std::size_t(c)] = T(sum_dy_xhat);
        g.dbeta[std::size_t(c)] = T(sum_dy);

        const double scale = double(params.gamma[std::size_t(c)]) /
                             std::sqrt(saved.var[std::size_t(c)] + params.epsilon);
        const double mean_dy = sum_dy / n;
        const double mean_dy_xhat = sum_dy_xhat / n;
        for (std::size_t b = 0; b < dy.size(); ++b) {
            auto d = dy[b].channel(c);
            auto xh = saved.xhat[b].channel(c);
            auto out = g.dx[b].channel(c);
            for (int i = 0; i < length; ++i)
                out[std::size_t(i)] = T(scale * (double(d[std::size_t(i)]) - mean_dy -
                                                 double(xh[std::size_t(i)]) * mean_dy_xhat));
        }
    }
    return g;
}

}  // namespace wawenet
