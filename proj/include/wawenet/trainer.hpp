#pragma once

#include <Eigen/Core>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "wawenet/model.hpp"
#include "wawenet/preprocess.hpp"

// Gradient-descent fitting of the estimator: a reverse-mode pass over the
// batched network, Adam updates on a flattened parameter vector, a
// plateau-driven learning-rate schedule, and the error/correlation metrics
// used to judge the result.
//
// Every reduction that crosses batch items folds per-item partial results in
// item order, so a run's numbers do not depend on the thread count, and the
// same seed reproduces the same training log bit for bit.

namespace wawenet {

namespace detail {

struct Range {
    int begin = 0;
    int end = 0;
};

inline std::vector<Range> split_ranges(int n, int threads) {
    const int k = std::max(1, std::min(threads, std::max(n, 1)));
    std::vector<Range> out;
    out.reserve(std::size_t(k));
    int at = 0;
    for (int i = 0; i < k; ++i) {
        const int take = (n - at) / (k - i);
        out.push_back({at, at + take});
        at += take;
    }
    return out;
}

template <typename F>
void run_ranges(const std::vector<Range>& ranges, F&& fn) {
    if (ranges.size() == 1) {
        fn(ranges[0]);
        return;
    }
    std::vector<std::thread> crew;
    crew.reserve(ranges.size() - 1);
    for (std::size_t i = 1; i < ranges.size(); ++i)
        crew.emplace_back([&fn, &ranges, i] { fn(ranges[i]); });
    fn(ranges[0]);
    for (auto& t : crew) t.join();
}

}  // namespace detail

// Trainable parameters in one flat vector: per section the conv weights
// (output channel, then input channel, then tap), the conv offsets, gamma,
// beta; then the dense head row by row and its offsets. Running statistics are
// state, not parameters, and are not included.
template <typename T>
Vec<T> flatten_params(const Net<T>& net) {
    Vec<T> out(net.config.parameter_count());
    Eigen::Index at = 0;
    for (const auto& w : net.sections) {
        const Eigen::Index C = w.gamma.size(), ci = w.taps[0].cols();
        for (Eigen::Index oc = 0; oc < C; ++oc)
            for (Eigen::Index ic = 0; ic < ci; ++ic)
                for (std::size_t d = 0; d < 3; ++d) out[at++] = w.taps[d](oc, ic);
        for (Eigen::Index c = 0; c < C; ++c) out[at++] = w.offset[c];
        for (Eigen::Index c = 0; c < C; ++c) out[at++] = w.gamma[c];
        for (Eigen::Index c = 0; c < C; ++c) out[at++] = w.beta[c];
    }
    for (Eigen::Index r = 0; r < net.head.W.rows(); ++r)
        for (Eigen::Index j = 0; j < net.head.W.cols(); ++j) out[at++] = net.head.W(r, j);
    for (Eigen::Index r = 0; r < net.head.offset.size(); ++r) out[at++] = net.head.offset[r];
    assert(at == out.size());
    return out;
}

template <typename T>
void assign_params(Net<T>& net, const Vec<T>& flat) {
    if (flat.size() != net.config.parameter_count())
        throw InvalidShape("assign_params: expected " +
                           std::to_string(net.config.parameter_count()) + " values, got " +
                           std::to_string(flat.size()));
    Eigen::Index at = 0;
    for (auto& w : net.sections) {
        const Eigen::Index C = w.gamma.size(), ci = w.taps[0].cols();
        for (Eigen::Index oc = 0; oc < C; ++oc)
            for (Eigen::Index ic = 0; ic < ci; ++ic)
                for (std::size_t d = 0; d < 3; ++d) w.taps[d](oc, ic) = flat[at++];
        for (Eigen::Index c = 0; c < C; ++c) w.offset[c] = flat[at++];
        for (Eigen::Index c = 0; c < C; ++c) w.gamma[c] = flat[at++];
        for (Eigen::Index c = 0; c < C; ++c) w.beta[c] = flat[at++];
    }
    for (Eigen::Index r = 0; r < net.head.W.rows(); ++r)
        for (Eigen::Index j = 0; j < net.head.W.cols(); ++j) net.head.W(r, j) = flat[at++];
    for (Eigen::Index r = 0; r < net.head.offset.size(); ++r) net.head.offset[r] = flat[at++];
}

template <typename T>
struct LossResult {
    double loss = 0.0;  // mse plus the weight penalty
    double mse = 0.0;   // mean squared error over batch and targets
    Mat<T> estimates;   // n_targets x batch
    Vec<T> grad;        // d loss / d parameters, flattened
};

// Loss and gradient of one batch. `inputs` holds the batch concatenated along
// columns (input_channels x batch*input_length), `targets` is n_targets x
// batch in scaled [-1, 1] units. Normalization uses the batch statistics and
// folds them into the running statistics, so calling this marks the net as
// training. The penalty l2 * sum(w^2) covers conv and head weights only, not
// offsets or normalization parameters. `threads` splits work across batch
// items; the result is the same for any value.
template <typename T>
LossResult<T> loss_and_grad(Net<T>& net, const Mat<T>& inputs, const Mat<T>& targets,
                            double l2 = 1e-5, int threads = 1) {
    const ModelConfig& cfg = net.config;
    const int L = cfg.input_length;
    const int S = int(cfg.sections.size());
    const int C = cfg.channels;
    const int NT = cfg.n_targets;
    if (inputs.rows() != cfg.input_channels || inputs.cols() == 0 || inputs.cols() % L != 0)
        throw InvalidShape("loss_and_grad: inputs must be input_channels x (batch * input_length)");
    const int B = int(inputs.cols() / L);
    if (targets.rows() != NT || targets.cols() != B)
        throw InvalidShape("loss_and_grad: targets must be n_targets x batch");
    if (threads < 1) threads = 1;
    net.training = true;

    const double eps = cfg.bn_epsilon, mom = cfg.bn_momentum;
    const auto ranges = detail::split_ranges(B, threads);

    auto X = std::vector<Mat<T>>(std::size_t(S) + 1);  // X[s]: input to section s, for s >= 1
    auto bmean = std::vector<Eigen::VectorXd>(std::size_t(S));
    auto bvar = std::vector<Eigen::VectorXd>(std::size_t(S));
    Eigen::MatrixXd fsum(C, B), fsq(C, B);  // per-item statistic partials

    int lp_max = 1;
    for (int s = 1; s < S; ++s) lp_max = std::max(lp_max, cfg.sections[std::size_t(s)].padded_in());
    Mat<T> A(C, Eigen::Index(B) * lp_max);  // conv/normalized arena for sections >= 1

    auto fold_stats = [&](int s, int lp) {
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(C), sq = Eigen::VectorXd::Zero(C);
        for (int i = 0; i < B; ++i) {
            sum += fsum.col(i);
            sq += fsq.col(i);
        }
        const double n = double(B) * double(lp);
        bmean[std::size_t(s)] = sum / n;
        bvar[std::size_t(s)] =
            (sq / n - bmean[std::size_t(s)].cwiseProduct(bmean[std::size_t(s)])).cwiseMax(0.0);
        auto& w = net.sections[std::size_t(s)];
        for (int c = 0; c < C; ++c) {
            w.running_mean[c] =
                T((1.0 - mom) * double(w.running_mean[c]) + mom * bmean[std::size_t(s)][c]);
            w.running_var[c] =
                T((1.0 - mom) * double(w.running_var[c]) + mom * bvar[std::size_t(s)][c]);
        }
    };

    // Section 1 works at the raw input length, so it streams item by item
    // through thread-local scratch instead of holding batch-wide buffers; its
    // convolution is cheap enough to recompute on every pass.
    {
        const SectionSpec& sp = cfg.sections[0];
        const auto& w = net.sections[0];
        const int ci = cfg.input_channels, li = sp.l_in, lp = sp.padded_in();
        const int m = sp.pool, lo = sp.l_out;
        X[1].resize(C, Eigen::Index(B) * lo);
        fsum.setZero();
        fsq.setZero();
        detail::run_ranges(ranges, [&](detail::Range r) {
            Mat<T> src(ci, lp), out(C, lp);
            for (int i = r.begin; i < r.end; ++i) {
                src.leftCols(li) = inputs.middleCols(Eigen::Index(i) * li, li);
                if (lp > li) src.rightCols(lp - li).setZero();
                kernels::conv3<T>(w.taps, w.offset, src, out);
                kernels::row_accumulate<T>(out, fsum.col(i), fsq.col(i));
            }
        });
        fold_stats(0, lp);
        detail::run_ranges(ranges, [&](detail::Range r) {
            Mat<T> src(ci, lp), out(C, lp);
            for (int i = r.begin; i < r.end; ++i) {
                src.leftCols(li) = inputs.middleCols(Eigen::Index(i) * li, li);
                if (lp > li) src.rightCols(lp - li).setZero();
                kernels::conv3<T>(w.taps, w.offset, src, out);
                kernels::normalize_rows<T>(out, bmean[0], bvar[0], eps);
                kernels::affine_rows<T>(out, w.gamma, w.beta);
                kernels::hwr_rows<T>(out);
                kernels::pool_cols<T>(out, m, X[1].middleCols(Eigen::Index(i) * lo, lo));
            }
        });
    }

    for (int s = 1; s < S; ++s) {
        const SectionSpec& sp = cfg.sections[std::size_t(s)];
        const auto& w = net.sections[std::size_t(s)];
        const int li = sp.l_in, lp = sp.padded_in(), m = sp.pool, lo = sp.l_out;
        const bool pad = sp.pad_after > 0;
        auto Ab = A.leftCols(Eigen::Index(B) * lp);
        Mat<T> P;
        if (pad) P.resize(C, Eigen::Index(B) * lp);
        const Mat<T>& src = pad ? P : X[std::size_t(s)];
        fsum.setZero();
        fsq.setZero();
        detail::run_ranges(ranges, [&](detail::Range r) {
            for (int i = r.begin; i < r.end; ++i) {
                if (pad) {
                    P.middleCols(Eigen::Index(i) * lp, li) =
                        X[std::size_t(s)].middleCols(Eigen::Index(i) * li, li);
                    P.middleCols(Eigen::Index(i) * lp + li, lp - li).setZero();
                }
                kernels::conv3<T>(w.taps, w.offset, src.middleCols(Eigen::Index(i) * lp, lp),
                                  Ab.middleCols(Eigen::Index(i) * lp, lp));
                kernels::row_accumulate<T>(Ab.middleCols(Eigen::Index(i) * lp, lp), fsum.col(i),
                                           fsq.col(i));
            }
        });
        fold_stats(s, lp);
        X[std::size_t(s) + 1].resize(C, Eigen::Index(B) * lo);
        detail::run_ranges(ranges, [&](detail::Range r) {
            for (int i = r.begin; i < r.end; ++i) {
                auto blk = Ab.middleCols(Eigen::Index(i) * lp, lp);
                kernels::normalize_rows<T>(blk, bmean[std::size_t(s)], bvar[std::size_t(s)], eps);
                kernels::affine_rows<T>(blk, w.gamma, w.beta);
                kernels::hwr_rows<T>(blk);
                kernels::pool_cols<T>(blk, m,
                                      X[std::size_t(s) + 1].middleCols(Eigen::Index(i) * lo, lo));
            }
        });
    }

    const int fl = cfg.final_length(), lat = cfg.latent_size();
    Mat<T> Lat(lat, B);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < fl; ++j)
            Lat.block(Eigen::Index(j) * C, i, C, 1) = X[std::size_t(S)].col(Eigen::Index(i) * fl + j);

    LossResult<T> out;
    out.estimates = (net.head.W * Lat).colwise() + net.head.offset;
    Mat<T> D = out.estimates - targets;
    double sq_sum = 0.0;
    for (int i = 0; i < B; ++i) {
        double p = 0.0;
        for (int t = 0; t < NT; ++t) p += double(D(t, i)) * double(D(t, i));
        sq_sum += p;
    }
    out.mse = sq_sum / (double(B) * NT);
    double wsq = 0.0;
    for (const auto& w : net.sections)
        for (const auto& tap : w.taps) wsq += tap.template cast<double>().squaredNorm();
    wsq += net.head.W.template cast<double>().squaredNorm();
    out.loss = out.mse + l2 * wsq;

    // Reverse pass. Sections recompute their normalized activations from the
    // stored inputs and the saved batch statistics.
    const T dscale = T(2.0 / (double(B) * NT));
    Mat<T> dEst = D * dscale;
    Mat<T> dWh = Mat<T>::Zero(NT, lat);
    Eigen::VectorXd dOffh = Eigen::VectorXd::Zero(NT);
    for (int i = 0; i < B; ++i) {
        dWh.noalias() += dEst.col(i) * Lat.col(i).transpose();
        for (int t = 0; t < NT; ++t) dOffh[t] += double(dEst(t, i));
    }
    Mat<T> dLat = net.head.W.transpose() * dEst;
    Mat<T> dXnext(C, Eigen::Index(B) * fl);
    for (int i = 0; i < B; ++i)
        for (int j = 0; j < fl; ++j)
            dXnext.col(Eigen::Index(i) * fl + j) = dLat.block(Eigen::Index(j) * C, i, C, 1);

    auto dWsec = std::vector<std::array<Mat<T>, 3>>(std::size_t(S));
    auto dOffSec = std::vector<Eigen::VectorXd>(std::size_t(S));
    auto dGamma = std::vector<Eigen::VectorXd>(std::size_t(S));
    auto dBeta = std::vector<Eigen::VectorXd>(std::size_t(S));
    Mat<T> A2(C, Eigen::Index(B) * lp_max);  // gradient arena for sections >= 1
    Mat<T> dXcur;
    Eigen::MatrixXd bsum_dy(C, B), bsum_dyx(C, B);
    auto dWp = std::vector<std::array<Mat<T>, 3>>(std::size_t(B));
    Eigen::MatrixXd dOffp(C, B);

    auto fold_section = [&](int s, int ci) {
        auto& dW = dWsec[std::size_t(s)];
        for (auto& d : dW) d = Mat<T>::Zero(C, ci);
        dOffSec[std::size_t(s)] = Eigen::VectorXd::Zero(C);
        for (int i = 0; i < B; ++i) {
            for (std::size_t d = 0; d < 3; ++d) dW[d] += dWp[std::size_t(i)][d];
            dOffSec[std::size_t(s)] += dOffp.col(i);
        }
    };
    auto fold_bn_sums = [&](int s) {
        dBeta[std::size_t(s)] = Eigen::VectorXd::Zero(C);
        dGamma[std::size_t(s)] = Eigen::VectorXd::Zero(C);
        for (int i = 0; i < B; ++i) {
            dBeta[std::size_t(s)] += bsum_dy.col(i);
            dGamma[std::size_t(s)] += bsum_dyx.col(i);
        }
    };

    for (int s = S - 1; s >= 1; --s) {
        const SectionSpec& sp = cfg.sections[std::size_t(s)];
        const auto& w = net.sections[std::size_t(s)];
        const int li = sp.l_in, lp = sp.padded_in(), m = sp.pool, lo = sp.l_out;
        const bool pad = sp.pad_after > 0;
        auto Ab = A.leftCols(Eigen::Index(B) * lp);
        auto dYb = A2.leftCols(Eigen::Index(B) * lp);
        Mat<T> P;
        if (pad) P.resize(C, Eigen::Index(B) * lp);
        const Mat<T>& src = pad ? P : X[std::size_t(s)];
        bsum_dy.setZero();
        bsum_dyx.setZero();
        detail::run_ranges(ranges, [&](detail::Range r) {
            for (int i = r.begin; i < r.end; ++i) {
                if (pad) {
                    P.middleCols(Eigen::Index(i) * lp, li) =
                        X[std::size_t(s)].middleCols(Eigen::Index(i) * li, li);
                    P.middleCols(Eigen::Index(i) * lp + li, lp - li).setZero();
                }
                auto xh = Ab.middleCols(Eigen::Index(i) * lp, lp);
                auto dy = dYb.middleCols(Eigen::Index(i) * lp, lp);
                kernels::conv3<T>(w.taps, w.offset, src.middleCols(Eigen::Index(i) * lp, lp), xh);
                kernels::normalize_rows<T>(xh, bmean[std::size_t(s)], bvar[std::size_t(s)], eps);
                kernels::pool_grad_cols<T>(dXnext.middleCols(Eigen::Index(i) * lo, lo), m, dy);
                kernels::hwr_grad_rows<T>(dy, xh, w.gamma, w.beta);
                kernels::bn_backward_sums<T>(dy, xh, bsum_dy.col(i), bsum_dyx.col(i));
            }
        });
        fold_bn_sums(s);
        const double n = double(B) * double(lp);
        dXcur.resize(C, Eigen::Index(B) * li);
        detail::run_ranges(ranges, [&](detail::Range r) {
            for (int i = r.begin; i < r.end; ++i) {
                auto xh = Ab.middleCols(Eigen::Index(i) * lp, lp);
                auto dy = dYb.middleCols(Eigen::Index(i) * lp, lp);
                kernels::bn_backward_apply<T>(dy, xh, w.gamma, bvar[std::size_t(s)], eps, n,
                                              dBeta[std::size_t(s)], dGamma[std::size_t(s)]);
                for (auto& d : dWp[std::size_t(i)]) d = Mat<T>::Zero(C, C);
                dOffp.col(i).setZero();
                kernels::conv3_grad_params<T>(src.middleCols(Eigen::Index(i) * lp, lp), dy,
                                              dWp[std::size_t(i)], dOffp.col(i));
                if (pad) {
                    kernels::conv3_grad_input<T>(w.taps, dy, xh);
                    dXcur.middleCols(Eigen::Index(i) * li, li) =
                        Ab.middleCols(Eigen::Index(i) * lp, li);
                } else {
                    kernels::conv3_grad_input<T>(w.taps, dy,
                                                 dXcur.middleCols(Eigen::Index(i) * li, li));
                }
            }
        });
        fold_section(s, C);
        dXnext.swap(dXcur);
    }

    {
        const SectionSpec& sp = cfg.sections[0];
        const auto& w = net.sections[0];
        const int ci = cfg.input_channels, li = sp.l_in, lp = sp.padded_in();
        const int m = sp.pool, lo = sp.l_out;
        bsum_dy.setZero();
        bsum_dyx.setZero();
        auto rebuild = [&](int i, Mat<T>& src, Mat<T>& xh, Mat<T>& dy) {
            src.leftCols(li) = inputs.middleCols(Eigen::Index(i) * li, li);
            if (lp > li) src.rightCols(lp - li).setZero();
            kernels::conv3<T>(w.taps, w.offset, src, xh);
            kernels::normalize_rows<T>(xh, bmean[0], bvar[0], eps);
            kernels::pool_grad_cols<T>(dXnext.middleCols(Eigen::Index(i) * lo, lo), m, dy);
            kernels::hwr_grad_rows<T>(dy, xh, w.gamma, w.beta);
        };
        detail::run_ranges(ranges, [&](detail::Range r) {
            Mat<T> src(ci, lp), xh(C, lp), dy(C, lp);
            for (int i = r.begin; i < r.end; ++i) {
                rebuild(i, src, xh, dy);
                kernels::bn_backward_sums<T>(dy, xh, bsum_dy.col(i), bsum_dyx.col(i));
            }
        });
        fold_bn_sums(0);
        const double n = double(B) * double(lp);
        detail::run_ranges(ranges, [&](detail::Range r) {
            Mat<T> src(ci, lp), xh(C, lp), dy(C, lp);
            for (int i = r.begin; i < r.end; ++i) {
                rebuild(i, src, xh, dy);
                kernels::bn_backward_apply<T>(dy, xh, w.gamma, bvar[0], eps, n, dBeta[0],
                                              dGamma[0]);
                for (auto& d : dWp[std::size_t(i)]) d = Mat<T>::Zero(C, ci);
                dOffp.col(i).setZero();
                kernels::conv3_grad_params<T>(src, dy, dWp[std::size_t(i)], dOffp.col(i));
            }
        });
        fold_section(0, ci);
    }

    out.grad.resize(cfg.parameter_count());
    Eigen::Index at = 0;
    for (int s = 0; s < S; ++s) {
        const auto& w = net.sections[std::size_t(s)];
        const Eigen::Index ci = w.taps[0].cols();
        for (Eigen::Index oc = 0; oc < C; ++oc)
            for (Eigen::Index ic = 0; ic < ci; ++ic)
                for (std::size_t d = 0; d < 3; ++d)
                    out.grad[at++] = T(double(dWsec[std::size_t(s)][d](oc, ic)) +
                                       2.0 * l2 * double(w.taps[d](oc, ic)));
        for (int c = 0; c < C; ++c) out.grad[at++] = T(dOffSec[std::size_t(s)][c]);
        for (int c = 0; c < C; ++c) out.grad[at++] = T(dGamma[std::size_t(s)][c]);
        for (int c = 0; c < C; ++c) out.grad[at++] = T(dBeta[std::size_t(s)][c]);
    }
    for (int r = 0; r < NT; ++r)
        for (Eigen::Index j = 0; j < net.head.W.cols(); ++j)
            out.grad[at++] = T(double(dWh(r, j)) + 2.0 * l2 * double(net.head.W(r, j)));
    for (int r = 0; r < NT; ++r) out.grad[at++] = T(dOffh[r]);
    assert(at == out.grad.size());
    return out;
}

// Adam with bias correction. Moments live in the storage scalar; the update
// arithmetic runs in double.
template <typename T>
struct AdamState {
    Vec<T> m, v;
    long long step = 0;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

template <typename T>
void adam_step(AdamState<T>& st, Vec<T>& params, const Vec<T>& grad, double lr) {
    if (params.size() != grad.size())
        throw InvalidShape("adam_step: parameter/gradient size mismatch");
    if (st.m.size() == 0) {
        st.m = Vec<T>::Zero(params.size());
        st.v = Vec<T>::Zero(params.size());
    }
    if (st.m.size() != params.size()) throw InvalidShape("adam_step: state size mismatch");
    ++st.step;
    const double c1 = 1.0 - std::pow(st.beta1, double(st.step));
    const double c2 = 1.0 - std::pow(st.beta2, double(st.step));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double g = double(grad[i]);
        const double m = st.beta1 * double(st.m[i]) + (1.0 - st.beta1) * g;
        const double v = st.beta2 * double(st.v[i]) + (1.0 - st.beta2) * g * g;
        st.m[i] = T(m);
        st.v[i] = T(v);
        params[i] = T(double(params[i]) - lr * (m / c1) / (std::sqrt(v / c2) + st.eps));
    }
}

struct EpochLog {
    int epoch = 0;   // 1-based
    double lr = 0.0;  // rate in effect during this epoch
    int batches = 0;
    double train_el = 0.0;  // sqrt of the epoch's mean squared error
    double val_el = 0.0;
    std::vector<double> val_rho;  // per-target correlation on the validation split
};

struct TrainState {
    int epoch = 0;
    double lr = 1e-4;
    float best_val_el = std::numeric_limits<float>::infinity();
    int since_improvement = 0;
    AdamState<float> adam;
    std::vector<EpochLog> log;
};

// Plateau schedule: an epoch improves when it beats the best validation error
// so far by at least 1e-4; five consecutive epochs without improvement divide
// the rate by ten and restart the count. Errors are compared in the 32-bit
// storage scalar, matching how logged values round-trip.
void schedule_update(TrainState& state, double val_el);

struct TrainConfig {
    int epochs = 30;
    int batch = 60;
    std::uint64_t seed = 0;
    bool augment_ipa = true;  // add a polarity-inverted copy of each training item
    double lr = 1e-4;
    double l2 = 1e-5;
    int threads = 1;  // batch items processed in parallel; does not change results
};

// One split of segments ready for training: each input holds the channels of
// one segment interleaved per time step (for one channel, just its samples);
// target rows are scaled [-1, 1] values. Condition ids are optional and used
// for reporting only.
struct Dataset {
    std::vector<Vec<float>> inputs;
    Mat<double> targets;  // n_items x n_targets
    std::vector<std::string> conditions;
};

using EpochCallback = std::function<bool(const EpochLog&)>;  // return false to stop

struct FitResult {
    NetF net;  // weights after the last completed epoch
    TrainState state;
};

// Runs the full loop: per-epoch shuffle (with the inverted copies when
// augmentation is on), Adam updates batch by batch, a validation pass per
// epoch, and the plateau schedule. Deterministic for a fixed seed.
FitResult fit(const NetF& init, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const EpochCallback& on_epoch = {});

struct TargetMetrics {
    double rho = 0.0;
    double rmse = 0.0;
    double nrmse_percent = 0.0;  // rmse over the target's full scale, in percent
};

struct MetricReport {
    std::vector<TargetMetrics> per_segment;
    // Computed across per-condition means of both estimates and targets;
    // empty when no condition ids were given.
    std::vector<TargetMetrics> per_condition;
};

// Estimate quality in the targets' native units: per-target correlation, root
// mean squared error, and the error as a percentage of each target's full
// scale. With condition ids, also the same statistics across condition means.
MetricReport metrics(const Mat<double>& estimates, const Mat<double>& targets,
                     const std::vector<TargetSpec>& specs,
                     const std::vector<std::string>* conditions = nullptr);

}  // namespace wawenet
