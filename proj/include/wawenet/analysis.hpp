#pragma once

#include <algorithm>
#include <array>
#include <span>
#include <string>
#include <vector>

#include "wawenet/model.hpp"

namespace wawenet {

// Runs the network as a chain of elementary signal-processing stages and
// reports what each stage does to the DC (mean) value of every channel.

struct DcFlowMap {
    std::vector<std::string> row_labels;  // "input", then 6 stages per section
    Eigen::MatrixXd values;               // row per label, column per channel
    Eigen::VectorXd latent;               // final latent from the decomposed run
};

// Each section is executed as six separate functions: FIR filtering (the
// convolution taps alone), gain (folded norm scale), bias (folded norm shift
// plus the convolution offset), half-wave rectification, a circular length-m
// running-mean FIR, and sub-sampling at phase m-1. The sampled phases of the
// circular filter reproduce the integrated pooling exactly, so the decomposed
// latent tracks the layered forward pass.
template <typename T>
DcFlowMap dc_flow(const Net<T>& net, const std::type_identity_t<Eigen::Ref<const Mat<T>>>& x) {
    const ModelConfig& cfg = net.config;
    if (net.training)
        throw StateError("dc_flow: running statistics are mid-update; finish training first");
    if (x.rows() != cfg.input_channels || x.cols() != cfg.input_length)
        throw InvalidShape("dc_flow: expected " + std::to_string(cfg.input_channels) + " x " +
                           std::to_string(cfg.input_length) + " input, got " +
                           std::to_string(x.rows()) + " x " + std::to_string(x.cols()));

    const int C = cfg.channels;
    const auto S = net.sections.size();
    DcFlowMap map;
    map.row_labels.reserve(1 + 6 * S);
    map.values.resize(Eigen::Index(1 + 6 * S), C);

    auto row_means = [](const Mat<T>& M, Eigen::Index row, Eigen::MatrixXd& out) {
        for (Eigen::Index c = 0; c < M.rows(); ++c) {
            double acc = 0.0;
            for (Eigen::Index j = 0; j < M.cols(); ++j) acc += double(M(c, j));
            out(row, c) = acc / double(M.cols());
        }
    };

    map.row_labels.push_back("input");
    {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            for (Eigen::Index c = 0; c < x.rows(); ++c) acc += double(x(c, j));
        map.values.row(0).setConstant(acc / double(x.size()));
    }

    Mat<T> X = x;
    Vec<T> ga, gb;
    const Vec<T> no_offset = Vec<T>::Zero(C);
    for (std::size_t i = 0; i < S; ++i) {
        const SectionSpec& spec = cfg.sections[i];
        const SectionWeights<T>& w = net.sections[i];
        const int lp = spec.padded_in();
        const int m = spec.pool;
        const std::string tag = "S" + std::to_string(spec.index) + " ";
        const Eigen::Index base = Eigen::Index(1 + 6 * i);

        Mat<T> Xp(X.rows(), lp);
        Xp.leftCols(X.cols()) = X;
        if (spec.pad_after > 0) Xp.rightCols(spec.pad_after).setZero();

        Mat<T> F(C, lp);
        kernels::conv3<T>(w.taps, no_offset, Xp, F);
        map.row_labels.push_back(tag + "FIR");
        row_means(F, base + 0, map.values);

        fold_norm(w, cfg.bn_epsilon, ga, gb);
        Mat<T> G(C, lp);
        for (int j = 0; j < lp; ++j) G.col(j) = F.col(j).cwiseProduct(ga);
        map.row_labels.push_back(tag + "gain");
        row_means(G, base + 1, map.values);

        Vec<T> shift(C);
        for (int c = 0; c < C; ++c)
            shift[c] = T(double(ga[c]) * double(w.offset[c]) + double(gb[c]));
        Mat<T> B(C, lp);
        for (int j = 0; j < lp; ++j) B.col(j) = G.col(j) + shift;
        map.row_labels.push_back(tag + "bias");
        row_means(B, base + 2, map.values);

        Mat<T> H = B;
        kernels::hwr_rows<T>(H);
        map.row_labels.push_back(tag + "HWR");
        row_means(H, base + 3, map.values);

        // Circular running mean: each input sample lands in exactly m windows,
        // so the mean is preserved; the sampled phases below never reach the
        // wrapped region because m divides lp.
        Mat<T> P(C, lp);
        const double inv = 1.0 / m;
        for (int t = 0; t < lp; ++t)
            for (int c = 0; c < C; ++c) {
                double acc = 0.0;
                for (int j = t - m + 1; j <= t; ++j) acc += double(H(c, j < 0 ? j + lp : j));
                P(c, t) = T(acc * inv);
            }
        map.row_labels.push_back(tag + "pool-FIR");
        row_means(P, base + 4, map.values);

        Mat<T> sub(C, spec.l_out);
        for (int k = 0; k < spec.l_out; ++k) sub.col(k) = P.col(k * m + m - 1);
        map.row_labels.push_back(tag + "sub-sample");
        row_means(sub, base + 5, map.values);

        X = std::move(sub);
    }

    const int lf = cfg.final_length();
    map.latent.resize(cfg.latent_size());
    for (int j = 0; j < lf; ++j)
        for (int c = 0; c < C; ++c) map.latent[Eigen::Index(j) * C + c] = double(X(c, j));
    return map;
}

template <typename T>
DcFlowMap dc_flow(const Net<T>& net, std::type_identity_t<std::span<const T>> samples) {
    Eigen::Map<const Mat<T>> x(samples.data(), 1, Eigen::Index(samples.size()));
    return dc_flow<T>(net, x);
}

// Shape of a length-3 filter's magnitude response on [0, pi].
enum class FilterShape { Lowpass, Highpass, Bandpass, Bandstop };

constexpr int kResponsePoints = 512;

struct FilterClass {
    FilterShape shape = FilterShape::Lowpass;
    Eigen::VectorXd response;  // |H| at kResponsePoints points spanning [0, pi]
};

const char* filter_shape_name(FilterShape s);

// Samples |H(w)| on a uniform grid including both edges and classifies by
// where the maximum sits: at w=0 with a weak Nyquist edge -> lowpass, at w=pi
// with a weak DC edge -> highpass, strictly inside with both edges weak
// (< 0.9 of the peak) -> bandpass, anything else -> bandstop.
FilterClass classify_filter(const std::array<double, 3>& taps);

struct FilterCensus {
    std::array<long long, 4> counts{};  // indexed by FilterShape
    std::array<double, 4> fractions{};
    long long total = 0;
};

// Classifies every convolution kernel in the network. Fractions partition the
// kernels, so they sum to 1; classification only sees |H|, making the census
// invariant to kernel scaling.
template <typename T>
FilterCensus filter_census(const Net<T>& net) {
    FilterCensus census;
    for (const auto& w : net.sections) {
        const Eigen::Index oc = w.taps[0].rows(), ic = w.taps[0].cols();
        for (Eigen::Index o = 0; o < oc; ++o)
            for (Eigen::Index i = 0; i < ic; ++i) {
                const std::array<double, 3> h = {double(w.taps[0](o, i)), double(w.taps[1](o, i)),
                                                 double(w.taps[2](o, i))};
                ++census.counts[std::size_t(classify_filter(h).shape)];
                ++census.total;
            }
    }
    for (std::size_t k = 0; k < census.counts.size(); ++k)
        census.fractions[k] = double(census.counts[k]) / double(census.total);
    return census;
}

// One-sided amplitude spectrum: a unit-amplitude sine on an exact bin reads
// 1.0 at that bin.
struct Spectrum {
    double sample_rate = 0.0;
    double bin_hz = 0.0;
    Eigen::VectorXd amplitude;
};

Spectrum amplitude_spectrum(std::span<const double> x, double sample_rate);

// Two equal tones through rectification and pooling: rectifying the sum
// creates intermodulation products (notably at f2 - f1) that rectifying the
// tones separately cannot, and pooling folds components just above the new
// Nyquist frequency back below it with little attenuation.
struct TwoToneDemo {
    double f1 = 0.0, f2 = 0.0;
    int m = 0;
    Spectrum input, rectified, pooled;

    double intermod_hz = 0.0;
    double joint_intermod = 0.0;     // amplitude at f2-f1 after rectifying the sum
    double separate_intermod = 0.0;  // same bin after summing separate rectifications
    double intermod_db = 0.0;        // 20 log10(joint / separate)
    double input_dc = 0.0;
    double rectified_dc = 0.0;

    double probe_hz = 0.0;  // strongest rectified component just above the new Nyquist
    double alias_hz = 0.0;  // where sub-sampling folds it
    double alias_attenuation_db = 0.0;
    double predicted_attenuation_db = 0.0;  // running-mean filter response at the probe
};

TwoToneDemo two_tone_demo(double f1 = 345.0, double f2 = 6789.0, int m = 2);

// Per-condition mean latent vectors, one row per condition id.
struct Fingerprint {
    std::vector<std::string> ids;
    Eigen::MatrixXd latents;            // ids.size() x latent_size
    std::vector<std::string> skipped;   // requested conditions with no segments
};

// Groups segments by condition label and averages their latent vectors. When
// `wanted` is given its order is kept and missing conditions are reported in
// `skipped`; otherwise conditions appear sorted.
template <typename T>
Fingerprint condition_fingerprint(const Net<T>& net, const std::vector<Vec<T>>& inputs,
                                  const std::vector<std::string>& conditions,
                                  const std::vector<std::string>& wanted = {}) {
    if (net.training)
        throw StateError("condition_fingerprint: running statistics are mid-update");
    if (inputs.size() != conditions.size())
        throw InvalidShape("condition_fingerprint: " + std::to_string(inputs.size()) +
                           " segments vs " + std::to_string(conditions.size()) + " labels");

    std::vector<std::string> ids = wanted;
    if (ids.empty()) {
        ids.assign(conditions.begin(), conditions.end());
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    }

    const int D = net.config.latent_size();
    Fingerprint fp;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(Eigen::Index(ids.size()), D);
    auto counts = std::vector<long long>(ids.size(), 0);
    Vec<T> latent;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const auto it = std::find(ids.begin(), ids.end(), conditions[i]);
        if (it == ids.end()) continue;
        const auto g = std::size_t(it - ids.begin());
        forward<T>(net, std::span<const T>(inputs[i].data(), std::size_t(inputs[i].size())),
                   &latent);
        for (int d = 0; d < D; ++d) sums(Eigen::Index(g), d) += double(latent[d]);
        ++counts[g];
    }

    for (std::size_t g = 0; g < ids.size(); ++g) {
        if (counts[g] == 0) {
            fp.skipped.push_back(ids[g]);
            continue;
        }
        fp.ids.push_back(ids[g]);
    }
    if (fp.ids.empty()) throw EmptyResult("condition_fingerprint: no condition has segments");
    fp.latents.resize(Eigen::Index(fp.ids.size()), D);
    Eigen::Index r = 0;
    for (std::size_t g = 0; g < ids.size(); ++g)
        if (counts[g] > 0) fp.latents.row(r++) = sums.row(Eigen::Index(g)) / double(counts[g]);
    return fp;
}

}  // namespace wawenet
