#pragma once

#include <Eigen/Core>
#include <array>
#include <cassert>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "wawenet/errors.hpp"
#include "wawenet/kernels.hpp"
#include "wawenet/rng.hpp"

namespace wawenet {

enum class SectionKind { ConvA, PConvA };

// One section: optional pad, length-3 convolution with offset, normalization,
// half-wave rectification, average pooling by k.
struct SectionSpec {
    int index = 0;  // 1-based position
    SectionKind kind = SectionKind::ConvA;
    int pool = 2;
    int pad_after = 0;  // PConvA appends one zero to the input before conv
    int l_in = 0;       // samples entering the section, before padding
    int l_out = 0;
    double rate_hz = 0.0;    // effective sample rate of the section input
    double spacing_ms = 0.0;  // 1000 / rate_hz

    int padded_in() const { return l_in + pad_after; }
};

struct ModelConfig {
    int input_channels = 1;
    int channels = 96;  // filters per section, f_n
    int n_targets = 1;  // N_T
    int input_length = 48000;
    double bn_epsilon = 1e-5;
    double bn_momentum = 0.1;
    bool table_conformant = true;  // canonical 13-section layout
    std::vector<SectionSpec> sections;

    static ModelConfig standard(int input_channels = 1, int n_targets = 1);
    // Free-form layout for small test nets; exempt from the canonical-table
    // checks but still required to chain consistently.
    static ModelConfig custom(int input_channels, int channels, int n_targets, int input_length,
                              const std::vector<SectionSpec>& sections);

    void validate() const;
    std::int64_t parameter_count() const;
    int final_length() const { return sections.empty() ? input_length : sections.back().l_out; }
    int latent_size() const { return channels * final_length(); }
};

template <typename T>
struct SectionWeights {
    std::array<Mat<T>, 3> taps;  // taps[d](out_channel, in_channel)
    Vec<T> offset;
    Vec<T> gamma, beta, running_mean, running_var;
};

template <typename T>
struct DenseHead {
    Mat<T> W;  // n_targets × latent_size
    Vec<T> offset;
};

template <typename T>
struct Net {
    ModelConfig config;
    std::vector<SectionWeights<T>> sections;
    DenseHead<T> head;
    // True while a trainer is mutating the running statistics. Analysis passes
    // that rely on settled statistics refuse nets in this state.
    bool training = false;
};

using NetF = Net<float>;

// Gain/bias form of a section's normalization under its running statistics.
template <typename T>
void fold_norm(const SectionWeights<T>& s, double eps, Vec<T>& a, Vec<T>& b) {
    const Eigen::Index C = s.gamma.size();
    a.resize(C);
    b.resize(C);
    for (Eigen::Index c = 0; c < C; ++c) {
        const double g = double(s.gamma[c]) / std::sqrt(double(s.running_var[c]) + eps);
        a[c] = T(g);
        b[c] = T(double(s.beta[c]) - g * double(s.running_mean[c]));
    }
}

template <typename T>
Net<T> build(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Net<T> net;
    net.config = config;
    Rng rng(seed);
    const int C = config.channels;
    int in_ch = config.input_channels;
    for (const auto& spec : config.sections) {
        (void)spec;
        SectionWeights<T> w;
        const double sigma = std::sqrt(2.0 / (double(in_ch) * 3.0));
        for (auto& t : w.taps) t.resize(C, in_ch);
        for (int oc = 0; oc < C; ++oc)
            for (int ic = 0; ic < in_ch; ++ic)
                for (int d = 0; d < 3; ++d)
                    w.taps[std::size_t(d)](oc, ic) = T(sigma * rng.next_gaussian());
        w.offset = Vec<T>::Zero(C);
        w.gamma = Vec<T>::Ones(C);
        w.beta = Vec<T>::Zero(C);
        w.running_mean = Vec<T>::Zero(C);
        w.running_var = Vec<T>::Ones(C);
        net.sections.push_back(std::move(w));
        in_ch = C;
    }
    const int latent = config.latent_size();
    const double sigma = std::sqrt(2.0 / double(latent));
    net.head.W.resize(config.n_targets, latent);
    for (int r = 0; r < config.n_targets; ++r)
        for (int j = 0; j < latent; ++j) net.head.W(r, j) = T(sigma * rng.next_gaussian());
    net.head.offset = Vec<T>::Zero(config.n_targets);
    return net;
}

// Evaluation-mode forward pass over one input of input_channels × input_length.
// Returns the N_T estimates; optionally also the latent vector leaving the
// last section.
template <typename T>
Vec<T> forward(const Net<T>& net, const std::type_identity_t<Eigen::Ref<const Mat<T>>>& x,
               Vec<T>* latent_out = nullptr) {
    const ModelConfig& cfg = net.config;
    if (x.rows() != cfg.input_channels || x.cols() != cfg.input_length)
        throw InvalidShape("forward: expected " + std::to_string(cfg.input_channels) + " x " +
                           std::to_string(cfg.input_length) + " input, got " +
                           std::to_string(x.rows()) + " x " + std::to_string(x.cols()));

    int max_len = cfg.input_length + 1;
    for (const auto& s : cfg.sections) max_len = std::max(max_len, s.padded_in());
    const int rows = std::max(cfg.channels, cfg.input_channels);
    Mat<T> a(rows, max_len), b(rows, max_len);

    a.topLeftCorner(x.rows(), x.cols()) = x;
    int cur_ch = cfg.input_channels;
    Vec<T> ga, gb;
    for (std::size_t i = 0; i < net.sections.size(); ++i) {
        const SectionSpec& spec = cfg.sections[i];
        const SectionWeights<T>& w = net.sections[i];
        const int lp = spec.padded_in();
        if (spec.pad_after > 0) a.block(0, spec.l_in, cur_ch, spec.pad_after).setZero();
        kernels::conv3<T>(w.taps, w.offset, a.topLeftCorner(cur_ch, lp),
                          b.topLeftCorner(cfg.channels, lp));
        fold_norm(w, cfg.bn_epsilon, ga, gb);
        kernels::affine_rows<T>(b.topLeftCorner(cfg.channels, lp), ga, gb);
        kernels::hwr_rows<T>(b.topLeftCorner(cfg.channels, lp));
        kernels::pool_cols<T>(b.topLeftCorner(cfg.channels, lp), spec.pool,
                              a.topLeftCorner(cfg.channels, spec.l_out));
        assert(spec.l_out * spec.pool == lp);
        cur_ch = cfg.channels;
    }

    const int lf = cfg.final_length();
    Vec<T> latent(cfg.latent_size());
    for (int j = 0; j < lf; ++j)
        latent.segment(Eigen::Index(j) * cfg.channels, cfg.channels) =
            a.col(j).head(cfg.channels);
    if (latent_out) *latent_out = latent;
    return net.head.W * latent + net.head.offset;
}

template <typename T>
Vec<T> forward(const Net<T>& net, std::type_identity_t<std::span<const T>> samples,
               Vec<T>* latent_out = nullptr) {
    Eigen::Map<const Mat<T>> x(samples.data(), 1, Eigen::Index(samples.size()));
    return forward<T>(net, x, latent_out);
}

// Wider copies of a trained net: head rows and S1 input-channel slices are
// duplicated verbatim; everything else is copied as-is.
template <typename T>
Net<T> adapt(const Net<T>& net, int new_n_targets, int new_input_channels) {
    const ModelConfig& cfg = net.config;
    if (new_n_targets < cfg.n_targets || new_input_channels < cfg.input_channels)
        throw InvalidConfig("adapt: shrinking targets or input channels is not supported");
    Net<T> out = net;
    out.config.n_targets = new_n_targets;
    out.config.input_channels = new_input_channels;
    out.config.validate();

    if (new_input_channels != cfg.input_channels) {
        auto& s1 = out.sections.front();
        for (auto& t : s1.taps) {
            Mat<T> wide(t.rows(), new_input_channels);
            for (int ic = 0; ic < new_input_channels; ++ic) wide.col(ic) = t.col(ic % t.cols());
            t = std::move(wide);
        }
    }
    if (new_n_targets != cfg.n_targets) {
        Mat<T> wide(new_n_targets, net.head.W.cols());
        Vec<T> off(new_n_targets);
        for (int r = 0; r < new_n_targets; ++r) {
            wide.row(r) = net.head.W.row(r % net.head.W.rows());
            off[r] = net.head.offset[r % net.head.offset.size()];
        }
        out.head.W = std::move(wide);
        out.head.offset = std::move(off);
    }
    return out;
}

// Structured report of the architecture: one row per section plus totals.
struct SectionRow {
    int index;
    std::string kind;  // "Conv A-4", "P Conv A-2", ...
    int pool;
    double rate_hz;
    double spacing_ms;
    int l_in;  // as displayed: includes the appended pad sample
    int l_out;
    std::int64_t conv_params;
    std::int64_t norm_params;
};

struct NetDescription {
    std::vector<SectionRow> rows;
    std::int64_t conv_total = 0;
    std::int64_t norm_total = 0;
    std::int64_t head_params = 0;
    std::int64_t total = 0;
    int latent_size = 0;
    int n_targets = 0;
};

NetDescription describe(const ModelConfig& config);
std::string format_description(const NetDescription& d);

template <typename T>
NetDescription describe(const Net<T>& net) {
    return describe(net.config);
}

}  // namespace wawenet
