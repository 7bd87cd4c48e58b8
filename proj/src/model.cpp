#include "wawenet/model.hpp"

#include <cstdio>
#include <numeric>

namespace wawenet {

namespace {

// The canonical layout: pooling factors and the two padded sections. Length
// and rate columns follow from these by the section recurrences.
constexpr int kPools[13] = {4, 2, 2, 4, 2, 2, 2, 2, 2, 2, 2, 2, 3};
constexpr bool kPadded[13] = {false, false, false, false, false, true,
                              false, false, true,  false, false, false, false};
constexpr double kInputRate = 16000.0;

}  // namespace

ModelConfig ModelConfig::standard(int input_channels, int n_targets) {
    ModelConfig cfg;
    cfg.input_channels = input_channels;
    cfg.n_targets = n_targets;
    int len = cfg.input_length;
    double rate = kInputRate;
    for (int i = 0; i < 13; ++i) {
        SectionSpec s;
        s.index = i + 1;
        s.kind = kPadded[i] ? SectionKind::PConvA : SectionKind::ConvA;
        s.pool = kPools[i];
        s.pad_after = kPadded[i] ? 1 : 0;
        s.l_in = len;
        s.l_out = (len + s.pad_after) / s.pool;
        s.rate_hz = rate;
        s.spacing_ms = 1000.0 / rate;
        cfg.sections.push_back(s);
        len = s.l_out;
        rate /= s.pool;
    }
    cfg.validate();
    return cfg;
}

ModelConfig ModelConfig::custom(int input_channels, int channels, int n_targets, int input_length,
                                const std::vector<SectionSpec>& sections) {
    ModelConfig cfg;
    cfg.input_channels = input_channels;
    cfg.channels = channels;
    cfg.n_targets = n_targets;
    cfg.input_length = input_length;
    cfg.table_conformant = false;
    cfg.sections = sections;
    cfg.validate();
    return cfg;
}

void ModelConfig::validate() const {
    if (input_channels < 1) throw InvalidConfig("config: input_channels must be positive");
    if (channels < 1) throw InvalidConfig("config: channels must be positive");
    if (n_targets < 1) throw InvalidConfig("config: n_targets must be at least 1");
    if (input_length < 1) throw InvalidConfig("config: input_length must be positive");
    if (sections.empty()) throw InvalidConfig("config: at least one section required");
    if (!(bn_epsilon > 0)) throw InvalidConfig("config: normalization epsilon must be positive");
    if (bn_momentum < 0 || bn_momentum > 1)
        throw InvalidConfig("config: momentum must lie in [0, 1]");

    int len = input_length;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        const SectionSpec& s = sections[i];
        if (s.index != int(i) + 1) throw InvalidConfig("config: section indices must run 1..n");
        if (s.pool < 2 || s.pool > 4) throw InvalidConfig("config: pool factor must be 2, 3 or 4");
        if (s.pad_after != 0 && s.pad_after != 1)
            throw InvalidConfig("config: pad_after must be 0 or 1");
        if ((s.kind == SectionKind::PConvA) != (s.pad_after == 1))
            throw InvalidConfig("config: padded kind and pad_after disagree");
        if (s.l_in != len)
            throw InvalidConfig("config: section " + std::to_string(s.index) +
                                " input length " + std::to_string(s.l_in) +
                                " does not chain from previous output " + std::to_string(len));
        if ((s.l_in + s.pad_after) % s.pool != 0)
            throw InvalidConfig("config: section " + std::to_string(s.index) +
                                " length not divisible by pool factor");
        if (s.l_out != (s.l_in + s.pad_after) / s.pool)
            throw InvalidConfig("config: section " + std::to_string(s.index) +
                                " output length inconsistent");
        len = s.l_out;
    }

    if (table_conformant) {
        if (input_channels != 1 && input_channels != 2)
            throw InvalidConfig("config: standard net accepts 1 or 2 input channels");
        if (channels != 96) throw InvalidConfig("config: standard net has 96 channels");
        if (input_length != 48000)
            throw InvalidConfig("config: standard net consumes 48,000 samples per channel");
        if (sections.size() != 13) throw InvalidConfig("config: standard net has 13 sections");
        for (int i = 0; i < 13; ++i) {
            if (sections[std::size_t(i)].pool != kPools[i] ||
                (sections[std::size_t(i)].pad_after == 1) != kPadded[i])
                throw InvalidConfig("config: section " + std::to_string(i + 1) +
                                    " deviates from the standard layout");
        }
        if (sections.back().l_out != 1)
            throw InvalidConfig("config: standard net must reduce to length 1");
    }
}

std::int64_t ModelConfig::parameter_count() const {
    std::int64_t total = 0;
    std::int64_t in_ch = input_channels;
    for (const auto& s : sections) {
        (void)s;
        total += std::int64_t(channels) * in_ch * 3 + channels;  // conv weights + offsets
        total += 2 * std::int64_t(channels);                     // gamma + beta
        in_ch = channels;
    }
    total += std::int64_t(n_targets) * latent_size() + n_targets;  // dense head
    return total;
}

NetDescription describe(const ModelConfig& config) {
    NetDescription d;
    d.latent_size = config.latent_size();
    d.n_targets = config.n_targets;
    std::int64_t in_ch = config.input_channels;
    for (const auto& s : config.sections) {
        SectionRow row;
        row.index = s.index;
        row.kind = (s.kind == SectionKind::PConvA ? "P Conv A-" : "Conv A-") +
                   std::to_string(s.pool);
        row.pool = s.pool;
        row.rate_hz = s.rate_hz;
        row.spacing_ms = s.spacing_ms;
        row.l_in = s.padded_in();
        row.l_out = s.l_out;
        row.conv_params = std::int64_t(config.channels) * in_ch * 3 + config.channels;
        row.norm_params = 2 * std::int64_t(config.channels);
        d.conv_total += row.conv_params;
        d.norm_total += row.norm_params;
        d.rows.push_back(std::move(row));
        in_ch = config.channels;
    }
    d.head_params = std::int64_t(config.n_targets) * config.latent_size() + config.n_targets;
    d.total = d.conv_total + d.norm_total + d.head_params;
    return d;
}

std::string format_description(const NetDescription& d) {
    auto num = [](double v) {
        char buf[32];
        if (v == double(std::int64_t(v)))
            std::snprintf(buf, sizeof buf, "%lld", (long long)(v));
        else
            std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    std::string out =
        "section  type        rate_hz   spacing_ms  l_in    l_out  conv_params  norm_params\n";
    for (const auto& r : d.rows) {
        char line[160];
        std::snprintf(line, sizeof line, "S%-7d %-11s %-9s %-11s %-7d %-6d %-12lld %lld\n",
                      r.index, r.kind.c_str(), num(r.rate_hz).c_str(), num(r.spacing_ms).c_str(),
                      r.l_in, r.l_out, (long long)r.conv_params, (long long)r.norm_params);
        out += line;
    }
    char tail[200];
    std::snprintf(tail, sizeof tail,
                  "dense head: %d x %d + %d = %lld parameters\n"
                  "totals: conv %lld, norm %lld, head %lld, all %lld\n",
                  d.n_targets, d.latent_size, d.n_targets, (long long)d.head_params,
                  (long long)d.conv_total, (long long)d.norm_total, (long long)d.head_params,
                  (long long)d.total);
    out += tail;
    return out;
}

}  // namespace wawenet
