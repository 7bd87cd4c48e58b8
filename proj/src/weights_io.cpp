#include <bit>
#include <cstring>
#include <fstream>
#include <zlib.h>

#include "wawenet/errors.hpp"
#include "wawenet/io.hpp"

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

namespace wawenet {

namespace {

constexpr char kMagic[4] = {'W', 'A', 'W', 'E'};
constexpr std::uint16_t kVersion = 1;

struct RawHeader {
    char magic[4];
    std::uint16_t version;
    std::uint16_t reserved;
    double bn_epsilon;
    double bn_momentum;
    std::uint64_t parameter_count;
    std::uint32_t input_channels;
    std::uint32_t channels;
    std::uint32_t n_targets;
    std::uint32_t input_length;
    std::uint32_t n_sections;
    std::uint32_t reserved2 = 0;
};
static_assert(sizeof(RawHeader) == 56);

std::size_t payload_floats(const ModelConfig& cfg) {
    // trainable values plus running mean/variance per section
    return std::size_t(cfg.parameter_count()) +
           2 * std::size_t(cfg.channels) * cfg.sections.size();
}

std::uint32_t payload_crc(const std::vector<float>& payload) {
    return std::uint32_t(crc32(crc32(0L, Z_NULL, 0),
                               reinterpret_cast<const Bytef*>(payload.data()),
                               uInt(payload.size() * sizeof(float))));
}

void append_matrix_rowwise(std::vector<float>& out, const Mat<float>& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
}

void append_vector(std::vector<float>& out, const Vec<float>& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
}

RawHeader read_header(std::ifstream& f, const std::string& path) {
    RawHeader h{};
    if (!f.read(reinterpret_cast<char*>(&h), sizeof h))
        throw CorruptFile("weights: " + path + " is too short for a header");
    if (std::memcmp(h.magic, kMagic, 4) != 0)
        throw CorruptFile("weights: " + path + " has no WAWE magic");
    if (h.version != kVersion)
        throw UnsupportedVersion("weights: " + path + " uses format version " +
                                 std::to_string(h.version) + "; this build reads version 1");
    return h;
}

ModelConfig config_from_header(const RawHeader& h, const std::vector<std::uint32_t>& pools,
                               const std::vector<std::uint32_t>& pads) {
    // Prefer the canonical layout when the stored table matches it.
    ModelConfig std_cfg = ModelConfig::standard(int(h.input_channels), int(h.n_targets));
    bool canonical = std_cfg.channels == int(h.channels) &&
                     std_cfg.input_length == int(h.input_length) &&
                     std_cfg.sections.size() == h.n_sections;
    for (std::size_t s = 0; canonical && s < pools.size(); ++s)
        canonical = std_cfg.sections[s].pool == int(pools[s]) &&
                    std_cfg.sections[s].pad_after == int(pads[s]);
    if (canonical) {
        std_cfg.bn_epsilon = h.bn_epsilon;
        std_cfg.bn_momentum = h.bn_momentum;
        return std_cfg;
    }

    std::vector<SectionSpec> secs(h.n_sections);
    int len = int(h.input_length);
    double rate = 16000.0;
    for (std::size_t s = 0; s < secs.size(); ++s) {
        SectionSpec& spec = secs[s];
        spec.index = int(s) + 1;
        spec.pad_after = int(pads[s]);
        spec.kind = spec.pad_after > 0 ? SectionKind::PConvA : SectionKind::ConvA;
        spec.pool = int(pools[s]);
        spec.l_in = len;
        const int padded = len + spec.pad_after;
        if (spec.pool <= 0 || padded % spec.pool != 0)
            throw CorruptFile("weights: section " + std::to_string(s + 1) +
                              " pool does not divide its input length");
        spec.l_out = padded / spec.pool;
        spec.rate_hz = rate;
        spec.spacing_ms = 1000.0 / rate;
        rate /= spec.pool;
        len = spec.l_out;
    }
    ModelConfig cfg = ModelConfig::custom(int(h.input_channels), int(h.channels),
                                          int(h.n_targets), int(h.input_length), secs);
    cfg.bn_epsilon = h.bn_epsilon;
    cfg.bn_momentum = h.bn_momentum;
    return cfg;
}

}  // namespace

void save_weights(const std::string& path, const NetF& net) {
    const ModelConfig& cfg = net.config;
    RawHeader h{};
    std::memcpy(h.magic, kMagic, 4);
    h.version = kVersion;
    h.input_channels = std::uint32_t(cfg.input_channels);
    h.channels = std::uint32_t(cfg.channels);
    h.n_targets = std::uint32_t(cfg.n_targets);
    h.input_length = std::uint32_t(cfg.input_length);
    h.n_sections = std::uint32_t(cfg.sections.size());
    h.bn_epsilon = cfg.bn_epsilon;
    h.bn_momentum = cfg.bn_momentum;
    h.parameter_count = std::uint64_t(cfg.parameter_count());

    std::vector<float> payload;
    payload.reserve(payload_floats(cfg));
    for (const auto& s : net.sections) {
        for (Eigen::Index oc = 0; oc < s.taps[0].rows(); ++oc)
            for (Eigen::Index ic = 0; ic < s.taps[0].cols(); ++ic)
                for (int d = 0; d < 3; ++d) payload.push_back(s.taps[std::size_t(d)](oc, ic));
        append_vector(payload, s.offset);
        append_vector(payload, s.gamma);
        append_vector(payload, s.beta);
        append_vector(payload, s.running_mean);
        append_vector(payload, s.running_var);
    }
    append_matrix_rowwise(payload, net.head.W);
    append_vector(payload, net.head.offset);
    if (payload.size() != payload_floats(cfg))
        throw InvalidShape("save_weights: payload does not match the declared layout");

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("save_weights: cannot open " + path);
    f.write(reinterpret_cast<const char*>(&h), sizeof h);
    for (const auto& spec : cfg.sections) {
        const std::uint32_t pool = std::uint32_t(spec.pool);
        const std::uint32_t pad = std::uint32_t(spec.pad_after);
        f.write(reinterpret_cast<const char*>(&pool), 4);
        f.write(reinterpret_cast<const char*>(&pad), 4);
    }
    f.write(reinterpret_cast<const char*>(payload.data()),
            std::streamsize(payload.size() * sizeof(float)));
    const std::uint32_t crc = payload_crc(payload);
    f.write(reinterpret_cast<const char*>(&crc), 4);
    if (!f) throw Error("save_weights: write failed for " + path);
}

NetF load_weights(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("load_weights: cannot open " + path);
    const RawHeader h = read_header(f, path);

    std::vector<std::uint32_t> pools(h.n_sections), pads(h.n_sections);
    for (std::size_t s = 0; s < h.n_sections; ++s) {
        if (!f.read(reinterpret_cast<char*>(&pools[s]), 4) ||
            !f.read(reinterpret_cast<char*>(&pads[s]), 4))
            throw CorruptFile("weights: " + path + " truncated in the section table");
    }

    const ModelConfig cfg = config_from_header(h, pools, pads);
    if (std::uint64_t(cfg.parameter_count()) != h.parameter_count)
        throw CorruptFile("weights: " + path + " declares " + std::to_string(h.parameter_count) +
                          " parameters but its layout implies " +
                          std::to_string(cfg.parameter_count()));

    std::vector<float> payload(payload_floats(cfg));
    if (!f.read(reinterpret_cast<char*>(payload.data()),
                std::streamsize(payload.size() * sizeof(float))))
        throw CorruptFile("weights: " + path + " truncated in the payload");
    std::uint32_t stored_crc = 0;
    if (!f.read(reinterpret_cast<char*>(&stored_crc), 4))
        throw CorruptFile("weights: " + path + " is missing its checksum");
    if (stored_crc != payload_crc(payload))
        throw CorruptFile("weights: " + path + " fails its checksum");

    NetF net = build<float>(cfg, 0);
    std::size_t at = 0;
    auto take = [&]() { return payload[at++]; };
    for (auto& s : net.sections) {
        for (Eigen::Index oc = 0; oc < s.taps[0].rows(); ++oc)
            for (Eigen::Index ic = 0; ic < s.taps[0].cols(); ++ic)
                for (int d = 0; d < 3; ++d) s.taps[std::size_t(d)](oc, ic) = take();
        for (Eigen::Index i = 0; i < s.offset.size(); ++i) s.offset[i] = take();
        for (Eigen::Index i = 0; i < s.gamma.size(); ++i) s.gamma[i] = take();
        for (Eigen::Index i = 0; i < s.beta.size(); ++i) s.beta[i] = take();
        for (Eigen::Index i = 0; i < s.running_mean.size(); ++i) s.running_mean[i] = take();
        for (Eigen::Index i = 0; i < s.running_var.size(); ++i) s.running_var[i] = take();
    }
    for (Eigen::Index r = 0; r < net.head.W.rows(); ++r)
        for (Eigen::Index c = 0; c < net.head.W.cols(); ++c) net.head.W(r, c) = take();
    for (Eigen::Index i = 0; i < net.head.offset.size(); ++i) net.head.offset[i] = take();
    return net;
}

WeightFileInfo read_weight_info(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("read_weight_info: cannot open " + path);
    const RawHeader h = read_header(f, path);
    WeightFileInfo info;
    info.version = h.version;
    info.input_channels = h.input_channels;
    info.channels = h.channels;
    info.n_targets = h.n_targets;
    info.input_length = h.input_length;
    info.n_sections = h.n_sections;
    info.bn_epsilon = h.bn_epsilon;
    info.bn_momentum = h.bn_momentum;
    info.parameter_count = h.parameter_count;
    return info;
}

}  // namespace wawenet
