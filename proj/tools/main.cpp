// Command-line front end: segmentation, corpus synthesis, training,
// evaluation, and the signal-processing analysis artifacts.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wawenet/analysis.hpp"
#include "wawenet/impair.hpp"
#include "wawenet/io.hpp"
#include "wawenet/model.hpp"
#include "wawenet/preprocess.hpp"
#include "wawenet/trainer.hpp"

namespace fs = std::filesystem;
using namespace wawenet;

namespace {

// ---- shared emitters -------------------------------------------------------

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// Plot-data: one header line "<rows> <cols> <label;label;...>", then the
// matrix with full round-trip reals.
void write_plot_matrix(std::ostream& os, const Eigen::MatrixXd& m,
                       const std::vector<std::string>& labels) {
    os << m.rows() << ' ' << m.cols();
    if (!labels.empty()) os << ' ' << join(labels, ";");
    os << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ' ';
            os << format_real(m(r, c));
        }
        os << '\n';
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw StateError("cannot open " + path + " for writing");
    return os;
}

void warn_clipped(const std::string& path, std::size_t clipped) {
    if (clipped)
        std::cerr << "warning: " << path << ": " << clipped
                  << " samples outside [-1, 1] were clamped\n";
}

// ---- shared loaders --------------------------------------------------------

std::vector<float> load_wav(const std::string& path) { return wav_read(path).samples; }

// Record paths in saved manifests are resolved against the manifest's own
// directory when loaded, so store them relative to it.
std::string manifest_relative(const std::string& file, const std::string& manifest) {
    std::error_code ec;
    const fs::path rel =
        fs::relative(fs::absolute(file), fs::absolute(manifest).parent_path(), ec);
    return (ec || rel.empty()) ? fs::absolute(file).string() : rel.string();
}

std::vector<float> load_segment_file(const std::string& path) {
    std::vector<float> x = load_wav(path);
    if (int(x.size()) != kSegmentSamples)
        throw InvalidLength(path + ": expected a " + std::to_string(kSegmentSamples) +
                            "-sample segment, got " + std::to_string(x.size()));
    return x;
}

std::vector<int> target_indices(const Manifest& m, std::vector<std::string>& names) {
    if (names.empty()) names = m.target_names;
    auto idx = std::vector<int>();
    for (const auto& n : names) {
        const auto it = std::find(m.target_names.begin(), m.target_names.end(), n);
        if (it == m.target_names.end())
            throw InvalidConfig("target '" + n + "' is not a column of the manifest");
        idx.push_back(int(it - m.target_names.begin()));
    }
    return idx;
}

Split parse_split_filter(const std::string& tag) { return parse_split(tag); }

// ---- subcommand options ----------------------------------------------------

struct SegmentOpts {
    std::vector<std::string> files;
    std::string out_dir = ".";
    std::string manifest;
    std::string condition = "clean";
    std::string split = "train";
};

struct ImpairOpts {
    std::string manifest_in;
    std::string out_dir = ".";
    std::string manifest_out;
    std::vector<double> snr;
    std::vector<double> clip;
    std::vector<std::string> drop;
    bool lowpass = false;
    bool identity = false;
    std::uint64_t seed = 0;
};

struct TrainOpts {
    std::string manifest;
    std::string weights_out = "weights.bin";
    std::string log_path;
    std::vector<std::string> targets;
    std::uint64_t seed = 0;
    int epochs = 30;
    int batch = 60;
    bool ipa = true;
    double lr = 1e-4;
    double l2 = 1e-5;
    int threads = 1;
    double stop_rho = 2.0;  // > 1 never triggers
};

struct EvaluateOpts {
    std::string weights;
    std::vector<std::string> files;
    std::string manifest;
    std::string split = "test";
    std::vector<std::string> targets;
};

struct FeaturesOpts {
    std::string weights;
    std::vector<std::string> files;
};

struct DcFlowOpts {
    std::string weights;
    std::string file;
    int segment = 0;
};

struct FiltersOpts {
    std::string weights;
};

struct DemoOpts {
    double f1 = 345.0;
    double f2 = 6789.0;
    int pool = 2;
};

// ---- subcommands -----------------------------------------------------------

int run_segment(const SegmentOpts& o) {
    fs::create_directories(o.out_dir);
    const std::string manifest_path =
        o.manifest.empty() ? (fs::path(o.out_dir) / "manifest.csv").string() : o.manifest;
    const Split split = parse_split(o.split);

    Manifest m;
    auto used = std::set<std::string>();
    std::cout << "path,source,start_seconds,saf,active_level_dbov\n";
    for (const auto& file : o.files) {
        std::vector<Segment> segs;
        try {
            const std::vector<float> x = load_wav(file);
            segs = extract_segments(x);
        } catch (const Error& e) {
            std::cerr << "warning: " << file << ": " << e.what() << "\n";
            continue;
        }
        const std::string stem = fs::path(file).stem().string();
        for (std::size_t k = 0; k < segs.size(); ++k) {
            std::string name = stem + "_s" + std::to_string(k) + ".wav";
            for (int suffix = 2; used.count(name); ++suffix)
                name = stem + "_s" + std::to_string(k) + "_" + std::to_string(suffix) + ".wav";
            used.insert(name);
            const std::string out = (fs::path(o.out_dir) / name).string();
            warn_clipped(out, wav_write(out, segs[k].samples));
            m.records.push_back({manifest_relative(out, manifest_path), o.condition, split, {}});
            std::cout << out << ',' << file << ',' << format_real(segs[k].start_seconds) << ','
                      << format_real(segs[k].saf) << ','
                      << format_real(segs[k].active_level_dbov) << '\n';
        }
    }
    if (m.records.empty()) throw EmptyResult("no input file produced a qualifying segment");
    manifest_save(manifest_path, m);
    std::cerr << "wrote " << m.records.size() << " segments and " << manifest_path << "\n";
    return 0;
}

std::vector<Condition> build_conditions(const ImpairOpts& o) {
    auto conds = std::vector<Condition>();
    auto num = [](double v) {
        std::ostringstream ss;
        ss << v;
        return ss.str();
    };
    if (o.identity) conds.push_back({"clean", ImpairmentKind::Identity, 0, 1, 0, 0});
    for (const double s : o.snr)
        conds.push_back({"snr" + num(s), ImpairmentKind::Noise, s, 1, 0, 0});
    if (o.lowpass) conds.push_back({"lowpass", ImpairmentKind::Lowpass, 0, 1, 0, 0});
    for (const double c : o.clip)
        conds.push_back({"clip" + num(c), ImpairmentKind::Clip, 0, c, 0, 0});
    for (const std::string& d : o.drop) {
        const auto colon = d.find(':');
        const double rate = std::stod(d.substr(0, colon));
        const double burst = colon == std::string::npos ? 0.0 : std::stod(d.substr(colon + 1));
        conds.push_back({"drop" + num(rate) + (burst > 0 ? "b" + num(burst) : ""),
                         ImpairmentKind::FrameDrop, 0, 1, rate, burst});
    }
    if (conds.empty())
        throw InvalidConfig("no conditions: pass --snr, --lowpass, --clip, --drop, or --identity");
    return conds;
}

int run_impair(const ImpairOpts& o) {
    const Manifest in = manifest_load(o.manifest_in);
    const std::vector<Condition> conds = build_conditions(o);
    fs::create_directories(o.out_dir);
    const std::string manifest_path =
        o.manifest_out.empty() ? (fs::path(o.out_dir) / "impaired.csv").string() : o.manifest_out;

    auto clean = std::vector<std::vector<float>>();
    clean.reserve(in.records.size());
    for (const auto& r : in.records) clean.push_back(load_segment_file(r.path));

    const std::vector<SegmentRecord> corpus = make_corpus(clean, conds, o.seed);

    Manifest out;
    out.target_names = corpus_target_names();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const std::size_t si = i / conds.size();  // records are segment-major
        const std::string stem = fs::path(in.records[si].path).stem().string();
        const std::string path =
            (fs::path(o.out_dir) / (stem + "__" + corpus[i].condition + ".wav")).string();
        warn_clipped(path, wav_write(path, corpus[i].samples));
        out.records.push_back({manifest_relative(path, manifest_path), corpus[i].condition,
                               in.records[si].split, corpus[i].targets});
    }
    manifest_save(manifest_path, out);
    std::cerr << "wrote " << out.records.size() << " impaired segments and " << manifest_path
              << "\n";
    return 0;
}

Dataset dataset_for(const Manifest& m, Split split, const std::vector<int>& idx) {
    Dataset d;
    auto rows = std::vector<const ManifestRecord*>();
    for (const auto& r : m.records)
        if (r.split == split) rows.push_back(&r);
    d.targets.resize(Eigen::Index(rows.size()), Eigen::Index(idx.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::vector<float> x = load_segment_file(rows[i]->path);
        d.inputs.emplace_back(Eigen::Map<const Eigen::VectorXf>(x.data(), Eigen::Index(x.size())));
        d.conditions.push_back(rows[i]->condition);
        for (std::size_t t = 0; t < idx.size(); ++t)
            d.targets(Eigen::Index(i), Eigen::Index(t)) = rows[i]->targets[std::size_t(idx[t])];
    }
    return d;
}

int run_train(const TrainOpts& o) {
    const Manifest m = manifest_load(o.manifest);
    auto names = o.targets;
    const std::vector<int> idx = target_indices(m, names);

    const Dataset train = dataset_for(m, Split::Train, idx);
    const Dataset val = dataset_for(m, Split::Val, idx);

    TrainConfig tc;
    tc.epochs = o.epochs;
    tc.batch = o.batch;
    tc.seed = o.seed;
    tc.augment_ipa = o.ipa;
    tc.lr = o.lr;
    tc.l2 = o.l2;
    tc.threads = o.threads;

    const NetF init = build<float>(ModelConfig::standard(1, int(names.size())), o.seed);

    std::ofstream log;
    if (!o.log_path.empty()) log = open_out(o.log_path);
    auto header = std::string("epoch,lr,batches,train_el,val_el");
    for (const auto& n : names) header += ",rho_" + n;
    std::cout << header << '\n';
    if (log) log << header << '\n';

    auto emit = [&](const EpochLog& e) {
        std::string line = std::to_string(e.epoch) + ',' + format_real(e.lr) + ',' +
                           std::to_string(e.batches) + ',' + format_real(e.train_el) + ',' +
                           format_real(e.val_el);
        for (const double r : e.val_rho) line += ',' + format_real(r);
        std::cout << line << '\n';
        if (log) log << line << '\n';
        double worst = 1.0;
        for (const double r : e.val_rho) worst = std::min(worst, r);
        return worst < o.stop_rho;
    };

    const FitResult fr = fit(init, train, val, tc, emit);
    save_weights(o.weights_out, fr.net);
    std::cerr << "saved " << o.weights_out << " after " << fr.state.log.size() << " epochs\n";
    return 0;
}

// Estimates in native units when target names are known; the network is
// trained on [-1, 1] so raw outputs are clamped before mapping back.
std::vector<double> native_estimates(const Vec<float>& y,
                                     const std::vector<const TargetSpec*>& specs) {
    auto out = std::vector<double>(std::size_t(y.size()));
    for (Eigen::Index t = 0; t < y.size(); ++t) {
        if (specs.empty())
            out[std::size_t(t)] = double(y[t]);
        else
            out[std::size_t(t)] =
                from_unit_range(*specs[std::size_t(t)], std::clamp(double(y[t]), -1.0, 1.0));
    }
    return out;
}

int run_evaluate(const EvaluateOpts& o) {
    const NetF net = load_weights(o.weights);
    if (o.files.empty() == o.manifest.empty())
        throw InvalidConfig("pass audio files or --manifest (not both)");

    if (!o.files.empty()) {
        auto specs = std::vector<const TargetSpec*>();
        for (const auto& n : o.targets) specs.push_back(&find_target(n));
        if (!specs.empty() && int(specs.size()) != net.config.n_targets)
            throw InvalidConfig("--targets names " + std::to_string(specs.size()) +
                                " targets but the network estimates " +
                                std::to_string(net.config.n_targets));
        std::string header = "path,segment,start_seconds,saf,active_level_dbov";
        for (int t = 0; t < net.config.n_targets; ++t)
            header += ',' + (specs.empty() ? "y" + std::to_string(t) : specs[std::size_t(t)]->name);
        std::cout << header << '\n';
        for (const auto& file : o.files) {
            const std::vector<float> x = load_wav(file);
            const std::vector<Segment> segs = extract_segments(x);
            for (std::size_t k = 0; k < segs.size(); ++k) {
                const Vec<float> y = forward<float>(
                    net, std::span<const float>(segs[k].samples.data(), segs[k].samples.size()));
                std::cout << file << ',' << k << ',' << format_real(segs[k].start_seconds) << ','
                          << format_real(segs[k].saf) << ','
                          << format_real(segs[k].active_level_dbov);
                for (const double v : native_estimates(y, specs)) std::cout << ',' << format_real(v);
                std::cout << '\n';
            }
        }
        return 0;
    }

    const Manifest m = manifest_load(o.manifest);
    auto names = o.targets;
    const std::vector<int> idx = target_indices(m, names);
    if (int(names.size()) != net.config.n_targets)
        throw InvalidConfig("the network estimates " + std::to_string(net.config.n_targets) +
                            " targets; select as many with --targets");
    auto specs = std::vector<const TargetSpec*>();
    for (const auto& n : names) specs.push_back(&find_target(n));
    const Split split = parse_split_filter(o.split);

    auto rows = std::vector<const ManifestRecord*>();
    for (const auto& r : m.records)
        if (r.split == split) rows.push_back(&r);
    if (rows.empty()) throw EmptyResult("manifest has no '" + o.split + "' records");

    Mat<double> est(Eigen::Index(rows.size()), Eigen::Index(names.size()));
    Mat<double> tgt(Eigen::Index(rows.size()), Eigen::Index(names.size()));
    auto conditions = std::vector<std::string>();

    std::string header = "path,condition";
    for (const auto& n : names) header += ',' + n + "_estimate," + n + "_target";
    std::cout << header << '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::vector<float> x = load_segment_file(rows[i]->path);
        const Vec<float> y = forward<float>(net, std::span<const float>(x.data(), x.size()));
        const std::vector<double> e = native_estimates(y, specs);
        std::cout << rows[i]->path << ',' << rows[i]->condition;
        for (std::size_t t = 0; t < names.size(); ++t) {
            const double target =
                from_unit_range(*specs[t], rows[i]->targets[std::size_t(idx[t])]);
            est(Eigen::Index(i), Eigen::Index(t)) = e[t];
            tgt(Eigen::Index(i), Eigen::Index(t)) = target;
            std::cout << ',' << format_real(e[t]) << ',' << format_real(target);
        }
        std::cout << '\n';
        conditions.push_back(rows[i]->condition);
    }

    auto spec_values = std::vector<TargetSpec>();
    for (const auto* s : specs) spec_values.push_back(*s);
    const std::set<std::string> distinct(conditions.begin(), conditions.end());
    const MetricReport report =
        metrics(est, tgt, spec_values, distinct.size() >= 2 ? &conditions : nullptr);

    std::cout << "# per-segment\ntarget,rho,rmse,nrmse_percent\n";
    for (std::size_t t = 0; t < names.size(); ++t)
        std::cout << names[t] << ',' << format_real(report.per_segment[t].rho) << ','
                  << format_real(report.per_segment[t].rmse) << ','
                  << format_real(report.per_segment[t].nrmse_percent) << '\n';
    if (!report.per_condition.empty()) {
        std::cout << "# per-condition (" << distinct.size() << " conditions)\n"
                  << "target,rho,rmse,nrmse_percent\n";
        for (std::size_t t = 0; t < names.size(); ++t)
            std::cout << names[t] << ',' << format_real(report.per_condition[t].rho) << ','
                      << format_real(report.per_condition[t].rmse) << ','
                      << format_real(report.per_condition[t].nrmse_percent) << '\n';
    } else {
        std::cout << "# per-condition skipped: fewer than 2 conditions\n";
    }
    return 0;
}

int run_features(const FeaturesOpts& o) {
    const NetF net = load_weights(o.weights);
    std::string header = "path,segment,start_seconds";
    for (int d = 0; d < net.config.latent_size(); ++d) header += ",f" + std::to_string(d);
    std::cout << header << '\n';
    Vec<float> latent;
    for (const auto& file : o.files) {
        const std::vector<float> x = load_wav(file);
        const std::vector<Segment> segs = extract_segments(x);
        for (std::size_t k = 0; k < segs.size(); ++k) {
            forward<float>(net,
                           std::span<const float>(segs[k].samples.data(), segs[k].samples.size()),
                           &latent);
            std::cout << file << ',' << k << ',' << format_real(segs[k].start_seconds);
            for (Eigen::Index d = 0; d < latent.size(); ++d)
                std::cout << ',' << format_real(double(latent[d]));
            std::cout << '\n';
        }
    }
    return 0;
}

int run_dcflow(const DcFlowOpts& o) {
    const NetF net = load_weights(o.weights);
    const std::vector<float> x = load_wav(o.file);
    const std::vector<Segment> segs = extract_segments(x);
    if (o.segment < 0 || o.segment >= int(segs.size()))
        throw InvalidConfig("segment index " + std::to_string(o.segment) + " out of range; " +
                            o.file + " has " + std::to_string(segs.size()) + " segments");
    const Segment& seg = segs[std::size_t(o.segment)];
    const DcFlowMap map =
        dc_flow<float>(net, std::span<const float>(seg.samples.data(), seg.samples.size()));
    write_plot_matrix(std::cout, map.values, map.row_labels);
    return 0;
}

int run_filters(const FiltersOpts& o) {
    const NetF net = load_weights(o.weights);
    const FilterCensus census = filter_census(net);
    std::cout << "class,count,fraction\n";
    for (int k = 0; k < 4; ++k)
        std::cout << filter_shape_name(FilterShape(k)) << ',' << census.counts[std::size_t(k)]
                  << ',' << format_real(census.fractions[std::size_t(k)]) << '\n';
    return 0;
}

int run_demo(const DemoOpts& o) {
    const TwoToneDemo d = two_tone_demo(o.f1, o.f2, o.pool);
    std::cout << "# f1_hz " << format_real(d.f1) << "\n# f2_hz " << format_real(d.f2)
              << "\n# pool " << d.m << "\n# intermod_hz " << format_real(d.intermod_hz)
              << "\n# joint_intermod " << format_real(d.joint_intermod)
              << "\n# separate_intermod " << format_real(d.separate_intermod)
              << "\n# intermod_db " << format_real(d.intermod_db) << "\n# input_dc "
              << format_real(d.input_dc) << "\n# rectified_dc " << format_real(d.rectified_dc)
              << "\n# probe_hz " << format_real(d.probe_hz) << "\n# alias_hz "
              << format_real(d.alias_hz) << "\n# alias_attenuation_db "
              << format_real(d.alias_attenuation_db) << "\n# predicted_attenuation_db "
              << format_real(d.predicted_attenuation_db) << "\n";
    const auto emit = [](const std::string& name, const Spectrum& s) {
        Eigen::MatrixXd m(s.amplitude.size(), 2);
        for (Eigen::Index b = 0; b < s.amplitude.size(); ++b) {
            m(b, 0) = double(b) * s.bin_hz;
            m(b, 1) = s.amplitude[b];
        }
        std::cout << '\n';
        write_plot_matrix(std::cout, m, {name, "freq_hz", "amplitude"});
    };
    emit("input", d.input);
    emit("rectified", d.rectified);
    emit("pooled", d.pooled);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"waveform quality estimation: preprocessing, training, analysis"};
    app.require_subcommand(1);

    SegmentOpts seg;
    auto* seg_cmd = app.add_subcommand("segment", "cut audio into normalized 3 s segments");
    seg_cmd->add_option("files", seg.files, "input wav files")->required();
    seg_cmd->add_option("--out-dir", seg.out_dir, "directory for segment wavs");
    seg_cmd->add_option("--manifest", seg.manifest, "manifest path (default <out-dir>/manifest.csv)");
    seg_cmd->add_option("--condition", seg.condition, "condition id for the records");
    seg_cmd->add_option("--split", seg.split, "split tag: train|val|test|unseen");

    ImpairOpts imp;
    auto* imp_cmd = app.add_subcommand("impair", "cross clean segments with impairment conditions");
    imp_cmd->add_option("--manifest", imp.manifest_in, "manifest of clean segments")->required();
    imp_cmd->add_option("--out-dir", imp.out_dir, "directory for impaired wavs");
    imp_cmd->add_option("--manifest-out", imp.manifest_out,
                        "output manifest (default <out-dir>/impaired.csv)");
    imp_cmd->add_option("--snr", imp.snr, "additive-noise conditions at these SNRs (dB)");
    imp_cmd->add_flag("--lowpass", imp.lowpass, "add a 3.4 kHz lowpass condition");
    imp_cmd->add_option("--clip", imp.clip, "peak-clipping conditions at these levels");
    imp_cmd->add_option("--drop", imp.drop, "frame-drop conditions, rate or rate:burstiness");
    imp_cmd->add_flag("--identity", imp.identity, "add an unimpaired passthrough condition");
    imp_cmd->add_option("--seed", imp.seed, "corpus seed");

    TrainOpts tr;
    auto* tr_cmd = app.add_subcommand("train", "train a network on a manifest");
    tr_cmd->add_option("--manifest", tr.manifest, "manifest with train and val splits")->required();
    tr_cmd->add_option("--weights-out", tr.weights_out, "output weight file");
    tr_cmd->add_option("--log", tr.log_path, "epoch log file");
    tr_cmd->add_option("--targets", tr.targets, "target columns to train on (default: all)");
    tr_cmd->add_option("--seed", tr.seed, "initialization and shuffle seed");
    tr_cmd->add_option("--epochs", tr.epochs, "epoch budget");
    tr_cmd->add_option("--batch", tr.batch, "batch size");
    tr_cmd->add_flag("--ipa,!--no-ipa", tr.ipa, "polarity-inversion augmentation (default on)");
    tr_cmd->add_option("--lr", tr.lr, "initial learning rate");
    tr_cmd->add_option("--l2", tr.l2, "weight penalty");
    tr_cmd->add_option("--threads", tr.threads, "batch-parallel threads (same results)");
    tr_cmd->add_option("--stop-rho", tr.stop_rho,
                       "stop once every target's validation correlation reaches this");

    EvaluateOpts ev;
    auto* ev_cmd = app.add_subcommand("evaluate", "estimate targets for audio or a manifest");
    ev_cmd->add_option("--weights", ev.weights, "weight file")->required();
    ev_cmd->add_option("files", ev.files, "audio files to segment and evaluate");
    ev_cmd->add_option("--manifest", ev.manifest, "evaluate manifest records and report metrics");
    ev_cmd->add_option("--split", ev.split, "manifest split to evaluate (default test)");
    ev_cmd->add_option("--targets", ev.targets, "target names (for native units / metrics)");

    FeaturesOpts fe;
    auto* fe_cmd = app.add_subcommand("features", "emit per-segment latent vectors");
    fe_cmd->add_option("--weights", fe.weights, "weight file")->required();
    fe_cmd->add_option("files", fe.files, "audio files")->required();

    DcFlowOpts dc;
    auto* dc_cmd = app.add_subcommand("dcflow", "per-stage DC map for one segment");
    dc_cmd->add_option("--weights", dc.weights, "weight file")->required();
    dc_cmd->add_option("file", dc.file, "audio file")->required();
    dc_cmd->add_option("--segment", dc.segment, "segment index (default 0)");

    FiltersOpts fi;
    auto* fi_cmd = app.add_subcommand("filters", "classify every convolution kernel");
    fi_cmd->add_option("--weights", fi.weights, "weight file")->required();

    DemoOpts de;
    auto* de_cmd = app.add_subcommand("demo-two-tone",
                                      "rectification and pooling spectra for two tones");
    de_cmd->add_option("--f1", de.f1, "first tone (Hz)");
    de_cmd->add_option("--f2", de.f2, "second tone (Hz)");
    de_cmd->add_option("--pool", de.pool, "pool factor (2, 3, or 4)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*seg_cmd) return run_segment(seg);
        if (*imp_cmd) return run_impair(imp);
        if (*tr_cmd) return run_train(tr);
        if (*ev_cmd) return run_evaluate(ev);
        if (*fe_cmd) return run_features(fe);
        if (*dc_cmd) return run_dcflow(dc);
        if (*fi_cmd) return run_filters(fi);
        if (*de_cmd) return run_demo(de);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
