#include "wawenet/trainer.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace wawenet {

namespace {

bool is_constant(const std::vector<double>& v) {
    for (const double x : v)
        if (x != v[0]) return false;
    return true;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= double(n);
    mb /= double(n);
    double va = 0.0, vb = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        va += da * da;
        vb += db * db;
        cov += da * db;
    }
    return cov / std::sqrt(va * vb);
}

// Correlation for progress logs: 0 when one side is constant, as happens in
// the earliest epochs, rather than aborting the run.
double rho_or_zero(const std::vector<double>& a, const std::vector<double>& b) {
    if (is_constant(a) || is_constant(b)) return 0.0;
    return pearson(a, b);
}

TargetMetrics one_target(const std::vector<double>& est, const std::vector<double>& tgt,
                         double full_scale) {
    if (is_constant(est) || is_constant(tgt))
        throw DegenerateInput("metrics: constant series has no defined correlation");
    TargetMetrics m;
    m.rho = pearson(est, tgt);
    double sq = 0.0;
    for (std::size_t i = 0; i < est.size(); ++i) sq += (est[i] - tgt[i]) * (est[i] - tgt[i]);
    m.rmse = std::sqrt(sq / double(est.size()));
    m.nrmse_percent = m.rmse / full_scale * 100.0;
    return m;
}

}  // namespace

void schedule_update(TrainState& state, double val_el) {
    const float cur = float(val_el);
    if (state.best_val_el - cur >= 1e-4f) {
        state.best_val_el = cur;
        state.since_improvement = 0;
    } else if (++state.since_improvement >= 5) {
        state.lr *= 0.1;
        state.since_improvement = 0;
    }
}

FitResult fit(const NetF& init, const Dataset& train, const Dataset& val, const TrainConfig& cfg,
              const EpochCallback& on_epoch) {
    if (cfg.epochs < 1 || cfg.batch < 1 || !(cfg.lr > 0.0) || cfg.l2 < 0.0)
        throw InvalidConfig("fit: epochs and batch must be positive, lr > 0, l2 >= 0");
    if (train.inputs.empty() || val.inputs.empty())
        throw InvalidConfig("fit: training and validation splits must both be non-empty");
    const ModelConfig& mc = init.config;
    const int L = mc.input_length, ci = mc.input_channels, NT = mc.n_targets;
    const Eigen::Index need = Eigen::Index(ci) * L;
    auto check_split = [&](const Dataset& d, const char* name) {
        if (d.targets.rows() != Eigen::Index(d.inputs.size()) || d.targets.cols() != NT)
            throw InvalidShape(std::string("fit: ") + name +
                               " targets must be one row per item, one column per target");
        for (const auto& v : d.inputs)
            if (v.size() != need)
                throw InvalidShape(std::string("fit: ") + name + " item length " +
                                   std::to_string(v.size()) + ", expected " +
                                   std::to_string(need));
    };
    check_split(train, "train");
    check_split(val, "validation");

    FitResult R{init, TrainState{}};
    NetF& net = R.net;
    TrainState& st = R.state;
    st.lr = cfg.lr;
    const int threads = std::max(1, cfg.threads);

    Vec<float> flat = flatten_params(net);
    const int N = int(train.inputs.size());
    const int total = cfg.augment_ipa ? 2 * N : N;
    auto order = std::vector<int>(std::size_t(total));

    const int Nv = int(val.inputs.size());
    Mat<float> VE(NT, Nv);
    const auto val_ranges = detail::split_ranges(Nv, threads);

    Mat<float> bx, bt;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffler(derive_seed(cfg.seed, 0x65706f6368u, std::uint64_t(epoch)));
        shuffler.shuffle(order);

        double sq = 0.0;
        long long cnt = 0;
        int batches = 0;
        for (int at = 0; at < total; at += cfg.batch) {
            const int bsz = std::min(cfg.batch, total - at);
            bx.resize(ci, Eigen::Index(bsz) * L);
            bt.resize(NT, bsz);
            for (int k = 0; k < bsz; ++k) {
                const int idx = order[std::size_t(at + k)];
                const bool flip = idx >= N;
                const int item = flip ? idx - N : idx;
                Eigen::Map<const Mat<float>> m(train.inputs[std::size_t(item)].data(), ci, L);
                auto dst = bx.middleCols(Eigen::Index(k) * L, L);
                if (flip)
                    dst = -m;
                else
                    dst = m;
                bt.col(k) = train.targets.row(item).transpose().cast<float>();
            }
            assign_params(net, flat);
            const auto r = loss_and_grad(net, bx, bt, cfg.l2, threads);
            adam_step(st.adam, flat, r.grad, st.lr);
            sq += r.mse * double(bsz) * NT;
            cnt += (long long)bsz * NT;
            ++batches;
        }
        assign_params(net, flat);

        detail::run_ranges(val_ranges, [&](detail::Range rr) {
            for (int i = rr.begin; i < rr.end; ++i) {
                Eigen::Map<const Mat<float>> m(val.inputs[std::size_t(i)].data(), ci, L);
                VE.col(i) = forward(net, m);
            }
        });
        double vsq = 0.0;
        for (int i = 0; i < Nv; ++i)
            for (int t = 0; t < NT; ++t) {
                const double d = double(VE(t, i)) - val.targets(i, t);
                vsq += d * d;
            }
        EpochLog lg;
        lg.epoch = epoch;
        lg.lr = st.lr;
        lg.batches = batches;
        lg.train_el = std::sqrt(sq / double(cnt));
        lg.val_el = std::sqrt(vsq / (double(Nv) * NT));
        lg.val_rho.resize(std::size_t(NT));
        auto e = std::vector<double>(std::size_t(Nv));
        auto g = std::vector<double>(std::size_t(Nv));
        for (int t = 0; t < NT; ++t) {
            for (int i = 0; i < Nv; ++i) {
                e[std::size_t(i)] = double(VE(t, i));
                g[std::size_t(i)] = val.targets(i, t);
            }
            lg.val_rho[std::size_t(t)] = rho_or_zero(e, g);
        }
        st.log.push_back(lg);
        st.epoch = epoch;
        const bool keep_going = on_epoch ? on_epoch(lg) : true;
        if (!keep_going) break;
        schedule_update(st, lg.val_el);
    }
    net.training = false;
    return R;
}

MetricReport metrics(const Mat<double>& estimates, const Mat<double>& targets,
                     const std::vector<TargetSpec>& specs,
                     const std::vector<std::string>* conditions) {
    const Eigen::Index N = estimates.rows(), TN = estimates.cols();
    if (targets.rows() != N || targets.cols() != TN || Eigen::Index(specs.size()) != TN)
        throw InvalidShape("metrics: estimates, targets and specs must agree in shape");
    if (N < 2) throw InvalidLength("metrics: need at least two points");
    if (conditions && Eigen::Index(conditions->size()) != N)
        throw InvalidShape("metrics: one condition id per row");

    MetricReport rep;
    auto e = std::vector<double>(std::size_t(N));
    auto g = std::vector<double>(std::size_t(N));
    for (Eigen::Index t = 0; t < TN; ++t) {
        for (Eigen::Index i = 0; i < N; ++i) {
            e[std::size_t(i)] = estimates(i, t);
            g[std::size_t(i)] = targets(i, t);
        }
        rep.per_segment.push_back(one_target(e, g, specs[std::size_t(t)].full_scale));
    }
    if (!conditions) return rep;

    std::map<std::string, std::vector<Eigen::Index>> groups;
    for (Eigen::Index i = 0; i < N; ++i) {
        const std::string& id = (*conditions)[std::size_t(i)];
        if (id.empty()) throw InvalidConfig("metrics: empty condition id");
        groups[id].push_back(i);
    }
    if (groups.size() < 2) throw DegenerateInput("metrics: need at least two conditions");
    std::vector<double> ce(groups.size()), cg(groups.size());
    for (Eigen::Index t = 0; t < TN; ++t) {
        std::size_t k = 0;
        for (const auto& [id, rows] : groups) {
            (void)id;
            double se = 0.0, sg = 0.0;
            for (const Eigen::Index i : rows) {
                se += estimates(i, t);
                sg += targets(i, t);
            }
            ce[k] = se / double(rows.size());
            cg[k] = sg / double(rows.size());
            ++k;
        }
        rep.per_condition.push_back(one_target(ce, cg, specs[std::size_t(t)].full_scale));
    }
    return rep;
}

}  // namespace wawenet
