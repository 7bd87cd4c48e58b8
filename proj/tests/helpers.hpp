#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "wawenet/model.hpp"
#include "wawenet/rng.hpp"

// Shared test utilities: deterministic random data and a central
// finite-difference harness for checking backward passes.

namespace testutil {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

template <typename Container>
void fill_gaussian(Container& c, wawenet::Rng& rng, double scale = 1.0) {
    for (auto& v : c) v = decltype(v + 0)(scale * rng.next_gaussian());
}

// Checks an analytic gradient against central differences. `params` lists
// every differentiable scalar (the backward result must use the same layout
// in `grads`), `eval` recomputes the scalar loss from current parameter
// values.
struct FdProblem {
    std::vector<std::span<double>> params;
    std::vector<std::span<const double>> grads;
    std::function<double()> eval;
};

inline double fd_max_rel_err(FdProblem& p, double step = 1e-6) {
    double worst = 0.0;
    for (std::size_t b = 0; b < p.params.size(); ++b) {
        for (std::size_t i = 0; i < p.params[b].size(); ++i) {
            double& x = p.params[b][i];
            const double keep = x;
            x = keep + step;
            const double up = p.eval();
            x = keep - step;
            const double down = p.eval();
            x = keep;
            const double fd = (up - down) / (2.0 * step);
            worst = std::max(worst, rel_err(p.grads[b][i], fd));
        }
    }
    return worst;
}

inline std::vector<float> tone(int samples, double freq, double amp, double fs = 16000.0) {
    auto y = std::vector<float>(std::size_t(samples));
    for (int i = 0; i < samples; ++i)
        y[std::size_t(i)] = float(amp * std::sin(2.0 * 3.141592653589793 * freq * i / fs));
    return y;
}

// Speech-shaped test material: harmonic bursts with slow amplitude modulation
// separated by silent gaps. Starts active so segment tests are predictable.
inline std::vector<float> speech_like(int samples, wawenet::Rng& rng, double amp = 0.05,
                                      double fs = 16000.0) {
    constexpr double kTau = 6.283185307179586;
    std::vector<float> y(std::size_t(samples), 0.0f);
    int i = 0;
    bool active = true;
    while (i < samples) {
        const int dur = active ? int((0.25 + 0.4 * rng.next_unit()) * fs)
                               : int((0.08 + 0.25 * rng.next_unit()) * fs);
        if (active) {
            const double f0 = 95.0 + 160.0 * rng.next_unit();
            const double a = amp * (0.6 + 0.8 * rng.next_unit());
            const double mod = 2.0 + 4.0 * rng.next_unit();
            const double p1 = kTau * rng.next_unit(), p2 = kTau * rng.next_unit(),
                         p3 = kTau * rng.next_unit(), pm = kTau * rng.next_unit();
            const int end = std::min(samples, i + dur);
            for (int j = i; j < end; ++j) {
                const double t = j / fs;
                const double env = 0.55 + 0.45 * std::sin(kTau * mod * t + pm);
                const double ramp = std::min({1.0, (j - i) / (0.01 * fs), (end - j) / (0.01 * fs)});
                y[std::size_t(j)] =
                    float(a * env * ramp *
                          (std::sin(kTau * f0 * t + p1) + 0.6 * std::sin(kTau * 2.0 * f0 * t + p2) +
                           0.35 * std::sin(kTau * 3.0 * f0 * t + p3)));
            }
        }
        i += dur;
        active = !active;
    }
    return y;
}

// Amplitude of the component at `freq`, by projection onto cos/sin.
inline double tone_amplitude(std::span<const float> x, double freq, double fs = 16000.0) {
    constexpr double kTau = 6.283185307179586;
    double c = 0.0, s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double ph = kTau * freq * double(i) / fs;
        c += double(x[i]) * std::cos(ph);
        s += double(x[i]) * std::sin(ph);
    }
    return 2.0 * std::hypot(c, s) / double(x.size());
}

// Freshly built nets carry default running statistics, under which deep
// activations decay to near zero. Tests that need activity of order one
// perturb the normalization parameters mildly.
template <typename T>
void randomize_norms(wawenet::Net<T>& net, wawenet::Rng& rng) {
    for (auto& s : net.sections) {
        for (Eigen::Index c = 0; c < s.gamma.size(); ++c) {
            s.gamma[c] = T(0.8 + 0.45 * rng.next_unit());
            s.beta[c] = T(0.2 * rng.next_gaussian());
            s.running_var[c] = T(0.8 + 0.45 * rng.next_unit());
            s.running_mean[c] = T(0.05 * rng.next_gaussian());
        }
    }
}

}  // namespace testutil
