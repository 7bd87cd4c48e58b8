#include "wawenet/analysis.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>

namespace wawenet {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Running-mean filter gain at frequency f: |sin(pi f m / fs) / (m sin(pi f / fs))|.
double pool_filter_gain(double f_hz, int m, double fs) {
    const double w = kPi * f_hz / fs;
    if (std::abs(std::sin(w)) < 1e-15) return 1.0;
    return std::abs(std::sin(double(m) * w) / (double(m) * std::sin(w)));
}

Eigen::Index nearest_bin(const Spectrum& s, double f_hz) {
    const auto b = Eigen::Index(std::lround(f_hz / s.bin_hz));
    if (b < 0 || b >= s.amplitude.size())
        throw InvalidConfig("spectrum bin out of range for " + std::to_string(f_hz) + " Hz");
    return b;
}

}  // namespace

const char* filter_shape_name(FilterShape s) {
    switch (s) {
        case FilterShape::Lowpass: return "lowpass";
        case FilterShape::Highpass: return "highpass";
        case FilterShape::Bandpass: return "bandpass";
        case FilterShape::Bandstop: return "bandstop";
    }
    throw InvalidConfig("filter_shape_name: unknown shape");
}

FilterClass classify_filter(const std::array<double, 3>& taps) {
    if (taps[0] == 0.0 && taps[1] == 0.0 && taps[2] == 0.0)
        throw DegenerateInput("classify_filter: all-zero kernel");

    FilterClass out;
    out.response.resize(kResponsePoints);
    Eigen::Index peak = 0;
    for (Eigen::Index j = 0; j < kResponsePoints; ++j) {
        const double w = kPi * double(j) / double(kResponsePoints - 1);
        const std::complex<double> e1 = std::polar(1.0, -w);
        const std::complex<double> h = taps[0] + e1 * (taps[1] + e1 * taps[2]);
        out.response[j] = std::abs(h);
        if (out.response[j] > out.response[peak]) peak = j;
    }

    const double g0 = out.response[0];
    const double gpi = out.response[kResponsePoints - 1];
    const double gmax = out.response[peak];
    if (g0 == gmax && gpi < 0.9 * g0)
        out.shape = FilterShape::Lowpass;
    else if (gpi == gmax && g0 < 0.9 * gpi)
        out.shape = FilterShape::Highpass;
    else if (g0 < gmax && gpi < gmax && g0 < 0.9 * gmax && gpi < 0.9 * gmax)
        out.shape = FilterShape::Bandpass;
    else
        out.shape = FilterShape::Bandstop;
    return out;
}

Spectrum amplitude_spectrum(std::span<const double> x, double sample_rate) {
    if (x.size() < 2) throw InvalidLength("amplitude_spectrum: need at least 2 samples");
    if (sample_rate <= 0.0) throw InvalidConfig("amplitude_spectrum: sample rate must be positive");
    const auto n = Eigen::Index(x.size());

    auto buf = std::vector<double>(x.begin(), x.end());
    auto spec = std::vector<std::complex<double>>(std::size_t(n / 2 + 1));
    fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), buf.data(),
                                          reinterpret_cast<fftw_complex*>(spec.data()),
                                          FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
    if (!plan) throw StateError("amplitude_spectrum: FFT plan failed");
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    Spectrum out;
    out.sample_rate = sample_rate;
    out.bin_hz = sample_rate / double(n);
    out.amplitude.resize(n / 2 + 1);
    for (Eigen::Index k = 0; k <= n / 2; ++k) {
        const double mag = std::abs(spec[std::size_t(k)]);
        const bool shared = k == 0 || (n % 2 == 0 && k == n / 2);
        out.amplitude[k] = (shared ? 1.0 : 2.0) * mag / double(n);
    }
    return out;
}

TwoToneDemo two_tone_demo(double f1, double f2, int m) {
    constexpr double kFs = 16000.0;
    constexpr int kN = 48000;  // divisible by every pool factor; 1/3 Hz bins
    if (!(f1 > 0.0) || !(f2 > 0.0) || f1 >= kFs / 2 || f2 >= kFs / 2)
        throw InvalidConfig("two_tone_demo: tone frequencies must lie below the Nyquist rate");
    if (f1 >= f2) throw InvalidConfig("two_tone_demo: need f1 < f2");
    if (m < 2 || m > 4) throw InvalidConfig("two_tone_demo: pool factor must be 2, 3, or 4");

    auto x1 = std::vector<double>(kN), x2 = std::vector<double>(kN);
    for (int k = 0; k < kN; ++k) {
        x1[std::size_t(k)] = std::sin(2.0 * kPi * f1 * k / kFs);
        x2[std::size_t(k)] = std::sin(2.0 * kPi * f2 * k / kFs);
    }

    auto sum = std::vector<double>(kN), joint = std::vector<double>(kN),
         separate = std::vector<double>(kN);
    for (int k = 0; k < kN; ++k) {
        const auto i = std::size_t(k);
        sum[i] = x1[i] + x2[i];
        joint[i] = std::max(sum[i], 0.0);
        separate[i] = std::max(x1[i], 0.0) + std::max(x2[i], 0.0);
    }

    auto pooled = std::vector<double>(std::size_t(kN / m));
    for (std::size_t k = 0; k < pooled.size(); ++k) {
        double acc = 0.0;
        for (int t = 0; t < m; ++t) acc += joint[k * std::size_t(m) + std::size_t(t)];
        pooled[k] = acc / m;
    }

    TwoToneDemo d;
    d.f1 = f1;
    d.f2 = f2;
    d.m = m;
    d.input = amplitude_spectrum(sum, kFs);
    d.rectified = amplitude_spectrum(joint, kFs);
    d.pooled = amplitude_spectrum(pooled, kFs / m);
    const Spectrum separate_spec = amplitude_spectrum(separate, kFs);

    d.intermod_hz = f2 - f1;
    d.joint_intermod = d.rectified.amplitude[nearest_bin(d.rectified, d.intermod_hz)];
    d.separate_intermod = separate_spec.amplitude[nearest_bin(separate_spec, d.intermod_hz)];
    d.intermod_db =
        20.0 * std::log10(d.joint_intermod / std::max(d.separate_intermod, 1e-300));
    d.input_dc = d.input.amplitude[0];
    d.rectified_dc = d.rectified.amplitude[0];

    // Strongest rectified component in the 5% band just above the new Nyquist
    // frequency, and the amplitude that survives at its folded position.
    const double new_nyquist = kFs / (2 * m);
    const Eigen::Index lo = nearest_bin(d.rectified, new_nyquist) + 1;
    const Eigen::Index hi = nearest_bin(d.rectified, new_nyquist * 1.05);
    if (hi <= lo) throw InvalidConfig("two_tone_demo: probe band is empty");
    Eigen::Index probe = lo;
    for (Eigen::Index b = lo; b <= hi; ++b)
        if (d.rectified.amplitude[b] > d.rectified.amplitude[probe]) probe = b;
    d.probe_hz = double(probe) * d.rectified.bin_hz;
    d.alias_hz = kFs / m - d.probe_hz;
    const double before = d.rectified.amplitude[probe];
    const double after = d.pooled.amplitude[nearest_bin(d.pooled, d.alias_hz)];
    d.alias_attenuation_db = 20.0 * std::log10(before / std::max(after, 1e-300));
    d.predicted_attenuation_db = -20.0 * std::log10(pool_filter_gain(d.probe_hz, m, kFs));
    return d;
}

}  // namespace wawenet
