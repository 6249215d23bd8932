#pragma once

#include <vector>

#include "gridsonar/synth.hpp"

namespace gridsonar {

struct DemodConfig {
    double lowpass_cutoff = 200.0;
    int filter_taps = 512;
    // 48 kHz -> 1 kHz baseband. With 500 Hz tone spacing the inter-tone
    // mixing products land exactly at DC and at Nyquist after decimation,
    // where static removal and smoothing absorb them; a factor that puts
    // them inside the motion band corrupts sub-wavelength strokes.
    int downsample_factor = 48;
    double tone = 19000.0;  // one demodulation run per tone

    void validate() const {
        require(lowpass_cutoff > 0.0 && lowpass_cutoff < tone,
                "demod: cutoff must be positive and below the tone");
        require(filter_taps >= 8, "demod: too few filter taps");
        require(downsample_factor >= 1, "demod: downsample factor must be >= 1");
    }
};

// Baseband pair after coherent detection: C = cophase, O = orthogonal.
struct BasebandTrace {
    std::vector<double> c;
    std::vector<double> o;
    double rate = 0.0;
    double tone = 0.0;
    double t0 = 0.0;  // time of sample 0, group-delay compensated

    size_t size() const { return c.size(); }
    double time_at(size_t k) const { return t0 + static_cast<double>(k) / rate; }
};

// Linear-phase lowpass: Hamming-windowed sinc, unit DC gain.
inline std::vector<double> design_lowpass(double cutoff, double sample_rate,
                                          int taps) {
    std::vector<double> h(static_cast<size_t>(taps));
    const double fc = cutoff / sample_rate;
    const double mid = (taps - 1) / 2.0;
    double sum = 0.0;
    for (int m = 0; m < taps; ++m) {
        const double x = m - mid;
        const double sinc =
            x == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * x) / (kPi * x);
        const double win = 0.54 - 0.46 * std::cos(2.0 * kPi * m / (taps - 1));
        h[static_cast<size_t>(m)] = sinc * win;
        sum += h[static_cast<size_t>(m)];
    }
    for (auto& v : h) v /= sum;
    return h;
}

namespace demod_detail {

// Small dense solver for the tone-fit normal equations.
inline std::vector<double> solve_spd(std::vector<std::vector<double>> a,
                                     std::vector<double> b) {
    const size_t n = b.size();
    for (size_t i = 0; i < n; ++i) a[i][i] += 1e-12;
    for (size_t col = 0; col < n; ++col) {
        size_t piv = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        const double d = a[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / d;
            for (size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double s = b[i];
        for (size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

// Extends the recording by `ext` samples on both sides with a least-squares
// fit of the carrier tones over the adjacent `window` samples. The static
// part of the signal (line of sight, fixed reflectors) continues exactly, so
// filter windows that straddle the buffer ends see no discontinuity.
inline std::vector<double> extend_with_tone_fit(const std::vector<double>& x,
                                                double fs,
                                                const std::vector<double>& tones,
                                                int ext, int window) {
    const int n = static_cast<int>(x.size());
    window = std::min(window, n);
    const size_t dim = 2 * tones.size();
    std::vector<double> w(tones.size());
    for (size_t f = 0; f < tones.size(); ++f) w[f] = 2.0 * kPi * tones[f] / fs;

    const auto fit = [&](int begin) {
        std::vector<std::vector<double>> ata(dim, std::vector<double>(dim, 0.0));
        std::vector<double> atb(dim, 0.0), basis(dim);
        for (int i = begin; i < begin + window; ++i) {
            for (size_t f = 0; f < tones.size(); ++f) {
                basis[2 * f] = std::sin(w[f] * i);
                basis[2 * f + 1] = std::cos(w[f] * i);
            }
            for (size_t r = 0; r < dim; ++r) {
                for (size_t c = r; c < dim; ++c) ata[r][c] += basis[r] * basis[c];
                atb[r] += basis[r] * x[static_cast<size_t>(i)];
            }
        }
        for (size_t r = 0; r < dim; ++r)
            for (size_t c = 0; c < r; ++c) ata[r][c] = ata[c][r];
        return solve_spd(std::move(ata), std::move(atb));
    };
    const auto eval = [&](const std::vector<double>& coef, int i) {
        double s = 0.0;
        for (size_t f = 0; f < tones.size(); ++f)
            s += coef[2 * f] * std::sin(w[f] * i) + coef[2 * f + 1] * std::cos(w[f] * i);
        return s;
    };

    const auto left = fit(0);
    const auto right = fit(n - window);
    std::vector<double> out(static_cast<size_t>(n + 2 * ext));
    for (int i = 0; i < ext; ++i) out[static_cast<size_t>(i)] = eval(left, i - ext);
    std::copy(x.begin(), x.end(), out.begin() + ext);
    for (int i = 0; i < ext; ++i)
        out[static_cast<size_t>(n + ext + i)] = eval(right, n + i);
    return out;
}

// Lowpass + decimate evaluated only at output points; `pad` extra samples are
// present at both ends of x so every window is fully populated.
inline std::vector<double> filter_decimate(const std::vector<double>& x, int pad,
                                           const std::vector<double>& h, int factor) {
    const int n = static_cast<int>(x.size()) - 2 * pad;
    const int taps = static_cast<int>(h.size());
    const int offset = taps / 2 - 1;  // integer part of the group delay
    const auto out_len = static_cast<size_t>((n + factor - 1) / factor);
    std::vector<double> out(out_len);
    for (size_t k = 0; k < out_len; ++k) {
        const int p = static_cast<int>(k) * factor + offset + pad;
        double acc = 0.0;
        for (int m = 0; m < taps; ++m)
            acc += h[static_cast<size_t>(m)] * x[static_cast<size_t>(p - m)];
        out[k] = acc;
    }
    return out;
}

}  // namespace demod_detail

// C(t) = downsample(lowpass(R(t) * A sin 2*pi*f*t)), O likewise with cosine.
// The mixer phase reference is sample 0 of the buffer (played and recorded
// signals share one clock).
inline BasebandTrace coherent_detect(const SampleBuffer& rec,
                                     const CarrierSpec& carrier,
                                     const DemodConfig& cfg) {
    carrier.validate();
    cfg.validate();
    require(rec.sample_rate == carrier.sample_rate,
            "demod: buffer sample rate does not match carrier spec");
    require(carrier.has_tone(cfg.tone), "demod: tone not in carrier set");
    require(rec.samples.size() >= static_cast<size_t>(cfg.filter_taps),
            "demod: buffer shorter than filter length");

    const double fs = rec.sample_rate;
    const double w = 2.0 * kPi * cfg.tone / fs;
    const double A = carrier.amplitude;
    const int pad = cfg.filter_taps / 2 + 2;
    const auto ext = demod_detail::extend_with_tone_fit(
        rec.samples, fs, carrier.frequencies, pad, 2048);
    const size_t n = ext.size();
    std::vector<double> xc(n), xo(n);
    for (size_t i = 0; i < n; ++i) {
        const double ph = w * (static_cast<double>(i) - pad);
        xc[i] = ext[i] * A * std::sin(ph);
        xo[i] = ext[i] * A * std::cos(ph);
    }

    const auto h = design_lowpass(cfg.lowpass_cutoff, fs, cfg.filter_taps);
    BasebandTrace out;
    out.c = demod_detail::filter_decimate(xc, pad, h, cfg.downsample_factor);
    out.o = demod_detail::filter_decimate(xo, pad, h, cfg.downsample_factor);
    out.rate = fs / cfg.downsample_factor;
    out.tone = cfg.tone;
    // Output k sits at input index k*factor + taps/2-1 minus the (taps-1)/2
    // group delay: a constant half-sample lead.
    out.t0 = (cfg.filter_taps / 2 - 1 - (cfg.filter_taps - 1) / 2.0) / fs;
    return out;
}

inline std::vector<BasebandTrace> demod_all_tones(const SampleBuffer& rec,
                                                  const CarrierSpec& carrier,
                                                  const DemodConfig& cfg) {
    std::vector<BasebandTrace> traces;
    traces.reserve(carrier.frequencies.size());
    for (double f : carrier.frequencies) {
        DemodConfig per_tone = cfg;
        per_tone.tone = f;
        traces.push_back(coherent_detect(rec, carrier, per_tone));
    }
    return traces;
}

}  // namespace gridsonar
