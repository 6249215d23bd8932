#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gridsonar/demod.hpp"

using namespace gridsonar;

namespace {

SampleBuffer tone_buffer(double amp, double freq, double fs, double seconds,
                         double delay = 0.0) {
    SampleBuffer b;
    b.sample_rate = fs;
    const auto n = static_cast<size_t>(seconds * fs);
    b.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        b.samples[i] = amp * std::sin(2.0 * kPi * freq * (t - delay));
    }
    return b;
}

CarrierSpec single_tone_carrier(double f = 19000.0) {
    CarrierSpec c;
    c.frequencies = {f};
    return c;
}

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

TEST(Demod, PureCarrierGivesDcCophase) {
    const auto carrier = single_tone_carrier();
    const double A = carrier.amplitude;
    const auto rec = tone_buffer(A, 19000.0, 48000.0, 0.5);
    DemodConfig cfg;
    cfg.tone = 19000.0;
    const auto trace = coherent_detect(rec, carrier, cfg);

    // Skip the settling region at both ends.
    const size_t lo = trace.size() / 5, hi = trace.size() * 4 / 5;
    for (size_t k = lo; k < hi; ++k) {
        EXPECT_NEAR(trace.c[k], A * A / 2.0, 0.01 * A * A / 2.0);
        EXPECT_NEAR(trace.o[k], 0.0, 0.01 * A * A / 2.0);
    }
}

TEST(Demod, DelayedCarrierRecoversPhase) {
    const auto carrier = single_tone_carrier();
    DemodConfig cfg;
    cfg.tone = 19000.0;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> ud(0.0, 1.0 / 19000.0);
    for (int trial = 0; trial < 3; ++trial) {
        const double tau = ud(rng);
        const auto rec = tone_buffer(carrier.amplitude, 19000.0, 48000.0, 0.4, tau);
        const auto trace = coherent_detect(rec, carrier, cfg);
        const size_t k = trace.size() / 2;
        const double measured = std::atan2(trace.o[k], trace.c[k]);
        const double expected = -2.0 * kPi * 19000.0 * tau;
        const double err = std::abs(wrap_angle(measured - expected));
        EXPECT_LT(err, 0.5 * kPi / 180.0) << "tau=" << tau;
    }
}

TEST(Demod, OutputLengthIsCeilOfInputOverFactor) {
    const auto carrier = single_tone_carrier();
    DemodConfig cfg;
    cfg.tone = 19000.0;
    for (size_t n : {24000u, 24001u, 24049u, 24050u}) {
        auto rec = tone_buffer(0.1, 19000.0, 48000.0, 1.0);
        rec.samples.resize(n);
        const auto trace = coherent_detect(rec, carrier, cfg);
        EXPECT_EQ(trace.size(),
                  (n + static_cast<size_t>(cfg.downsample_factor) - 1) /
                      static_cast<size_t>(cfg.downsample_factor));
    }
}

TEST(Demod, AllTonesProducesOneTracePerTone) {
    CarrierSpec carrier;  // three default tones
    Scene s = scene_from_pattern(reference_layout(), {1, 9}, {}, carrier);
    const auto rec = synthesize(s);
    DemodConfig cfg;
    const auto traces = demod_all_tones(rec, carrier, cfg);
    ASSERT_EQ(traces.size(), 3u);
    for (size_t i = 0; i < traces.size(); ++i) {
        EXPECT_EQ(traces[i].tone, carrier.frequencies[i]);
        EXPECT_EQ(traces[i].rate, 48000.0 / cfg.downsample_factor);
    }

    const auto single = single_tone_carrier(19000.0);
    const auto rec1 = tone_buffer(single.amplitude, 19000.0, 48000.0, 0.3);
    DemodConfig cfg1;
    cfg1.tone = 19000.0;
    const auto direct = coherent_detect(rec1, single, cfg1);
    const auto via_all = demod_all_tones(rec1, single, cfg1);
    ASSERT_EQ(via_all.size(), 1u);
    ASSERT_EQ(via_all[0].size(), direct.size());
    for (size_t k = 0; k < direct.size(); ++k) {
        EXPECT_EQ(via_all[0].c[k], direct.c[k]);
        EXPECT_EQ(via_all[0].o[k], direct.o[k]);
    }
}

TEST(Demod, StaticSceneConstantOnEveryTone) {
    Scene s = scene_from_pattern(reference_layout(), {1, 9});
    s.fingertip_gain = 0.0;
    s.static_reflectors.push_back({{0.05, 0.02, 0.01}, 0.2});
    const auto rec = synthesize(s);
    DemodConfig cfg;
    for (const auto& trace : demod_all_tones(rec, s.carrier, cfg)) {
        const double scale =
            std::abs(mean(trace.c)) + std::abs(mean(trace.o)) + 1e-30;
        EXPECT_LT(stddev(trace.c) / scale, 2e-3);
        EXPECT_LT(stddev(trace.o) / scale, 2e-3);
    }
}

TEST(Demod, Linearity) {
    const auto carrier = single_tone_carrier();
    DemodConfig cfg;
    cfg.tone = 19000.0;
    auto x = tone_buffer(0.1, 19000.0, 48000.0, 0.3, 1e-5);
    auto y = tone_buffer(0.1, 19000.0, 48000.0, 0.3, 3e-5);
    SampleBuffer mix;
    mix.sample_rate = 48000.0;
    mix.samples.resize(x.samples.size());
    const double a = 0.7, b = -1.3;
    for (size_t i = 0; i < mix.samples.size(); ++i)
        mix.samples[i] = a * x.samples[i] + b * y.samples[i];

    const auto tx = coherent_detect(x, carrier, cfg);
    const auto ty = coherent_detect(y, carrier, cfg);
    const auto tm = coherent_detect(mix, carrier, cfg);
    for (size_t k = 0; k < tm.size(); ++k) {
        EXPECT_NEAR(tm.c[k], a * tx.c[k] + b * ty.c[k], 1e-12);
        EXPECT_NEAR(tm.o[k], a * tx.o[k] + b * ty.o[k], 1e-12);
    }
}

TEST(Demod, ToneIsolationBelowMinus40dB) {
    CarrierSpec carrier;  // {18.5, 19, 19.5} kHz
    const auto rec = tone_buffer(carrier.amplitude, 19500.0, 48000.0, 0.5);
    DemodConfig at_own;
    at_own.tone = 19500.0;
    DemodConfig at_other;
    at_other.tone = 19000.0;
    const auto own = coherent_detect(rec, carrier, at_own);
    const auto leak = coherent_detect(rec, carrier, at_other);

    const size_t lo = own.size() / 5, hi = own.size() * 4 / 5;
    double own_mag = 0.0, leak_mag = 0.0;
    for (size_t k = lo; k < hi; ++k) {
        own_mag = std::max(own_mag, std::hypot(own.c[k], own.o[k]));
        leak_mag = std::max(leak_mag, std::hypot(leak.c[k], leak.o[k]));
    }
    EXPECT_LT(leak_mag / own_mag, 0.01);  // < -40 dB
}

TEST(Demod, InputValidation) {
    const auto carrier = single_tone_carrier();
    const auto rec = tone_buffer(0.1, 19000.0, 48000.0, 0.3);
    DemodConfig wrong_tone;
    wrong_tone.tone = 18500.0;
    EXPECT_THROW(coherent_detect(rec, carrier, wrong_tone), Error);

    auto tiny = rec;
    tiny.samples.resize(100);
    DemodConfig cfg;
    cfg.tone = 19000.0;
    EXPECT_THROW(coherent_detect(tiny, carrier, cfg), Error);

    auto wrong_rate = rec;
    wrong_rate.sample_rate = 44100.0;
    EXPECT_THROW(coherent_detect(wrong_rate, carrier, cfg), Error);
}

}  // namespace
