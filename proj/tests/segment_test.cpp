#include <gtest/gtest.h>

#include <cmath>

#include "gridsonar/pattern.hpp"
#include "gridsonar/segment.hpp"

using namespace gridsonar;

namespace {

struct Cooked {
    SampleBuffer rec;
    std::vector<BasebandTrace> raw;
    BasebandTrace trace;  // static-removed reference tone
};

Cooked cook(const std::vector<int>& pattern, const NoiseSpec& noise = {},
            std::uint64_t seed = 1, const ScenePlan& plan = {}) {
    Scene s = scene_from_pattern(reference_layout(), pattern, plan, {}, noise, seed);
    Cooked c;
    c.rec = trim_valid_signal(synthesize(s), s.touch_time, s.lift_time);
    DemodConfig cfg;
    c.raw = demod_all_tones(c.rec, s.carrier, cfg);
    c.trace = remove_static(c.raw[1], LevdConfig{});
    return c;
}

TEST(Tpi, ZPatternHasTwoTurningPoints) {
    const auto c = cook({1, 3, 7, 9});
    const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    ASSERT_EQ(res.points.size(), 2u);
    const auto truth = c.rec.annotations->turning_point_times();
    for (size_t k = 0; k < 2; ++k)
        EXPECT_NEAR(res.points[k].time, truth[k], 0.03);
}

TEST(Tpi, SingleLineHasNoTurningPoints) {
    const auto c = cook({1, 9});
    const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    EXPECT_TRUE(res.points.empty());
}

TEST(Tpi, FourLinePatternPausesLocatedWithin30ms) {
    const auto c = cook({7, 1, 5, 3, 9});
    const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    const auto truth = c.rec.annotations->turning_point_times();
    ASSERT_EQ(res.points.size(), 3u);
    ASSERT_EQ(truth.size(), 3u);
    for (size_t k = 0; k < truth.size(); ++k)
        EXPECT_NEAR(res.points[k].time, truth[k], 0.03);
}

TEST(Tpi, StaticTraceReportsTooLittleMotion) {
    Scene s = scene_from_pattern(reference_layout(), {1, 9});
    s.fingertip_gain = 0.0;
    auto rec = trim_valid_signal(synthesize(s), s.touch_time, s.lift_time);
    DemodConfig cfg;
    auto raw = demod_all_tones(rec, s.carrier, cfg);
    auto trace = remove_static(raw[1], LevdConfig{});
    const auto res = identify_turning_points(trace, LevdConfig{}, 3.0, {}, &raw);
    EXPECT_TRUE(res.points.empty());
    EXPECT_EQ(res.diagnostic, "too little motion");
}

TEST(Tpi, ExtraPauseAddsExactlyOneTurningPoint) {
    const auto base = cook({1, 3, 9});
    const auto with_extra = cook({1, 3, 5, 9});  // same span plus one more turn
    const auto r0 = identify_turning_points(base.trace, LevdConfig{}, 3.0, {}, &base.raw);
    const auto r1 = identify_turning_points(with_extra.trace, LevdConfig{}, 3.0, {},
                                            &with_extra.raw);
    EXPECT_EQ(r0.points.size() + 1, r1.points.size());
}

TEST(Tpi, AmplitudeScaleInvariance) {
    auto c = cook({1, 3, 7});
    const auto before = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    for (auto& t : c.raw)
        for (size_t i = 0; i < t.size(); ++i) {
            t.c[i] *= 250.0;
            t.o[i] *= 250.0;
        }
    for (size_t i = 0; i < c.trace.size(); ++i) {
        c.trace.c[i] *= 250.0;
        c.trace.o[i] *= 250.0;
    }
    const auto after = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    ASSERT_EQ(before.points.size(), after.points.size());
    for (size_t k = 0; k < before.points.size(); ++k)
        EXPECT_EQ(before.points[k].index, after.points[k].index);
}

TEST(Tpi, InterlacedExtremesAlternateChannels) {
    const auto c = cook({7, 3, 9});
    const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    for (size_t k = 1; k < res.interlaced.size(); ++k)
        EXPECT_NE(res.interlaced[k].channel, res.interlaced[k - 1].channel);
}

TEST(Segmentation, TurningPointsSplitIntoOrderedSegments) {
    const auto c = cook({1, 3, 7, 9});
    const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
    ASSERT_EQ(res.points.size(), 2u);
    const auto segs = segment_signal(c.trace, res.points);
    ASSERT_EQ(segs.size(), 3u);

    size_t total = 0;
    for (size_t k = 0; k < segs.size(); ++k) {
        EXPECT_EQ(segs[k].ordinal, static_cast<int>(k));
        EXPECT_GT(segs[k].trace.size(), 0u);
        total += segs[k].trace.size();
        if (k > 0) EXPECT_EQ(segs[k].start_time, segs[k - 1].end_time);
    }
    EXPECT_EQ(total, c.trace.size());

    // Segment boundaries sit inside the scripted pauses.
    const auto& dots = c.rec.annotations->dots;
    for (size_t k = 0; k + 1 < segs.size(); ++k) {
        const auto& pause_dot = dots[k + 1];
        EXPECT_GE(segs[k].end_time, pause_dot.arrival - 0.03);
        EXPECT_LE(segs[k].end_time, pause_dot.arrival + pause_dot.pause + 0.03);
    }
}

TEST(Segmentation, NoTurningPointsYieldsWholeTrace) {
    const auto c = cook({1, 9});
    const auto segs = segment_signal(c.trace, {});
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].trace.size(), c.trace.size());
}

TEST(Segmentation, RejectsOutOfRangeTurningPoint) {
    const auto c = cook({1, 9});
    TurningPoint bogus;
    bogus.index = c.trace.size() + 5;
    EXPECT_THROW(segment_signal(c.trace, {bogus}), Error);
}

TEST(Tpi, NoisyPatternsStillSegmentExactly) {
    NoiseSpec noise;
    noise.snr_db = 20.0;
    int exact = 0;
    std::mt19937_64 rng(99);
    for (int i = 0; i < 10; ++i) {
        const auto pat = random_stroke_pattern(rng, 2 + i % 4);
        const auto c = cook(pat, noise, 500 + i);
        const auto res = identify_turning_points(c.trace, LevdConfig{}, 3.0, {}, &c.raw);
        exact += res.points.size() == pat.size() - 2;
    }
    EXPECT_GE(exact, 8);
}

}  // namespace
