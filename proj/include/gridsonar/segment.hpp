#pragma once

#include <string>
#include <vector>

#include "gridsonar/denoise.hpp"

namespace gridsonar {

struct TurningPoint {
    double time = 0.0;      // on the trace time axis
    size_t index = 0;       // baseband sample index
    double gap_ratio = 0.0; // enclosing C-extreme interval / average interval
};

// Knobs of the stillness detector that confirms and localizes turning
// points. A fingertip pause shows up as a sustained near-zero displacement
// of the C/O point; a path-length stationary point only grazes zero.
struct StillnessConfig {
    double smooth_window = 0.015;     // s, trace smoothing before differencing
    double span = 0.022;              // s, half-span of the displacement probe
    double median_window = 0.015;     // s, median filter on the displacement
    double min_still_duration = 0.045;   // s, shortest run that counts as a pause
    double min_motion_duration = 0.030;  // s, motion required between pauses
    double floor_factor = 2.0;        // threshold vs the still noise floor
    double motion_fraction = 0.06;    // threshold vs the typical motion level

    double blur() const { return span + 0.5 * smooth_window; }
};

struct SignalSegment {
    BasebandTrace trace;
    double start_time = 0.0;
    double end_time = 0.0;
    int ordinal = 0;
};

struct TurningPointResult {
    std::vector<TurningPoint> points;
    std::string diagnostic;  // empty when motion was analyzable
    std::vector<ExtremePoint> interlaced;  // post-repair extremes, for dumps
    double average_interval = 0.0;         // mean C-extreme interval
};

namespace segment_detail {

// Keeps channels alternating in time: within a run of same-channel extremes
// only the largest excursion survives. Operates on a static-removed trace,
// so excursion is the plain magnitude.
inline std::vector<ExtremePoint> interlace(std::vector<ExtremePoint> merged) {
    std::vector<ExtremePoint> out;
    for (const auto& e : merged) {
        if (!out.empty() && out.back().channel == e.channel) {
            if (std::abs(e.value) > std::abs(out.back().value)) out.back() = e;
            continue;
        }
        out.push_back(e);
    }
    return out;
}

// Smoothed displacement of the C/O point over +-span; zero while the
// fingertip rests, well above zero while it moves.
inline std::vector<double> displacement_series(const BasebandTrace& trace,
                                               const StillnessConfig& cfg) {
    const int w = std::max(1, static_cast<int>(std::lround(cfg.smooth_window * trace.rate)));
    const auto sc = moving_average(trace.c, w);
    const auto so = moving_average(trace.o, w);
    const int h = std::max(1, static_cast<int>(std::lround(cfg.span * trace.rate)));
    const int n = static_cast<int>(trace.size());
    std::vector<double> d(trace.size(), 0.0);
    // Edge samples would use truncated windows and read as noise; leave them
    // at zero so boundary rests stay attached to the trace ends.
    const int guard = h + w / 2;
    for (int k = guard; k < n - guard; ++k)
        d[static_cast<size_t>(k)] = std::hypot(sc[static_cast<size_t>(k + h)] - sc[static_cast<size_t>(k - h)],
                                               so[static_cast<size_t>(k + h)] - so[static_cast<size_t>(k - h)]);
    return d;
}

// Per-tone displacements summed: tone noise bands are independent, so the
// fingertip's motion adds coherently while the floor averages down.
inline std::vector<double> combined_displacement(const std::vector<BasebandTrace>& tones,
                                                 const StillnessConfig& cfg) {
    require(!tones.empty(), "segment: no traces");
    std::vector<double> total(tones.front().size(), 0.0);
    for (const auto& t : tones) {
        const auto d = displacement_series(t, cfg);
        require(d.size() == total.size(), "segment: tone traces differ in length");
        for (size_t i = 0; i < d.size(); ++i) total[i] += d[i];
    }
    return total;
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    const auto k = static_cast<size_t>(q * static_cast<double>(v.size() - 1));
    std::nth_element(v.begin(), v.begin() + static_cast<long>(k), v.end());
    return v[k];
}

inline std::vector<double> median_filter(const std::vector<double>& v, int width) {
    if (width <= 1 || v.size() < 3) return v;
    if (width % 2 == 0) ++width;
    const int half = width / 2;
    const int n = static_cast<int>(v.size());
    std::vector<double> out(v.size());
    std::vector<double> win;
    for (int i = 0; i < n; ++i) {
        const int lo = std::max(0, i - half), hi = std::min(n - 1, i + half);
        win.assign(v.begin() + lo, v.begin() + hi + 1);
        out[static_cast<size_t>(i)] = median(win);
    }
    return out;
}

struct StillRun {
    size_t begin = 0, end = 0;  // [begin, end)
    size_t center() const { return begin + (end - begin) / 2; }
};

// Maximal below-threshold runs bounded by real motion on both sides.
inline std::vector<StillRun> still_runs(const std::vector<double>& disp_raw,
                                        double rate, const StillnessConfig& cfg) {
    const auto disp = median_filter(
        disp_raw, std::max(1, static_cast<int>(std::lround(cfg.median_window * rate))));
    // The fingertip rests on the start dot before drawing, so the head of the
    // trace gives a direct reading of the still-noise level; the global
    // quantile is the fallback when that rest is absent.
    const auto guard = static_cast<size_t>(cfg.blur() * rate);
    const auto head_end =
        std::min(disp.size(), guard + static_cast<size_t>(0.1 * rate));
    std::vector<double> head(disp.begin() + static_cast<long>(std::min(guard, disp.size())),
                             disp.begin() + static_cast<long>(head_end));
    const double floor = std::min(median(head), quantile(disp, 0.15));
    const double motion = quantile(disp, 0.90);
    const double threshold =
        std::max({cfg.floor_factor * floor, cfg.motion_fraction * motion, 1e-300});
    if (motion <= threshold) return {};  // no resolvable motion at all

    const auto min_still = static_cast<size_t>(cfg.min_still_duration * rate);
    const auto min_motion = static_cast<size_t>(cfg.min_motion_duration * rate);
    const size_t n = disp.size();

    // Raw below-threshold runs, with sub-min_motion blips bridged.
    std::vector<StillRun> runs;
    size_t i = 0;
    while (i < n) {
        if (disp[i] >= threshold) {
            ++i;
            continue;
        }
        size_t j = i;
        while (j < n && disp[j] < threshold) ++j;
        if (!runs.empty() && i - runs.back().end < min_motion)
            runs.back().end = j;
        else
            runs.push_back({i, j});
        i = j;
    }

    // Motion-boundedness probes skip the blur ramp next to the run so they
    // sample the neighbouring stroke's plateau, not the transition.
    const auto blur = static_cast<size_t>(cfg.blur() * rate);
    const auto window_median = [&](size_t lo, size_t hi) {
        lo = std::min(lo, n);
        hi = std::min(hi, n);
        if (hi <= lo) return 0.0;
        std::vector<double> w(disp.begin() + static_cast<long>(lo),
                              disp.begin() + static_cast<long>(hi));
        return median(w);
    };

    std::vector<StillRun> out;
    for (const auto& r : runs) {
        if (r.end - r.begin < min_still) continue;
        if (r.begin == 0 || r.end == n) continue;  // edge rest, not a turn
        if (r.begin < min_motion + blur || r.end + min_motion + blur > n) continue;
        const double before =
            window_median(r.begin - blur - min_motion, r.begin - blur);
        const double after = window_median(r.end + blur, r.end + blur + min_motion);
        if (before >= threshold && after >= threshold) out.push_back(r);
    }
    return out;
}

}  // namespace segment_detail

// Turning Points Identification. Valid extremes of both channels are
// interlaced and the C-channel interval statistics computed; a turning point
// is reported where the fingertip demonstrably pauses. The stillness probe
// confirms and localizes candidates: oversized C intervals alone also arise
// from path-length stationary points and from strokes too short to produce
// extremes, which is why pauses are what gets trusted.
// `raw_tones` are the per-tone traces before static removal, when available.
// The stillness probe prefers them: displacement is translation-invariant
// and the raw traces are exactly constant while the fingertip rests, whereas
// the static-removed trace carries the slope of the interpolated static
// estimate through each pause. Multiple tones average the noise floor down.
inline TurningPointResult identify_turning_points(
    const BasebandTrace& trace, const LevdConfig& cfg, double turn_ratio = 3.0,
    const StillnessConfig& still = {},
    const std::vector<BasebandTrace>* raw_tones = nullptr) {
    require(turn_ratio > 1.0, "segment: turn ratio must exceed 1");
    TurningPointResult res;
    if (trace.size() < 8) {
        res.diagnostic = "too little motion";
        return res;
    }

    auto ec = levd_extrema(trace.c, trace.rate, cfg, 0);
    auto eo = levd_extrema(trace.o, trace.rate, cfg, 1);
    std::vector<ExtremePoint> merged;
    merged.reserve(ec.size() + eo.size());
    std::merge(ec.begin(), ec.end(), eo.begin(), eo.end(), std::back_inserter(merged),
               [](const ExtremePoint& a, const ExtremePoint& b) {
                   return a.index < b.index;
               });
    res.interlaced = segment_detail::interlace(std::move(merged));

    std::vector<size_t> c_idx;
    for (const auto& e : res.interlaced)
        if (e.channel == 0) c_idx.push_back(e.index);
    std::vector<double> gaps;
    for (size_t k = 0; k + 1 < c_idx.size(); ++k)
        gaps.push_back(static_cast<double>(c_idx[k + 1] - c_idx[k]) / trace.rate);
    res.average_interval = mean(gaps);

    const auto disp =
        raw_tones != nullptr && !raw_tones->empty()
            ? segment_detail::combined_displacement(*raw_tones, still)
            : segment_detail::displacement_series(trace, still);
    const auto pauses = segment_detail::still_runs(disp, trace.rate, still);

    if (pauses.empty()) {
        if (c_idx.size() < 4) res.diagnostic = "too little motion";
        return res;
    }

    for (const auto& run : pauses) {
        TurningPoint tp;
        tp.index = run.center();
        tp.time = trace.time_at(tp.index);
        // Interval the pause falls into, as a multiple of the average.
        if (res.average_interval > 0.0) {
            for (size_t k = 0; k + 1 < c_idx.size(); ++k) {
                if (c_idx[k] <= tp.index && tp.index < c_idx[k + 1]) {
                    const double gap =
                        static_cast<double>(c_idx[k + 1] - c_idx[k]) / trace.rate;
                    tp.gap_ratio = gap / res.average_interval;
                    break;
                }
            }
        }
        res.points.push_back(tp);
    }
    if (c_idx.size() < 4)
        res.diagnostic = "few valid extremes; turning points from stillness only";
    return res;
}

// Cuts the trace at the turning points: k points yield k+1 contiguous
// segments with ordinals 0..k.
inline std::vector<SignalSegment> segment_signal(const BasebandTrace& trace,
                                                 const std::vector<TurningPoint>& tps) {
    const size_t n = trace.size();
    std::vector<size_t> cuts;
    cuts.push_back(0);
    for (const auto& tp : tps) {
        require(tp.index < n, "segment: turning point outside trace");
        require(tp.index >= cuts.back(), "segment: turning points not sorted");
        cuts.push_back(tp.index);
    }
    cuts.push_back(n);

    std::vector<SignalSegment> out;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        SignalSegment seg;
        seg.trace.rate = trace.rate;
        seg.trace.tone = trace.tone;
        seg.trace.t0 = trace.time_at(cuts[k]);
        seg.trace.c.assign(trace.c.begin() + static_cast<long>(cuts[k]),
                           trace.c.begin() + static_cast<long>(cuts[k + 1]));
        seg.trace.o.assign(trace.o.begin() + static_cast<long>(cuts[k]),
                           trace.o.begin() + static_cast<long>(cuts[k + 1]));
        seg.start_time = trace.time_at(cuts[k]);
        seg.end_time = trace.time_at(cuts[k + 1]);
        seg.ordinal = static_cast<int>(k);
        out.push_back(std::move(seg));
    }
    return out;
}

}  // namespace gridsonar
