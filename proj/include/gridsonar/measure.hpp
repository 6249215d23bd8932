#pragma once

#include <vector>

#include "gridsonar/geometry.hpp"
#include "gridsonar/segment.hpp"

namespace gridsonar {

// Unit rotating degrees: the signed turn between successive chords of the
// C/O trace. Chord turns measure the phasor's rotation without referencing
// the plane origin, so a biased static estimate cannot corrupt them.
struct UrdSeries {
    std::vector<double> angles;       // degrees, one per interior point
    std::vector<size_t> indices;      // sample index of the vertex point
    std::vector<bool> degenerate;     // repeated identical points
};

inline UrdSeries compute_urd(const SignalSegment& segment) {
    const auto& c = segment.trace.c;
    const auto& o = segment.trace.o;
    const size_t n = c.size();
    require(n >= 3, "urd: segment needs at least 3 points");
    UrdSeries out;
    out.angles.reserve(n - 2);
    for (size_t i = 0; i + 2 < n; ++i) {
        const double ux = c[i + 1] - c[i], uy = o[i + 1] - o[i];
        const double vx = c[i + 2] - c[i + 1], vy = o[i + 2] - o[i + 1];
        const bool degen = (ux == 0.0 && uy == 0.0) || (vx == 0.0 && vy == 0.0);
        const double angle =
            degen ? 0.0
                  : std::atan2(ux * vy - uy * vx, ux * vx + uy * vy) * 180.0 / kPi;
        out.angles.push_back(angle);
        out.indices.push_back(i + 1);
        out.degenerate.push_back(degen);
    }
    return out;
}

struct RefinedSegment {
    SignalSegment segment;
    size_t trimmed_front = 0;
    size_t trimmed_back = 0;
    bool over_trim_warning = false;
};

// Startpoint/endpoint re-identification: URDs are steady while the fingertip
// moves, so leading and trailing points whose turn angle strays far from the
// segment's median are segmentation slop and get trimmed. A cap per side
// bounds the damage on short segments and an overall guard refuses to eat
// the segment.
inline RefinedSegment refine_endpoints(const SignalSegment& segment,
                                       double deviation_factor = 3.0,
                                       double side_cap = 0.15,
                                       double overall_cap = 0.30) {
    RefinedSegment out;
    out.segment = segment;
    const size_t n = segment.trace.size();
    if (n < 8) return out;

    const auto urd = compute_urd(segment);
    std::vector<double> mags;
    mags.reserve(urd.angles.size());
    for (double a : urd.angles) mags.push_back(std::abs(a));
    const double med = median(mags);
    if (med <= 0.0) return out;

    const auto deviant = [&](size_t j) {
        return std::abs(mags[j] - med) > deviation_factor * med;
    };
    const auto cap = static_cast<size_t>(side_cap * static_cast<double>(n));
    size_t front = 0;
    while (front < urd.angles.size() && front < cap && deviant(front)) ++front;
    size_t back = 0;
    while (back < urd.angles.size() && back < cap &&
           deviant(urd.angles.size() - 1 - back))
        ++back;

    if (front + back >
        static_cast<size_t>(overall_cap * static_cast<double>(n))) {
        out.over_trim_warning = true;
        return out;
    }
    if (front + back + 8 >= n) {
        out.over_trim_warning = true;
        return out;
    }

    out.trimmed_front = front;
    out.trimmed_back = back;
    auto& t = out.segment.trace;
    t.c.assign(segment.trace.c.begin() + static_cast<long>(front),
               segment.trace.c.end() - static_cast<long>(back));
    t.o.assign(segment.trace.o.begin() + static_cast<long>(front),
               segment.trace.o.end() - static_cast<long>(back));
    t.t0 = segment.trace.time_at(front);
    out.segment.start_time = t.t0;
    out.segment.end_time = t.time_at(t.size() - 1);
    return out;
}

// Path length change of the echo relative to the segment start:
// delta_d(t) = (-lambda / 2 pi) * (phi(t) - phi(start)).
struct PathLengthTrace {
    std::vector<double> delta_d;  // meters, first entry 0
    std::vector<double> times;    // seconds, trace time axis
    double tone = 0.0;
    int tone_count = 1;
};

namespace measure_detail {

// Ramer-Douglas-Peucker on the C/O polyline, extended with an along-chord
// overshoot test. A motion reversal retraces its own arc, which leaves no
// perpendicular deviation at all; the fold apex shows up instead as a point
// projecting far beyond the chord ends, and must become a vertex so the
// direction flip is visible to the turn accumulation.
inline std::vector<size_t> simplify_polyline(const std::vector<double>& x,
                                             const std::vector<double>& y,
                                             double tol) {
    const size_t n = x.size();
    std::vector<size_t> keep = {0, n - 1};
    std::vector<std::pair<size_t, size_t>> stack = {{0, n - 1}};
    while (!stack.empty()) {
        const auto [a, b] = stack.back();
        stack.pop_back();
        if (b <= a + 1) continue;
        const double cx = x[b] - x[a], cy = y[b] - y[a];
        const double clen = std::hypot(cx, cy);
        double worst = -1.0;
        size_t pick = a;
        for (size_t i = a + 1; i < b; ++i) {
            double dist;
            if (clen < 1e-300) {
                dist = std::hypot(x[i] - x[a], y[i] - y[a]);
            } else {
                const double perp =
                    std::abs((x[i] - x[a]) * cy - (y[i] - y[a]) * cx) / clen;
                const double along =
                    ((x[i] - x[a]) * cx + (y[i] - y[a]) * cy) / clen;
                const double overshoot = std::max({-along, along - clen, 0.0});
                dist = std::max(perp, overshoot);
            }
            if (dist > worst) {
                worst = dist;
                pick = i;
            }
        }
        if (worst > tol) {
            keep.push_back(pick);
            stack.push_back({a, pick});
            stack.push_back({pick, b});
        }
    }
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    return keep;
}

}  // namespace measure_detail

// Accumulates the phasor's rotation from signed chord turns at an adaptive
// scale: the polyline is first simplified at the noise tolerance so chord
// directions are meaningful both for fast sweeps and for strokes whose whole
// phase change is a fraction of a cycle. `noise_floor` is the baseband noise
// level of one channel (zero for clean traces).
inline PathLengthTrace path_length_change(const SignalSegment& segment,
                                          const CarrierSpec& carrier,
                                          double noise_floor = 0.0) {
    const auto& trace = segment.trace;
    const size_t n = trace.size();
    require(n >= 3, "measure: segment too short");
    require(trace.tone > 0.0, "measure: segment trace has no tone");
    const double lambda = carrier.wavelength(trace.tone);

    // Undersampling guard: the trace is static-removed, so its phasor is
    // roughly origin-centered and per-sample angle steps approaching a half
    // turn mean the baseband rate cannot follow the motion.
    {
        double scale = 0.0;
        for (size_t k = 0; k < n; ++k)
            scale = std::max(scale, std::hypot(trace.c[k], trace.o[k]));
        size_t checked = 0, near_half_turn = 0;
        for (size_t k = 0; k + 1 < n; ++k) {
            const double r0 = std::hypot(trace.c[k], trace.o[k]);
            const double r1 = std::hypot(trace.c[k + 1], trace.o[k + 1]);
            if (r0 < 0.2 * scale || r1 < 0.2 * scale) continue;
            double step = std::atan2(trace.o[k + 1], trace.c[k + 1]) -
                          std::atan2(trace.o[k], trace.c[k]);
            while (step > kPi) step -= 2.0 * kPi;
            while (step < -kPi) step += 2.0 * kPi;
            ++checked;
            if (std::abs(step) > 0.9 * kPi) ++near_half_turn;
        }
        if (checked >= 8 && near_half_turn * 4 > checked)
            fail("measure: undersampled motion");
    }

    // Light smoothing; the window is short against both pause and stroke
    // durations, so it suppresses noise without eating the geometry.
    const int w = std::max(1, static_cast<int>(std::lround(0.0115 * trace.rate)));
    const auto sc = moving_average(trace.c, w);
    const auto so = moving_average(trace.o, w);

    double span = 0.0;
    for (size_t i = 0; i < n; ++i)
        span = std::max({span, std::abs(sc[i]), std::abs(so[i])});

    // Tolerance for direction changes that count. Demodulation leaves faint
    // coherent residue even in a noiseless recording; while the fingertip
    // rests this residue is all that moves and its slow rotation must stay
    // below tolerance or it integrates into phantom phase. Rest samples sit
    // in the segment head (segments are cut at pause centers) and in the low
    // tail of the step-size distribution.
    std::vector<double> steps(n > 1 ? n - 1 : 0);
    for (size_t i = 0; i + 1 < n; ++i)
        steps[i] = std::hypot(sc[i + 1] - sc[i], so[i + 1] - so[i]);
    const auto head_len = std::min(steps.size(),
                                   static_cast<size_t>(std::max(3.0, 0.05 * trace.rate)));
    std::vector<double> head(steps.begin(), steps.begin() + static_cast<long>(head_len));
    const double dust = std::min(median(head), segment_detail::quantile(steps, 0.10));
    const double tol = std::clamp(
        std::max(3.0 * noise_floor / std::sqrt(static_cast<double>(w)), 8.0 * dust),
        1e-7 * span + 1e-300, 0.02 * span + 1e-300);

    const auto verts = measure_detail::simplify_polyline(sc, so, tol);
    const size_t m = verts.size() - 1;  // chord count

    // Signed turn at each interior vertex, plus chord lengths.
    std::vector<double> turn(verts.size(), 0.0);
    std::vector<double> len(m, 0.0);
    double px = 0.0, py = 0.0;
    bool have_prev = false;
    for (size_t j = 0; j < m; ++j) {
        const double ux = sc[verts[j + 1]] - sc[verts[j]];
        const double uy = so[verts[j + 1]] - so[verts[j]];
        len[j] = std::hypot(ux, uy);
        if (len[j] < 1e-300) continue;  // keep previous direction
        if (have_prev)
            turn[j] = std::atan2(px * uy - py * ux, px * ux + py * uy);
        px = ux;
        py = uy;
        have_prev = true;
    }

    // A turn near half a circle is a motion reversal: the fingertip's path
    // length passed an extremum and the phasor retraces its arc. The flip
    // itself carries no phase, so only the residue beyond half a turn counts.
    const auto phase_turn = [](double t) {
        if (std::abs(t) > 2.4) return t - (t > 0.0 ? kPi : -kPi);
        return t;
    };

    // Arc swept along chord j: the mean of the turns at its two end vertices.
    // End chords have one open vertex; their arc extrapolates the adjacent
    // turn scaled by the chord length ratio, which is exact on a steady arc
    // and vanishes for the short chord out of a rest cluster.
    const auto chord_arc = [&](size_t j) -> double {
        if (m == 1) return 0.0;
        if (j == 0)
            return len[1] > 0.0
                       ? phase_turn(turn[1]) * std::min(1.0, len[0] / len[1])
                       : 0.0;
        if (j == m - 1)
            return len[m - 2] > 0.0 ? phase_turn(turn[m - 1]) *
                                          std::min(1.0, len[m - 1] / len[m - 2])
                                    : 0.0;
        return 0.5 * (phase_turn(turn[j]) + phase_turn(turn[j + 1]));
    };

    std::vector<double> phi(n, 0.0);
    double acc = 0.0;
    for (size_t j = 0; j < m; ++j) {
        const double dphi = chord_arc(j);
        const size_t a = verts[j], b = verts[j + 1];
        for (size_t k = a + 1; k <= b; ++k) {
            const double u = static_cast<double>(k - a) / static_cast<double>(b - a);
            phi[k] = acc + u * dphi;
        }
        acc += dphi;
    }

    PathLengthTrace out;
    out.tone = trace.tone;
    out.delta_d.resize(n);
    out.times.resize(n);
    for (size_t k = 0; k < n; ++k) {
        out.delta_d[k] = -lambda / (2.0 * kPi) * phi[k];
        out.times[k] = trace.time_at(k);
    }
    return out;
}

// Per-tone traces measured on the same sample grid, averaged in meters.
inline PathLengthTrace average_path_traces(const std::vector<PathLengthTrace>& traces) {
    require(!traces.empty(), "measure: no traces to average");
    PathLengthTrace out = traces.front();
    for (size_t t = 1; t < traces.size(); ++t) {
        require(traces[t].delta_d.size() == out.delta_d.size(),
                "measure: tone traces differ in length");
        for (size_t k = 0; k < out.delta_d.size(); ++k)
            out.delta_d[k] += traces[t].delta_d[k];
    }
    const double inv = 1.0 / static_cast<double>(traces.size());
    for (auto& v : out.delta_d) v *= inv;
    out.tone = 0.0;
    out.tone_count = static_cast<int>(traces.size());
    return out;
}

// (d1, d2) split at the path-length minimum M (earliest index on ties).
inline FeatureVector extract_feature(const PathLengthTrace& plt, int pair) {
    require(!plt.delta_d.empty(), "measure: empty path length trace");
    size_t m = 0;
    for (size_t k = 1; k < plt.delta_d.size(); ++k)
        if (plt.delta_d[k] < plt.delta_d[m]) m = k;
    FeatureVector f;
    f.d1 = plt.delta_d[m] - plt.delta_d.front();
    f.d2 = plt.delta_d.back() - plt.delta_d[m];
    f.pair = pair;
    f.tone_count = plt.tone_count;
    return f;
}

}  // namespace gridsonar
