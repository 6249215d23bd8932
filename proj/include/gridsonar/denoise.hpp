#pragma once

#include <vector>

#include "gridsonar/demod.hpp"

namespace gridsonar {

struct LevdConfig {
    // Debounce seed: a new extreme must arrive at least this long after the
    // previously accepted one. Adapts to the observed rhythm as extremes are
    // accepted.
    double initial_interval_threshold = 0.004;
    // Amplitude gate T_d; a value <= 0 means "derive from the trace" (see
    // resolved_for). Explicit values must be positive.
    double difference_threshold = 0.0;

    void validate() const {
        require(initial_interval_threshold > 0.0, "levd: interval seed must be > 0");
    }

    LevdConfig resolved_for(const std::vector<double>& series, double rate) const {
        LevdConfig r = *this;
        if (r.difference_threshold <= 0.0)
            r.difference_threshold = auto_difference_threshold(series, rate);
        return r;
    }

    // T_d default: 5x the noise floor measured over the first 50 ms (the
    // fingertip rests there), with a relative floor so noiseless traces
    // still reject numerical dust.
    static double auto_difference_threshold(const std::vector<double>& series,
                                            double rate) {
        const auto head = static_cast<size_t>(
            std::min<double>(static_cast<double>(series.size()), 0.05 * rate));
        std::vector<double> first(series.begin(),
                                  series.begin() + static_cast<long>(head));
        const double noise = stddev(first);
        const double scale = stddev(series);
        return std::max({5.0 * noise, 1e-6 * scale, 1e-12});
    }
};

enum class ExtremeKind { maximum, minimum };

struct ExtremePoint {
    size_t index = 0;
    double time = 0.0;
    double value = 0.0;
    ExtremeKind kind = ExtremeKind::maximum;
    int channel = 0;  // 0 = C, 1 = O
};

namespace levd_detail {

// Raw alternating local extremes; plateaus credit their first sample.
inline std::vector<ExtremePoint> raw_extrema(const std::vector<double>& s) {
    std::vector<ExtremePoint> out;
    const size_t n = s.size();
    if (n < 3) return out;

    // Compress runs of equal values, keeping the first index of each run.
    std::vector<size_t> idx;
    idx.reserve(n);
    idx.push_back(0);
    for (size_t i = 1; i < n; ++i)
        if (s[i] != s[idx.back()]) idx.push_back(i);
    for (size_t k = 1; k + 1 < idx.size(); ++k) {
        const double prev = s[idx[k - 1]], cur = s[idx[k]], next = s[idx[k + 1]];
        if (cur > prev && cur > next)
            out.push_back({idx[k], 0.0, cur, ExtremeKind::maximum, 0});
        else if (cur < prev && cur < next)
            out.push_back({idx[k], 0.0, cur, ExtremeKind::minimum, 0});
    }
    return out;
}

}  // namespace levd_detail

// Local Extreme Value Detection. A candidate extreme is accepted when it is
// separated from the previously accepted one by more than the interval
// threshold and differs in amplitude by more than T_d. Same-kind candidates
// replace the previous extreme when they are more pronounced, so accepted
// maxima and minima alternate. The interval threshold stays at its seed:
// the amplitude gate is what rejects chatter, and growing the interval
// threshold on sparse early rhythms (a long rest before motion) starves the
// static estimator of real extremes.
inline std::vector<ExtremePoint> levd_extrema(const std::vector<double>& series,
                                              double rate, const LevdConfig& cfg,
                                              int channel = 0) {
    cfg.validate();
    const LevdConfig rc = cfg.resolved_for(series, rate);
    std::vector<ExtremePoint> accepted;
    if (series.size() < 3) return accepted;

    const double t_d = rc.difference_threshold;
    const double t_i = rc.initial_interval_threshold;

    for (auto cand : levd_detail::raw_extrema(series)) {
        cand.time = static_cast<double>(cand.index) / rate;
        cand.channel = channel;
        if (accepted.empty()) {
            accepted.push_back(cand);
            continue;
        }
        ExtremePoint& last = accepted.back();
        if (cand.kind == last.kind) {
            const bool stronger = cand.kind == ExtremeKind::maximum
                                      ? cand.value > last.value
                                      : cand.value < last.value;
            if (stronger) last = cand;
            continue;
        }
        const double gap = cand.time - last.time;
        if (gap > t_i && std::abs(cand.value - last.value) > t_d)
            accepted.push_back(cand);
    }

    // A lone tentative extreme that never found a partner is noise.
    if (accepted.size() == 1 &&
        std::abs(accepted.front().value - mean(series)) <= t_d)
        accepted.clear();
    return accepted;
}

namespace levd_detail {

// Static component estimate: piecewise-linear interpolation through the
// midpoints of adjacent extreme pairs, constant before the first midpoint
// and after the last. Fewer than two extremes means no resolvable motion,
// in which case the channel mean is the estimate.
inline std::vector<double> static_estimate(const std::vector<double>& s, double rate,
                                           const LevdConfig& cfg, int channel) {
    std::vector<double> est(s.size());
    const auto ext = levd_extrema(s, rate, cfg, channel);
    if (ext.size() < 2) {
        std::fill(est.begin(), est.end(), mean(s));
        return est;
    }
    std::vector<size_t> mi;
    std::vector<double> mv;
    for (size_t k = 0; k + 1 < ext.size(); ++k) {
        mi.push_back((ext[k].index + ext[k + 1].index) / 2);
        mv.push_back(0.5 * (ext[k].value + ext[k + 1].value));
    }
    size_t seg = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (i <= mi.front()) {
            est[i] = mv.front();
        } else if (i >= mi.back()) {
            est[i] = mv.back();
        } else {
            while (seg + 1 < mi.size() && mi[seg + 1] < i) ++seg;
            const double span = static_cast<double>(mi[seg + 1] - mi[seg]);
            const double u = span > 0.0 ? (static_cast<double>(i - mi[seg])) / span : 0.0;
            est[i] = mv[seg] + u * (mv[seg + 1] - mv[seg]);
        }
    }
    return est;
}

}  // namespace levd_detail

// Removes the static signal components (line of sight, fixed reflectors)
// from both channels, leaving the fingertip-driven dynamic component.
inline BasebandTrace remove_static(const BasebandTrace& trace, const LevdConfig& cfg) {
    require(!trace.c.empty(), "denoise: empty trace");
    BasebandTrace out = trace;
    const auto est_c = levd_detail::static_estimate(trace.c, trace.rate, cfg, 0);
    const auto est_o = levd_detail::static_estimate(trace.o, trace.rate, cfg, 1);
    for (size_t i = 0; i < trace.c.size(); ++i) {
        out.c[i] = trace.c[i] - est_c[i];
        out.o[i] = trace.o[i] - est_o[i];
    }
    return out;
}

// Static estimates for inspection dumps.
inline std::pair<std::vector<double>, std::vector<double>> static_estimates(
    const BasebandTrace& trace, const LevdConfig& cfg) {
    return {levd_detail::static_estimate(trace.c, trace.rate, cfg, 0),
            levd_detail::static_estimate(trace.o, trace.rate, cfg, 1)};
}

}  // namespace gridsonar
