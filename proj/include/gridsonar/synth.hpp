#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "gridsonar/geometry.hpp"

namespace gridsonar {

struct CarrierSpec {
    double amplitude = 0.15;
    std::vector<double> frequencies = {18500.0, 19000.0, 19500.0};
    double sample_rate = 48000.0;
    double sound_speed = 340.0;

    void validate() const {
        require(amplitude > 0.0, "carrier: amplitude must be positive");
        require(!frequencies.empty(), "carrier: no tones");
        double fmax = 0.0;
        for (double f : frequencies) {
            require(f >= 18000.0 && f <= 20000.0,
                    "carrier: tone outside 18-20 kHz band");
            fmax = std::max(fmax, f);
        }
        require(sample_rate >= 2.0 * fmax, "carrier: sample rate below Nyquist");
        require(sound_speed > 0.0, "carrier: bad sound speed");
    }

    double wavelength(double tone) const { return sound_speed / tone; }

    bool has_tone(double tone) const {
        for (double f : frequencies)
            if (std::abs(f - tone) < 1e-6) return true;
        return false;
    }
};

// One scripted stop of the fingertip: it arrives at `dot` at `arrival` seconds
// and rests there for `pause` seconds before heading to the next dot.
struct TrajectoryPoint {
    int dot = 1;
    double arrival = 0.0;
    double pause = 0.0;
};

struct NoiseSpec {
    std::optional<double> snr_db;          // additive white noise vs clean rms
    std::optional<double> ambient_snr_db;  // low-frequency ambient band
    double ambient_cutoff_hz = 5000.0;

    bool any() const { return snr_db.has_value() || ambient_snr_db.has_value(); }
};

// Ground truth carried next to a synthesized recording: what the motion
// sensors of the attacked device would have reported, plus the true pattern.
struct Annotations {
    std::vector<int> pattern;  // stroke endpoint dots, in drawing order
    double touch_time = 0.0;
    double lift_time = 0.0;
    std::vector<TrajectoryPoint> dots;
    int pair = 0;

    // Centers of the rest intervals at interior dots: where the finger turns.
    std::vector<double> turning_point_times() const {
        std::vector<double> t;
        for (size_t i = 1; i + 1 < dots.size(); ++i)
            t.push_back(dots[i].arrival + 0.5 * dots[i].pause);
        return t;
    }

    // Motion interval of each stroke: leaving one dot to arriving at the next.
    std::vector<std::pair<double, double>> line_intervals() const {
        std::vector<std::pair<double, double>> v;
        for (size_t i = 0; i + 1 < dots.size(); ++i)
            v.push_back({dots[i].arrival + dots[i].pause, dots[i + 1].arrival});
        return v;
    }

    void shift(double dt) {
        touch_time += dt;
        lift_time += dt;
        for (auto& d : dots) d.arrival += dt;
    }
};

struct SampleBuffer {
    std::vector<double> samples;
    double sample_rate = 48000.0;
    std::optional<Annotations> annotations;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

struct StaticReflector {
    Vec3 position;
    double gain = 0.0;
};

struct Scene {
    DeviceLayout layout = reference_layout();
    CarrierSpec carrier;
    std::vector<TrajectoryPoint> trajectory;
    std::vector<StaticReflector> static_reflectors;
    double los_gain = 1.0;
    // Echo amplitude = gain / d(t)^2; the default puts the fingertip echo
    // about 16 dB below the line of sight at grid distances.
    double fingertip_gain = 3.8e-3;
    NoiseSpec noise;
    std::uint64_t noise_seed = 1;
    double touch_time = 0.0;
    double lift_time = 0.0;
    int active_pair = 0;  // the speaker-microphone pair this recording captures
    double tail_margin = 0.1;

    void validate() const {
        layout.validate();
        carrier.validate();
        layout.require_pair(active_pair);
        require(trajectory.size() >= 2, "scene: trajectory needs at least 2 dots");
        double prev_leave = -1.0;
        for (const auto& p : trajectory) {
            layout.grid.dot(p.dot);  // range check
            require(p.pause >= 0.0, "scene: negative pause");
            require(p.arrival > prev_leave, "scene: times not strictly increasing");
            prev_leave = p.arrival + p.pause;
        }
        require(touch_time >= 0.0 && touch_time <= trajectory.front().arrival,
                "scene: touch time after first arrival");
        require(lift_time >= trajectory.back().arrival,
                "scene: lift time before last arrival");
        for (const auto& r : static_reflectors)
            require(r.position.finite(), "scene: non-finite reflector");
    }

    Vec3 fingertip_at(double t) const {
        if (t <= trajectory.front().arrival)
            return layout.grid.dot(trajectory.front().dot);
        for (size_t i = 0; i + 1 < trajectory.size(); ++i) {
            const double leave = trajectory[i].arrival + trajectory[i].pause;
            const double next = trajectory[i + 1].arrival;
            if (t <= leave) return layout.grid.dot(trajectory[i].dot);
            if (t < next) {
                const double u = (t - leave) / (next - leave);
                return lerp(layout.grid.dot(trajectory[i].dot),
                            layout.grid.dot(trajectory[i + 1].dot), u);
            }
        }
        return layout.grid.dot(trajectory.back().dot);
    }

    Annotations annotations() const {
        Annotations a;
        for (const auto& p : trajectory) a.pattern.push_back(p.dot);
        a.touch_time = touch_time;
        a.lift_time = lift_time;
        a.dots = trajectory;
        a.pair = active_pair;
        return a;
    }
};

namespace synth_detail {

// Deterministic unit gaussians (Box-Muller over mt19937_64), so recordings
// are bit-identical across standard libraries.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}
    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do { u1 = uniform(); } while (u1 <= 1e-300);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

  private:
    double uniform() {
        return (rng_() >> 11) * (1.0 / 9007199254740992.0);  // [0,1)
    }
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool have_ = false;
};

}  // namespace synth_detail

// Renders the microphone signal of scene.active_pair: line-of-sight carrier,
// fixed-delay static reflector echoes, the fingertip echo with time-varying
// delay d(t)/v and amplitude fingertip_gain/d(t)^2, plus optional noise.
inline SampleBuffer synthesize(const Scene& scene) {
    scene.validate();
    const double fs = scene.carrier.sample_rate;
    const double c = scene.carrier.sound_speed;
    const auto n = static_cast<size_t>(
        std::ceil((scene.lift_time + scene.tail_margin) * fs));

    const int pair = scene.active_pair;
    std::vector<double> refl_delay, refl_gain;
    for (const auto& r : scene.static_reflectors) {
        refl_delay.push_back(round_trip_path(scene.layout, pair, r.position) / c);
        refl_gain.push_back(r.gain);
    }

    const auto touch_idx = static_cast<size_t>(std::lround(scene.touch_time * fs));
    const auto lift_idx = static_cast<size_t>(std::lround(scene.lift_time * fs));

    SampleBuffer out;
    out.sample_rate = fs;
    out.samples.assign(n, 0.0);
    const double A = scene.carrier.amplitude;
    for (size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        double finger_delay = 0.0, finger_amp = 0.0;
        if (i >= touch_idx && i <= lift_idx) {
            const double d = round_trip_path(scene.layout, pair, scene.fingertip_at(t));
            finger_delay = d / c;
            finger_amp = scene.fingertip_gain / (d * d);
        }
        double s = 0.0;
        for (double f : scene.carrier.frequencies) {
            const double w = 2.0 * kPi * f;
            s += scene.los_gain * std::sin(w * t);
            for (size_t r = 0; r < refl_delay.size(); ++r)
                s += refl_gain[r] * std::sin(w * (t - refl_delay[r]));
            if (finger_amp > 0.0) s += finger_amp * std::sin(w * (t - finger_delay));
        }
        out.samples[i] = A * s;
    }

    if (scene.noise.any()) {
        const double clean_rms = rms(out.samples);
        synth_detail::GaussianStream g(scene.noise_seed);
        if (scene.noise.snr_db) {
            const double sigma = clean_rms * std::pow(10.0, -*scene.noise.snr_db / 20.0);
            for (auto& x : out.samples) x += sigma * g.next();
        }
        if (scene.noise.ambient_snr_db) {
            // One-pole lowpass shapes the ambient band; renormalized to the
            // requested level after filtering.
            synth_detail::GaussianStream ga(mix_seed(scene.noise_seed, 0xa3b1));
            const double a =
                1.0 - std::exp(-2.0 * kPi * scene.noise.ambient_cutoff_hz / fs);
            std::vector<double> amb(n);
            double y = 0.0;
            for (size_t i = 0; i < n; ++i) {
                y += a * (ga.next() - y);
                amb[i] = y;
            }
            const double target =
                clean_rms * std::pow(10.0, -*scene.noise.ambient_snr_db / 20.0);
            const double have = rms(amb);
            if (have > 0.0)
                for (size_t i = 0; i < n; ++i)
                    out.samples[i] += amb[i] * (target / have);
        }
    }

    out.annotations = scene.annotations();
    return out;
}

// Sub-buffer covering [touch_time, lift_time]; annotations re-based so the
// new buffer starts at time zero.
inline SampleBuffer trim_valid_signal(const SampleBuffer& buffer, double touch_time,
                                      double lift_time) {
    require(touch_time >= 0.0 && touch_time < lift_time, "trim: bad time range");
    const double fs = buffer.sample_rate;
    const auto i0 = static_cast<size_t>(std::lround(touch_time * fs));
    const auto i1 = static_cast<size_t>(std::lround(lift_time * fs));
    require(i1 <= buffer.samples.size(), "trim: lift time beyond buffer end");

    SampleBuffer out;
    out.sample_rate = fs;
    out.samples.assign(buffer.samples.begin() + static_cast<long>(i0),
                       buffer.samples.begin() + static_cast<long>(i1));
    if (buffer.annotations) {
        out.annotations = buffer.annotations;
        out.annotations->shift(-touch_time);
    }
    return out;
}

// Convenience builder: wraps a stroke sequence in a constant-speed scene.
struct ScenePlan {
    double speed = 0.30;       // fingertip speed along each stroke, m/s
    double pause = 0.12;       // rest at each turning point
    double start_hold = 0.15;  // rest on the first dot after touching
    double end_hold = 0.15;    // rest on the last dot before lifting
};

inline Scene scene_from_pattern(const DeviceLayout& layout,
                                const std::vector<int>& stroke_dots,
                                const ScenePlan& plan = {},
                                const CarrierSpec& carrier = {},
                                const NoiseSpec& noise = {},
                                std::uint64_t seed = 1) {
    require(stroke_dots.size() >= 2, "scene: pattern needs at least 2 dots");
    require(plan.speed > 0.0, "scene: speed must be positive");
    Scene s;
    s.layout = layout;
    s.carrier = carrier;
    s.noise = noise;
    s.noise_seed = seed;
    s.touch_time = 0.0;

    double t = plan.start_hold;
    for (size_t i = 0; i < stroke_dots.size(); ++i) {
        TrajectoryPoint p;
        p.dot = stroke_dots[i];
        p.arrival = t;
        const bool interior = i > 0 && i + 1 < stroke_dots.size();
        p.pause = interior ? plan.pause : 0.0;
        s.trajectory.push_back(p);
        if (i + 1 < stroke_dots.size()) {
            const double len = distance(layout.grid.dot(stroke_dots[i]),
                                        layout.grid.dot(stroke_dots[i + 1]));
            require(len > 0.0, "scene: repeated dot in pattern");
            t += p.pause + len / plan.speed;
        }
    }
    s.lift_time = t + plan.end_hold;
    return s;
}

}  // namespace gridsonar
