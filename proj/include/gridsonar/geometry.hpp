#pragma once

#include <array>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "gridsonar/common.hpp"

namespace gridsonar {

// 3x3 grid, dots numbered 1..9 row-major with dot 1 top-left.
struct GridLayout {
    std::array<Vec3, 9> dots{};
    double pitch = 0.02;

    const Vec3& dot(int index) const {
        require(index >= 1 && index <= 9, "grid: dot index out of range");
        return dots[static_cast<size_t>(index - 1)];
    }

    // Row/column of a dot in lattice coordinates (0..2 each).
    static std::pair<int, int> row_col(int index) {
        return {(index - 1) / 3, (index - 1) % 3};
    }

    static GridLayout regular(const Vec3& center, double pitch) {
        require(pitch > 0.0, "grid: pitch must be positive");
        GridLayout g;
        g.pitch = pitch;
        for (int k = 0; k < 9; ++k) {
            const int r = k / 3, c = k % 3;
            g.dots[static_cast<size_t>(k)] = {center.x + (c - 1) * pitch,
                                              center.y + (1 - r) * pitch,
                                              center.z};
        }
        return g;
    }

    void validate() const {
        require(pitch > 0.0, "grid: pitch must be positive");
        for (const auto& d : dots) require(d.finite(), "grid: non-finite dot");
        // Regular lattice: every dot must equal dot1 + c*col_step + r*row_step.
        const Vec3 col = dots[1] - dots[0];
        const Vec3 row = dots[3] - dots[0];
        const double tol = 1e-9 * std::max(1.0, pitch);
        for (int k = 0; k < 9; ++k) {
            const int r = k / 3, c = k % 3;
            const Vec3 expect = dots[0] + col * static_cast<double>(c) +
                                row * static_cast<double>(r);
            require(distance(expect, dots[static_cast<size_t>(k)]) < tol,
                    "grid: dots do not form a regular lattice");
        }
        require(std::abs(col.norm() - pitch) < tol && std::abs(row.norm() - pitch) < tol,
                "grid: lattice step does not match pitch");
    }
};

struct DeviceLayout {
    std::string name;
    std::vector<Vec3> speakers;
    std::vector<Vec3> microphones;
    std::vector<std::pair<int, int>> pairs;  // (speaker index, microphone index)
    GridLayout grid;

    void validate() const {
        require(!pairs.empty(), "layout: at least one speaker-microphone pair required");
        for (const auto& s : speakers) require(s.finite(), "layout: non-finite speaker");
        for (const auto& m : microphones) require(m.finite(), "layout: non-finite microphone");
        for (const auto& [s, m] : pairs) {
            require(s >= 0 && s < static_cast<int>(speakers.size()),
                    "layout: pair speaker index out of range");
            require(m >= 0 && m < static_cast<int>(microphones.size()),
                    "layout: pair microphone index out of range");
        }
        grid.validate();
    }

    int pair_count() const { return static_cast<int>(pairs.size()); }

    const Vec3& pair_speaker(int pair) const {
        require_pair(pair);
        return speakers[static_cast<size_t>(pairs[static_cast<size_t>(pair)].first)];
    }
    const Vec3& pair_microphone(int pair) const {
        require_pair(pair);
        return microphones[static_cast<size_t>(pairs[static_cast<size_t>(pair)].second)];
    }
    void require_pair(int pair) const {
        require(pair >= 0 && pair < pair_count(), "layout: invalid pair index");
    }

    // Stable identifier derived from the geometry, used to tie a ground-truth
    // database back to the layout it was built from.
    std::string id() const {
        std::uint64_t h = 1469598103934665603ull;
        auto eat = [&h](double v) {
            // Quantize to 0.1 mm so a re-serialized layout hashes identically.
            const auto q = static_cast<std::int64_t>(std::llround(v * 1e4));
            for (int i = 0; i < 8; ++i) {
                h ^= static_cast<std::uint64_t>((q >> (8 * i)) & 0xff);
                h *= 1099511628211ull;
            }
        };
        for (const auto& v : speakers) { eat(v.x); eat(v.y); eat(v.z); }
        for (const auto& v : microphones) { eat(v.x); eat(v.y); eat(v.z); }
        for (const auto& [s, m] : pairs) { eat(s); eat(m); }
        for (const auto& d : grid.dots) { eat(d.x); eat(d.y); eat(d.z); }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        return name.empty() ? std::string(buf) : name + "-" + buf;
    }
};

// Canonical layout every shipped default and acceptance number refers to.
// 6-inch handset, loudspeaker on the bottom edge right of the USB port,
// secondary microphone on the top edge left of the camera, pattern grid in
// the lower half of the screen. The off-axis placement is what real handsets
// have; a perfectly centered speaker/microphone/grid would make mirror-image
// lines produce identical features and the grid's middle column degenerate.
inline DeviceLayout reference_layout() {
    DeviceLayout d;
    d.name = "ref-6in";
    d.speakers = {{0.024, -0.0745, 0.0}};
    d.microphones = {{-0.012, 0.0745, 0.0}};
    d.pairs = {{0, 0}};
    d.grid = GridLayout::regular({0.0, -0.012, 0.0}, 0.02);
    return d;
}

struct DirectedLine {
    int start_dot = 1;
    int end_dot = 2;

    bool operator==(const DirectedLine& o) const {
        return start_dot == o.start_dot && end_dot == o.end_dot;
    }
    bool operator<(const DirectedLine& o) const {
        return start_dot != o.start_dot ? start_dot < o.start_dot
                                        : end_dot < o.end_dot;
    }
    DirectedLine reversed() const { return {end_dot, start_dot}; }
};

// All ordered pairs of distinct dots, sorted by start then end (72 entries).
inline std::vector<DirectedLine> enumerate_lines(const GridLayout& grid) {
    grid.validate();
    std::vector<DirectedLine> lines;
    lines.reserve(72);
    for (int a = 1; a <= 9; ++a)
        for (int b = 1; b <= 9; ++b)
            if (a != b) lines.push_back({a, b});
    return lines;
}

// Movement feature of one line as seen by one speaker-microphone pair:
// d1 = path length change from the start to the path-length minimum M,
// d2 = change from M to the end. d1 <= 0 <= d2 by construction.
struct FeatureVector {
    double d1 = 0.0;
    double d2 = 0.0;
    int pair = 0;
    int tone_count = 1;
};

// Round-trip path length speaker -> point -> microphone.
inline double round_trip_path(const DeviceLayout& layout, int pair, const Vec3& p) {
    return distance(layout.pair_speaker(pair), p) +
           distance(p, layout.pair_microphone(pair));
}

// Feature of a straight constant-speed trajectory sampled at n_samples points.
// M is the argmin of the sampled path-length series, earliest index on ties.
inline FeatureVector trajectory_feature(const DeviceLayout& layout, int pair,
                                        const Vec3& from, const Vec3& to,
                                        int n_samples) {
    layout.require_pair(pair);
    require(n_samples >= 16, "feature: n_samples must be >= 16");
    require(distance(from, to) > 0.0, "feature: degenerate zero-length line");
    double d_start = 0.0, d_end = 0.0, d_min = 0.0;
    for (int i = 0; i < n_samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_samples - 1);
        const double d = round_trip_path(layout, pair, lerp(from, to, t));
        if (i == 0) d_start = d_min = d;
        if (d < d_min) d_min = d;
        if (i == n_samples - 1) d_end = d;
    }
    FeatureVector f;
    f.d1 = d_min - d_start;
    f.d2 = d_end - d_min;
    f.pair = pair;
    return f;
}

constexpr int kGroundTruthSamples = 4097;

inline FeatureVector ground_truth_features(const DeviceLayout& layout,
                                           const DirectedLine& line, int pair,
                                           int n_samples = kGroundTruthSamples) {
    require(line.start_dot != line.end_dot, "feature: degenerate zero-length line");
    return trajectory_feature(layout, pair, layout.grid.dot(line.start_dot),
                              layout.grid.dot(line.end_dot), n_samples);
}

// Reference features for all 72 lines under every pair of a layout.
// Immutable after build; entries are line-major in enumerate_lines order.
struct GroundTruthDB {
    std::string layout_id;
    int pair_count = 0;
    int samples_per_line = 0;
    std::vector<FeatureVector> entries;

    static int line_index(const DirectedLine& l) {
        require(l.start_dot >= 1 && l.start_dot <= 9 && l.end_dot >= 1 &&
                    l.end_dot <= 9 && l.start_dot != l.end_dot,
                "db: invalid line");
        const int e = l.end_dot > l.start_dot ? l.end_dot - 2 : l.end_dot - 1;
        return (l.start_dot - 1) * 8 + e;
    }

    const FeatureVector& at(const DirectedLine& line, int pair) const {
        require(pair >= 0 && pair < pair_count, "db: invalid pair index");
        const size_t idx =
            static_cast<size_t>(line_index(line)) * static_cast<size_t>(pair_count) +
            static_cast<size_t>(pair);
        require(idx < entries.size(), "db: missing entry");
        return entries[idx];
    }

    size_t size() const { return entries.size(); }

    void validate() const {
        require(pair_count >= 1, "db: no pairs");
        require(entries.size() == static_cast<size_t>(72 * pair_count),
                "db: entry count must be 72 x pair count");
    }
};

inline GroundTruthDB build_ground_truth_db(const DeviceLayout& layout,
                                           int n_samples = kGroundTruthSamples) {
    layout.validate();
    GroundTruthDB db;
    db.layout_id = layout.id();
    db.pair_count = layout.pair_count();
    db.samples_per_line = n_samples;
    db.entries.reserve(static_cast<size_t>(72 * db.pair_count));
    for (const auto& line : enumerate_lines(layout.grid))
        for (int pair = 0; pair < db.pair_count; ++pair)
            db.entries.push_back(ground_truth_features(layout, line, pair, n_samples));
    db.validate();
    return db;
}

}  // namespace gridsonar
