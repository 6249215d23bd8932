#pragma once

#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gridsonar/common.hpp"

namespace gridsonar {

// Stroke-level pattern utilities. A pattern is stored as the sequence of
// stroke endpoints (the dots where the fingertip changes direction); dots the
// stroke passes over register automatically, as the platform does it.

// Grid dots strictly between a and b on the straight stroke a->b, in order.
inline std::vector<int> interior_dots(int a, int b) {
    const int r1 = (a - 1) / 3, c1 = (a - 1) % 3;
    const int r2 = (b - 1) / 3, c2 = (b - 1) % 3;
    const int g = std::gcd(std::abs(r2 - r1), std::abs(c2 - c1));
    std::vector<int> out;
    for (int k = 1; k < g; ++k) {
        const int r = r1 + (r2 - r1) / g * k;
        const int c = c1 + (c2 - c1) / g * k;
        out.push_back(r * 3 + c + 1);
    }
    return out;
}

// True when strokes a->b and b->c continue in the same direction (no turn).
inline bool same_direction(int a, int b, int c) {
    const int dr1 = (b - 1) / 3 - (a - 1) / 3, dc1 = (b - 1) % 3 - (a - 1) % 3;
    const int dr2 = (c - 1) / 3 - (b - 1) / 3, dc2 = (c - 1) % 3 - (b - 1) % 3;
    return dr1 * dc2 == dr2 * dc1 && dr1 * dr2 + dc1 * dc2 > 0;
}

// Registered dot sequence for a stroke pattern: stroke endpoints plus any
// not-yet-registered dots the stroke passes over. Empty result means the
// pattern is not drawable (revisited endpoint or degenerate stroke).
inline std::vector<int> canonical_pattern(const std::vector<int>& strokes) {
    if (strokes.size() < 2) return {};
    for (int d : strokes)
        if (d < 1 || d > 9) return {};
    std::vector<int> reg;
    std::set<int> seen;
    auto add = [&](int d) {
        reg.push_back(d);
        seen.insert(d);
    };
    add(strokes.front());
    for (size_t i = 0; i + 1 < strokes.size(); ++i) {
        const int a = strokes[i], b = strokes[i + 1];
        if (a == b) return {};
        for (int c : interior_dots(a, b))
            if (!seen.count(c)) add(c);
        if (seen.count(b)) return {};
        add(b);
    }
    return reg;
}

// A drawable pattern whose consecutive strokes genuinely turn.
inline bool valid_stroke_pattern(const std::vector<int>& strokes) {
    if (canonical_pattern(strokes).empty()) return false;
    for (size_t i = 0; i + 2 < strokes.size(); ++i)
        if (same_direction(strokes[i], strokes[i + 1], strokes[i + 2])) return false;
    return true;
}

inline std::string pattern_to_string(const std::vector<int>& dots) {
    std::string s;
    for (size_t i = 0; i < dots.size(); ++i) {
        if (i) s.push_back('-');
        s += std::to_string(dots[i]);
    }
    return s;
}

// Letter-shaped patterns users favor.
inline const std::vector<std::vector<int>>& letter_patterns() {
    static const std::vector<std::vector<int>> shapes = {
        {1, 3, 7, 9},     // Z
        {1, 7, 9},        // L
        {7, 1, 9, 3},     // N
        {3, 1, 7, 9},     // C
        {1, 7, 9, 3},     // U
        {1, 8, 3},        // V
        {7, 1, 5, 3, 9},  // M
        {1, 7, 5, 9, 3},  // W
        {3, 9, 7},        // J
        {1, 3, 7},        // 7
    };
    return shapes;
}

// Uniformly samples a drawable pattern with exactly `lines` strokes.
inline std::vector<int> random_stroke_pattern(std::mt19937_64& rng, int lines) {
    require(lines >= 1 && lines <= 8, "pattern: stroke count out of range");
    for (int attempt = 0; attempt < 4096; ++attempt) {
        std::vector<int> strokes;
        std::set<int> seen;
        auto reg_stroke = [&](int a, int b) {
            for (int c : interior_dots(a, b)) seen.insert(c);
            seen.insert(b);
        };
        strokes.push_back(static_cast<int>(rng() % 9) + 1);
        seen.insert(strokes[0]);
        bool dead = false;
        for (int k = 0; k < lines && !dead; ++k) {
            std::vector<int> options;
            const int a = strokes.back();
            for (int b = 1; b <= 9; ++b) {
                if (seen.count(b)) continue;
                if (strokes.size() >= 2 &&
                    same_direction(strokes[strokes.size() - 2], a, b))
                    continue;
                options.push_back(b);
            }
            if (options.empty()) {
                dead = true;
                break;
            }
            const int b = options[rng() % options.size()];
            reg_stroke(a, b);
            strokes.push_back(b);
        }
        if (!dead && valid_stroke_pattern(strokes)) return strokes;
    }
    fail("pattern: could not sample a pattern with the requested line count");
}

}  // namespace gridsonar
