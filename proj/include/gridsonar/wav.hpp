#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "gridsonar/common.hpp"

namespace gridsonar {

// Minimal PCM WAV support: mono, 16-bit signed, as produced by the synthesizer
// and consumed by the pipeline. Samples are doubles in [-1, 1).

namespace wav_detail {

inline void put_u32(std::string& s, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& s, std::uint16_t v) {
    for (int i = 0; i < 2; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline std::uint32_t get_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}
inline std::uint16_t get_u16(const unsigned char* p) {
    return std::uint16_t(p[0]) | std::uint16_t(p[1]) << 8;
}

}  // namespace wav_detail

inline void write_wav(const std::string& path, const std::vector<double>& samples,
                      double sample_rate) {
    using namespace wav_detail;
    const auto rate = static_cast<std::uint32_t>(sample_rate);
    std::string out;
    out.reserve(44 + samples.size() * 2);
    out += "RIFF";
    put_u32(out, static_cast<std::uint32_t>(36 + samples.size() * 2));
    out += "WAVEfmt ";
    put_u32(out, 16);
    put_u16(out, 1);  // PCM
    put_u16(out, 1);  // mono
    put_u32(out, rate);
    put_u32(out, rate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out += "data";
    put_u32(out, static_cast<std::uint32_t>(samples.size() * 2));
    for (double x : samples) {
        double v = std::clamp(x, -1.0, 1.0) * 32767.0;
        auto q = static_cast<std::int16_t>(std::lround(v));
        put_u16(out, static_cast<std::uint16_t>(q));
    }
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "wav: cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    require(f.good(), "wav: write failed: " + path);
}

struct WavData {
    std::vector<double> samples;
    double sample_rate = 0.0;
};

inline WavData read_wav(const std::string& path) {
    using namespace wav_detail;
    std::ifstream f(path, std::ios::binary);
    require(f.good(), "wav: cannot open: " + path);
    std::vector<unsigned char> raw((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
    require(raw.size() >= 44, "wav: file too short: " + path);
    require(std::memcmp(raw.data(), "RIFF", 4) == 0 &&
                std::memcmp(raw.data() + 8, "WAVE", 4) == 0,
            "wav: not a RIFF/WAVE file: " + path);

    WavData out;
    std::uint16_t channels = 0, bits = 0, format = 0;
    size_t pos = 12;
    bool got_data = false;
    while (pos + 8 <= raw.size()) {
        const char* tag = reinterpret_cast<const char*>(raw.data() + pos);
        const std::uint32_t len = get_u32(raw.data() + pos + 4);
        const size_t body = pos + 8;
        if (std::memcmp(tag, "fmt ", 4) == 0 && body + 16 <= raw.size()) {
            format = get_u16(raw.data() + body);
            channels = get_u16(raw.data() + body + 2);
            out.sample_rate = get_u32(raw.data() + body + 4);
            bits = get_u16(raw.data() + body + 14);
        } else if (std::memcmp(tag, "data", 4) == 0) {
            require(format == 1 && channels == 1 && bits == 16,
                    "wav: only mono 16-bit PCM supported: " + path);
            const size_t count = std::min<size_t>(len, raw.size() - body) / 2;
            out.samples.resize(count);
            for (size_t i = 0; i < count; ++i) {
                auto u = get_u16(raw.data() + body + 2 * i);
                out.samples[i] = static_cast<std::int16_t>(u) / 32767.0;
            }
            got_data = true;
        }
        pos = body + len + (len & 1);
    }
    require(got_data, "wav: no data chunk: " + path);
    return out;
}

}  // namespace gridsonar
