#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "sasa/error.hpp"

namespace sasa {

// Channels x frames array of 32-bit floats, row-major (one contiguous row
// per channel). Waveforms are 1 x samples.
struct FrameTensor {
    int channels = 0;
    int64_t frames = 0;
    std::vector<float> data;

    FrameTensor() = default;
    FrameTensor(int ch, int64_t fr)
        : channels(ch), frames(fr), data(static_cast<size_t>(ch) * static_cast<size_t>(fr), 0.0f) {
        if (ch <= 0 || fr < 0) throw Error("FrameTensor: invalid shape " + shape_str(ch, fr));
    }

    float* row(int c) { return data.data() + static_cast<size_t>(c) * frames; }
    const float* row(int c) const { return data.data() + static_cast<size_t>(c) * frames; }

    float& at(int c, int64_t t) { return data[static_cast<size_t>(c) * frames + t]; }
    float at(int c, int64_t t) const { return data[static_cast<size_t>(c) * frames + t]; }

    bool same_shape(const FrameTensor& o) const {
        return channels == o.channels && frames == o.frames;
    }

    static std::string shape_str(int ch, int64_t fr) {
        return std::to_string(ch) + "x" + std::to_string(fr);
    }
    std::string shape_str() const { return shape_str(channels, frames); }
};

inline bool all_finite(const float* p, size_t n) {
    for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i])) return false;
    return true;
}

inline void require_finite(const FrameTensor& x, const std::string& what) {
    if (!all_finite(x.data.data(), x.data.size()))
        throw Error(what + ": input contains NaN or Inf");
}

inline bool bit_equal(const FrameTensor& a, const FrameTensor& b) {
    return a.same_shape(b) &&
           (a.data.empty() ||
            std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0);
}

inline bool bit_equal(const std::vector<float>& a, const std::vector<float>& b) {
    return a.size() == b.size() &&
           (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0);
}

}  // namespace sasa
