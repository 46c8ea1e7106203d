#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "sasa/error.hpp"

namespace sasa {

constexpr int kWavSampleRate = 16000;

// Strict reader: 16-bit PCM, mono, 16 kHz. Anything else is a format error;
// the engine never resamples silently.
inline std::vector<float> read_wav_pcm16(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open file");
    auto need = [&](void* dst, size_t n, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<size_t>(in.gcount()) != n)
            throw FormatError(path + ": truncated WAV (" + what + ")");
    };
    auto rd_u32 = [&](const char* what) {
        uint8_t b[4];
        need(b, 4, what);
        return static_cast<uint32_t>(b[0]) | static_cast<uint32_t>(b[1]) << 8 |
               static_cast<uint32_t>(b[2]) << 16 | static_cast<uint32_t>(b[3]) << 24;
    };
    auto rd_u16 = [&](const char* what) {
        uint8_t b[2];
        need(b, 2, what);
        return static_cast<uint16_t>(b[0] | b[1] << 8);
    };

    char tag[4];
    need(tag, 4, "RIFF");
    if (std::memcmp(tag, "RIFF", 4) != 0) throw FormatError(path + ": not a RIFF/WAVE file");
    rd_u32("riff size");
    need(tag, 4, "WAVE");
    if (std::memcmp(tag, "WAVE", 4) != 0) throw FormatError(path + ": not a RIFF/WAVE file");

    bool have_fmt = false;
    uint16_t format = 0, channels = 0, bits = 0;
    uint32_t rate = 0;
    std::vector<float> samples;
    while (in.read(tag, 4)) {
        const uint32_t chunk_len = rd_u32("chunk size");
        if (std::memcmp(tag, "fmt ", 4) == 0) {
            if (chunk_len < 16) throw FormatError(path + ": malformed fmt chunk");
            format = rd_u16("format");
            channels = rd_u16("channels");
            rate = rd_u32("sample rate");
            rd_u32("byte rate");
            rd_u16("block align");
            bits = rd_u16("bits per sample");
            if (chunk_len > 16) in.seekg(chunk_len - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(tag, "data", 4) == 0) {
            if (!have_fmt) throw FormatError(path + ": data chunk before fmt chunk");
            if (format != 1 || channels != 1 || rate != kWavSampleRate || bits != 16)
                throw FormatError(
                    path + ": expected 16-bit PCM mono " + std::to_string(kWavSampleRate) +
                    " Hz WAV, got format=" + std::to_string(format) + " channels=" +
                    std::to_string(channels) + " rate=" + std::to_string(rate) + " bits=" +
                    std::to_string(bits));
            const size_t n = chunk_len / 2;
            std::vector<int16_t> raw(n);
            need(raw.data(), n * 2, "data");
            samples.resize(n);
            for (size_t i = 0; i < n; ++i) samples[i] = static_cast<float>(raw[i]) / 32768.0f;
            return samples;
        } else {
            in.seekg(chunk_len + (chunk_len & 1), std::ios::cur);
        }
        if (!in) throw FormatError(path + ": truncated WAV");
    }
    throw FormatError(path + ": no data chunk found");
}

inline void write_wav_pcm16(const std::string& path, std::span<const float> samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(path + ": cannot write file");
    auto wr_u32 = [&](uint32_t v) {
        uint8_t b[4] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
                        static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto wr_u16 = [&](uint16_t v) {
        uint8_t b[2] = {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };
    const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
    out.write("RIFF", 4);
    wr_u32(36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    wr_u32(16);
    wr_u16(1);  // PCM
    wr_u16(1);  // mono
    wr_u32(kWavSampleRate);
    wr_u32(kWavSampleRate * 2);
    wr_u16(2);
    wr_u16(16);
    out.write("data", 4);
    wr_u32(data_bytes);
    for (float s : samples) {
        float v = s * 32768.0f;
        if (v > 32767.0f) v = 32767.0f;
        if (v < -32768.0f) v = -32768.0f;
        const auto q = static_cast<int16_t>(std::lrintf(v));
        uint8_t b[2] = {static_cast<uint8_t>(q & 0xFF),
                        static_cast<uint8_t>((q >> 8) & 0xFF)};
        out.write(reinterpret_cast<char*>(b), 2);
    }
    if (!out) throw FormatError(path + ": error writing file");
}

}  // namespace sasa
