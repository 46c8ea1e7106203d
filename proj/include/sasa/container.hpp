#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sasa/error.hpp"
#include "sasa/model.hpp"

namespace sasa {

// Container file layout (all integers little-endian):
//   magic "SASA" | u32 version | u32 json_len | json bytes
//   u32 tensor_count | per tensor: u16 name_len, name, u8 ndim, u32 dims[], u64 offset
//   u64 payload_bytes | payload (f32 LE) | u32 crc32(payload)
constexpr uint32_t kContainerVersion = 1;

inline uint32_t crc32_ieee(const uint8_t* data, size_t len, uint32_t seed = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int b = 0; b < 8; ++b) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = ~seed;
    for (size_t i = 0; i < len; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return ~crc;
}

namespace detail {

struct ByteWriter {
    std::vector<uint8_t> buf;
    void u8(uint8_t v) { buf.push_back(v); }
    void u16(uint16_t v) {
        for (int i = 0; i < 2; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u32(uint32_t v) {
        for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void u64(uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<uint8_t>(v >> (8 * i)));
    }
    void bytes(const void* p, size_t n) {
        const auto* c = static_cast<const uint8_t*>(p);
        buf.insert(buf.end(), c, c + n);
    }
};

struct ByteReader {
    const uint8_t* p;
    size_t len;
    size_t pos = 0;

    void need(size_t n) const {
        if (pos + n > len) throw ContainerError("container truncated");
    }
    uint8_t u8() {
        need(1);
        return p[pos++];
    }
    uint16_t u16() {
        need(2);
        uint16_t v = static_cast<uint16_t>(p[pos]) | static_cast<uint16_t>(p[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    uint32_t u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    uint64_t u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    std::string str(size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(p + pos), n);
        pos += n;
        return s;
    }
    const uint8_t* raw(size_t n) {
        need(n);
        const uint8_t* r = p + pos;
        pos += n;
        return r;
    }
};

}  // namespace detail

struct ContainerEntry {
    std::string name;
    std::vector<int> shape;
    uint64_t offset = 0;

    int64_t count() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return n;
    }
};

struct Container {
    nlohmann::json config;
    std::vector<ContainerEntry> entries;
    std::vector<float> payload;

    const ContainerEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

inline std::vector<uint8_t> serialize_container(const Container& c) {
    detail::ByteWriter w;
    w.bytes("SASA", 4);
    w.u32(kContainerVersion);
    const std::string json = c.config.dump();
    w.u32(static_cast<uint32_t>(json.size()));
    w.bytes(json.data(), json.size());
    w.u32(static_cast<uint32_t>(c.entries.size()));
    for (const auto& e : c.entries) {
        w.u16(static_cast<uint16_t>(e.name.size()));
        w.bytes(e.name.data(), e.name.size());
        w.u8(static_cast<uint8_t>(e.shape.size()));
        for (int d : e.shape) w.u32(static_cast<uint32_t>(d));
        w.u64(e.offset);
    }
    const uint64_t payload_bytes = c.payload.size() * sizeof(float);
    w.u64(payload_bytes);
    w.bytes(c.payload.data(), payload_bytes);
    w.u32(crc32_ieee(reinterpret_cast<const uint8_t*>(c.payload.data()), payload_bytes));
    return std::move(w.buf);
}

inline Container parse_container(const uint8_t* data, size_t len) {
    detail::ByteReader r{data, len};
    if (r.str(4) != "SASA") throw ContainerError("bad magic, not a SASA container");
    const uint32_t version = r.u32();
    if (version != kContainerVersion)
        throw ContainerError("unsupported container version " + std::to_string(version));
    Container c;
    const uint32_t json_len = r.u32();
    try {
        c.config = nlohmann::json::parse(r.str(json_len));
    } catch (const nlohmann::json::exception& e) {
        throw ContainerError(std::string("bad config block: ") + e.what());
    }
    const uint32_t n_tensors = r.u32();
    c.entries.resize(n_tensors);
    for (auto& e : c.entries) {
        e.name = r.str(r.u16());
        const int ndim = r.u8();
        e.shape.resize(ndim);
        for (int i = 0; i < ndim; ++i) {
            e.shape[i] = static_cast<int>(r.u32());
            if (e.shape[i] <= 0) throw ContainerError("tensor " + e.name + " has bad dims");
        }
        e.offset = r.u64();
    }
    const uint64_t payload_bytes = r.u64();
    if (payload_bytes % sizeof(float) != 0) throw ContainerError("payload size not float-aligned");
    const uint8_t* praw = r.raw(payload_bytes);
    const uint32_t stored_crc = r.u32();
    if (crc32_ieee(praw, payload_bytes) != stored_crc)
        throw ContainerError("payload checksum mismatch (corrupt container)");
    c.payload.resize(payload_bytes / sizeof(float));
    std::memcpy(c.payload.data(), praw, payload_bytes);

    // Offsets must stay inside the payload and must not overlap.
    std::vector<std::pair<uint64_t, uint64_t>> spans;
    for (const auto& e : c.entries) {
        const uint64_t bytes = static_cast<uint64_t>(e.count()) * sizeof(float);
        if (e.offset % sizeof(float) != 0 || e.offset + bytes > payload_bytes)
            throw ContainerError("tensor " + e.name + " payload range out of bounds");
        spans.emplace_back(e.offset, e.offset + bytes);
    }
    std::sort(spans.begin(), spans.end());
    for (size_t i = 1; i < spans.size(); ++i)
        if (spans[i].first < spans[i - 1].second)
            throw ContainerError("tensor payload ranges overlap");
    return c;
}

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContainerError("cannot open " + path);
    in.seekg(0, std::ios::end);
    const auto size = in.tellg();
    in.seekg(0);
    std::vector<uint8_t> buf(static_cast<size_t>(size));
    if (size > 0) in.read(reinterpret_cast<char*>(buf.data()), size);
    if (!in) throw ContainerError("error reading " + path);
    return buf;
}

inline void write_file_bytes(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ContainerError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ContainerError("error writing " + path);
}

inline void write_model(const std::string& path, const ModelWeights& m) {
    m.validate();
    Container c;
    c.config = m.config.to_json();
    uint64_t offset = 0;
    for (const auto& spec : expected_tensors(m.config)) {
        const Tensor& t = m.get(spec.name);
        c.entries.push_back({spec.name, t.shape, offset});
        c.payload.insert(c.payload.end(), t.data.begin(), t.data.end());
        offset += t.data.size() * sizeof(float);
    }
    write_file_bytes(path, serialize_container(c));
}

inline ModelWeights read_model(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    Container c = parse_container(bytes.data(), bytes.size());
    ModelWeights m;
    try {
        m.config = ModelConfig::from_json(c.config);
    } catch (const Error& e) {
        throw ContainerError(path + ": " + e.what());
    }
    for (const auto& e : c.entries) {
        Tensor t;
        t.shape = e.shape;
        const size_t n = static_cast<size_t>(e.count());
        t.data.assign(c.payload.begin() + e.offset / sizeof(float),
                      c.payload.begin() + e.offset / sizeof(float) + n);
        m.tensors.emplace(e.name, std::move(t));
    }
    try {
        m.validate();
    } catch (const Error& e) {
        throw ContainerError(path + ": " + e.what());
    }
    return m;
}

}  // namespace sasa
