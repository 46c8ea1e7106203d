#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sasa/container.hpp"
#include "sasa/error.hpp"
#include "sasa/tensor.hpp"

namespace sasa {

// Fixed-length voice-identity vector. `pseudo` marks artificially generated
// identities; `source` marks embeddings extracted from a real speaker.
struct SpeakerEmbedding {
    enum class Tag { source, pseudo };

    std::vector<float> values;
    Tag tag = Tag::source;

    int dim() const { return static_cast<int>(values.size()); }

    float norm() const {
        float s = 0.0f;
        for (float v : values) s += v * v;
        return std::sqrt(s);
    }

    void require_valid(const std::string& what) const {
        if (values.empty()) throw Error(what + ": empty embedding");
        if (!all_finite(values.data(), values.size()))
            throw Error(what + ": embedding contains NaN or Inf");
        if (norm() == 0.0f) throw Error(what + ": embedding has zero norm");
    }
};

inline const char* tag_name(SpeakerEmbedding::Tag t) {
    return t == SpeakerEmbedding::Tag::pseudo ? "pseudo" : "source";
}

// Sidecar file: the same container format with a single tensor "embedding".
inline void write_embedding(const std::string& path, const SpeakerEmbedding& emb) {
    emb.require_valid(path);
    Container c;
    c.config["format"] = "sasa-embedding";
    c.config["dim"] = emb.dim();
    c.config["source_tag"] = tag_name(emb.tag);
    c.entries.push_back({"embedding", {emb.dim()}, 0});
    c.payload = emb.values;
    write_file_bytes(path, serialize_container(c));
}

inline SpeakerEmbedding read_embedding(const std::string& path, int expected_dim = 0) {
    const auto bytes = read_file_bytes(path);
    Container c = parse_container(bytes.data(), bytes.size());
    if (!c.config.contains("format") || c.config["format"] != "sasa-embedding")
        throw ContainerError(path + ": not an embedding sidecar");
    const ContainerEntry* e = c.find("embedding");
    if (!e || e->shape.size() != 1)
        throw ContainerError(path + ": missing 1-D tensor \"embedding\"");
    SpeakerEmbedding emb;
    emb.values.assign(c.payload.begin() + e->offset / sizeof(float),
                      c.payload.begin() + e->offset / sizeof(float) + e->count());
    if (c.config.value("source_tag", "source") == std::string("pseudo"))
        emb.tag = SpeakerEmbedding::Tag::pseudo;
    if (expected_dim > 0 && emb.dim() != expected_dim)
        throw ContainerError(path + ": embedding dim " + std::to_string(emb.dim()) +
                             " does not match model embed_dim " + std::to_string(expected_dim));
    emb.require_valid(path);
    return emb;
}

// Blocklist file: same format tagged "sasa-embeddings", one tensor per entry.
inline void write_embedding_list(const std::string& path,
                                 const std::vector<SpeakerEmbedding>& list) {
    Container c;
    c.config["format"] = "sasa-embeddings";
    c.config["count"] = list.size();
    uint64_t offset = 0;
    for (size_t i = 0; i < list.size(); ++i) {
        list[i].require_valid(path);
        c.entries.push_back({"embedding." + std::to_string(i), {list[i].dim()}, offset});
        c.payload.insert(c.payload.end(), list[i].values.begin(), list[i].values.end());
        offset += list[i].values.size() * sizeof(float);
    }
    write_file_bytes(path, serialize_container(c));
}

inline std::vector<SpeakerEmbedding> read_embedding_list(const std::string& path,
                                                         int expected_dim = 0) {
    const auto bytes = read_file_bytes(path);
    Container c = parse_container(bytes.data(), bytes.size());
    if (!c.config.contains("format") || c.config["format"] != "sasa-embeddings")
        throw ContainerError(path + ": not an embedding list");
    std::vector<SpeakerEmbedding> out;
    for (const auto& e : c.entries) {
        if (e.shape.size() != 1) throw ContainerError(path + ": entry " + e.name + " not 1-D");
        SpeakerEmbedding emb;
        emb.values.assign(c.payload.begin() + e.offset / sizeof(float),
                          c.payload.begin() + e.offset / sizeof(float) + e.count());
        if (expected_dim > 0 && emb.dim() != expected_dim)
            throw ContainerError(path + ": entry " + e.name + " has dim " +
                                 std::to_string(emb.dim()) + ", expected " +
                                 std::to_string(expected_dim));
        emb.require_valid(path + ": " + e.name);
        out.push_back(std::move(emb));
    }
    return out;
}

}  // namespace sasa
