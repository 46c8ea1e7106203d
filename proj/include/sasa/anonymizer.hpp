#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sasa/embedding.hpp"
#include "sasa/model.hpp"
#include "sasa/rng.hpp"

namespace sasa {

// 1 - cos(a, b), in [0, 2].
inline float cosine_distance(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
    if (a.dim() != b.dim())
        throw Error("cosine_distance: dim mismatch " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        dot += static_cast<double>(a.values[i]) * b.values[i];
        na += static_cast<double>(a.values[i]) * a.values[i];
        nb += static_cast<double>(b.values[i]) * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine_distance: zero-norm embedding");
    double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return static_cast<float>(d);
}

inline float cosine_similarity_score(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
    return 1.0f - cosine_distance(a, b);
}

struct AnonPolicy {
    float min_cosine_distance = 0.3f;
    int max_attempts = 1000;
    uint64_t rng_seed = 0;
    // Optional known-speaker embeddings a pseudo-speaker must also keep the
    // same distance from.
    std::vector<SpeakerEmbedding> blocklist;

    void validate() const {
        if (min_cosine_distance < 0.0f || min_cosine_distance >= 2.0f)
            throw Error("anon policy: min_cosine_distance must be in [0, 2)");
        if (max_attempts < 1) throw Error("anon policy: max_attempts must be >= 1");
    }
};

// MLP mapping a standard-normal latent to an embedding-sized vector, with
// rejection sampling enforcing the cosine-distance floor against the source
// (and any blocklisted speakers).
class PseudoGenerator {
  public:
    explicit PseudoGenerator(const ModelWeights& m) : cfg_(m.config) {
        dims_.push_back(cfg_.gen_latent_dim);
        dims_.insert(dims_.end(), cfg_.gen_hidden.begin(), cfg_.gen_hidden.end());
        dims_.push_back(cfg_.embed_dim);
        for (size_t i = 0; i + 1 < dims_.size(); ++i) {
            const std::string base = "gen." + std::to_string(i);
            const Tensor& w = m.get(base + ".w");
            const Tensor& b = m.get(base + ".b");
            if (w.shape != std::vector<int>{dims_[i + 1], dims_[i]})
                throw ContainerError(base + ".w has unexpected shape");
            if (b.shape != std::vector<int>{dims_[i + 1]})
                throw ContainerError(base + ".b has unexpected shape");
            w_.push_back(w.data.data());
            b_.push_back(b.data.data());
        }
    }

    int latent_dim() const { return dims_.front(); }

    std::vector<float> forward(const std::vector<float>& latent) const {
        if (static_cast<int>(latent.size()) != dims_.front())
            throw Error("pseudo generator: latent dim mismatch");
        std::vector<float> cur = latent;
        for (size_t layer = 0; layer + 1 < dims_.size(); ++layer) {
            const int in = dims_[layer], out = dims_[layer + 1];
            std::vector<float> next(out);
            for (int o = 0; o < out; ++o) {
                float acc = b_[layer][o];
                const float* wrow = w_[layer] + static_cast<size_t>(o) * in;
                for (int i = 0; i < in; ++i) acc += wrow[i] * cur[i];
                next[o] = acc;
            }
            const bool last = (layer + 2 == dims_.size());
            if (!last)
                for (float& v : next)
                    if (v < 0.0f) v *= kGenSlope;
            cur = std::move(next);
        }
        return cur;
    }

    // Draw latents from a seeded deterministic RNG until the candidate is far
    // enough from the source (and blocklist). Deterministic given
    // (seed, weights, source).
    SpeakerEmbedding generate(const SpeakerEmbedding& source, const AnonPolicy& policy) const {
        policy.validate();
        source.require_valid("generate_pseudo: source");
        if (source.dim() != cfg_.embed_dim)
            throw Error("generate_pseudo: source dim " + std::to_string(source.dim()) +
                        " does not match model embed_dim " + std::to_string(cfg_.embed_dim));
        GaussianRng rng(policy.rng_seed);
        float best = -1.0f;
        for (int attempt = 0; attempt < policy.max_attempts; ++attempt) {
            std::vector<float> latent(dims_.front());
            for (float& v : latent) v = rng.next(0.0f, 1.0f);
            SpeakerEmbedding cand;
            cand.values = forward(latent);
            cand.tag = SpeakerEmbedding::Tag::pseudo;
            if (cand.norm() == 0.0f) continue;
            float d = cosine_distance(source, cand);
            for (const auto& blocked : policy.blocklist)
                d = std::min(d, cosine_distance(blocked, cand));
            if (d > policy.min_cosine_distance) return cand;
            best = std::max(best, d);
        }
        throw ConstraintError(
            "generate_pseudo: no candidate beyond cosine distance " +
                std::to_string(policy.min_cosine_distance) + " after " +
                std::to_string(policy.max_attempts) + " attempts (best " +
                std::to_string(best < 0.0f ? 0.0f : best) + ")",
            best < 0.0f ? 0.0f : best);
    }

  private:
    static constexpr float kGenSlope = 0.2f;

    ModelConfig cfg_;
    std::vector<int> dims_;
    std::vector<const float*> w_;
    std::vector<const float*> b_;
};

}  // namespace sasa
