#pragma once

#include <string>
#include <vector>

#include "sasa/embedding.hpp"
#include "sasa/layers.hpp"

namespace sasa {

struct DecoderState {
    ConvState pre;
    std::vector<ConvState> up;
    std::vector<std::vector<ConvState>> res;
    ConvState post;
};

// Per-stage FiLM vectors derived from the speaker embedding; fixed per
// stream, so sessions compute them once.
struct DecoderConditioning {
    std::vector<std::vector<float>> scale;
    std::vector<std::vector<float>> shift;
};

// Variance-adapted representation -> waveform. Mirror image of the content
// encoder: causal upsampling by [5, 4, 4, 2, 2], MRF residual blocks after
// each stage, and each stage's block output speaker-adapted via FiLM.
class Decoder {
  public:
    explicit Decoder(const ModelWeights& m) : cfg_(m.config) {
        const auto& dc = cfg_.decoder_channels;
        pre_ = CausalConvLayer("dec.pre", ConvSpec{cfg_.hidden_dim, dc[0], 7, 1, 1, true}, m);
        for (int i = 0; i < 5; ++i) {
            const int rate = cfg_.upsample_rates[i];
            up_.emplace_back("dec.up." + std::to_string(i),
                             ConvSpec{dc[i], dc[i + 1], 2 * rate, 1, 1, true}, m);
            res_.emplace_back("dec.res." + std::to_string(i), dc[i + 1], cfg_, m);
            film_scale_.emplace_back("dec.film." + std::to_string(i) + ".scale",
                                     ConvSpec{cfg_.embed_dim, dc[i + 1], 1, 1, 1, true}, m);
            film_shift_.emplace_back("dec.film." + std::to_string(i) + ".shift",
                                     ConvSpec{cfg_.embed_dim, dc[i + 1], 1, 1, 1, true}, m);
        }
        post_ = CausalConvLayer("dec.post", ConvSpec{dc[5], 1, 7, 1, 1, true}, m);
    }

    DecoderState make_state() const {
        DecoderState st;
        st.pre = pre_.make_state();
        for (int i = 0; i < 5; ++i) {
            st.up.push_back(up_[i].make_state());
            st.res.push_back(res_[i].make_state());
        }
        st.post = post_.make_state();
        return st;
    }

    DecoderConditioning condition(const SpeakerEmbedding& emb) const {
        if (emb.dim() != cfg_.embed_dim)
            throw Error("decode: speaker embedding dim " + std::to_string(emb.dim()) +
                        " does not match model embed_dim " + std::to_string(cfg_.embed_dim));
        emb.require_valid("decode");
        FrameTensor ein(cfg_.embed_dim, 1);
        for (int c = 0; c < cfg_.embed_dim; ++c) ein.at(c, 0) = emb.values[c];
        DecoderConditioning cond;
        for (int i = 0; i < 5; ++i) {
            ConvState s1 = film_scale_[i].make_state();
            ConvState s2 = film_shift_[i].make_state();
            cond.scale.push_back(film_scale_[i].forward(ein, s1).data);
            cond.shift.push_back(film_shift_[i].forward(ein, s2).data);
        }
        return cond;
    }

    FrameTensor decode(const FrameTensor& z_var, const DecoderConditioning& cond,
                       DecoderState& st) const {
        if (z_var.channels != cfg_.hidden_dim)
            throw Error("decode: input has " + std::to_string(z_var.channels) +
                        " channels, expected " + std::to_string(cfg_.hidden_dim));
        FrameTensor x = pre_.forward(z_var, st.pre);
        for (int i = 0; i < 5; ++i) {
            leaky_relu_inplace(x, kLeakySlope);
            x = up_[i].forward_upsample(x, cfg_.upsample_rates[i], st.up[i]);
            x = res_[i].forward(x, st.res[i], kLeakySlope);
            const auto& sc = cond.scale[i];
            const auto& sh = cond.shift[i];
            for (int c = 0; c < x.channels; ++c) {
                float* row = x.row(c);
                const float a = sc[c];
                const float b = sh[c];
                for (int64_t t = 0; t < x.frames; ++t) row[t] = row[t] * a + b;
            }
        }
        leaky_relu_inplace(x, kLeakySlope);
        x = post_.forward(x, st.post);
        for (float& v : x.data) v = std::tanh(v);
        return x;
    }

    FrameTensor decode(const FrameTensor& z_var, const SpeakerEmbedding& emb,
                       DecoderState& st) const {
        return decode(z_var, condition(emb), st);
    }

    const ModelConfig& config() const { return cfg_; }

  private:
    ModelConfig cfg_;
    CausalConvLayer pre_;
    std::vector<CausalConvLayer> up_;
    std::vector<MrfBlock> res_;
    std::vector<CausalConvLayer> film_scale_, film_shift_;
    CausalConvLayer post_;
};

}  // namespace sasa
