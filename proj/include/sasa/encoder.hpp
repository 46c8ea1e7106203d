#pragma once

#include <string>
#include <vector>

#include "sasa/layers.hpp"

namespace sasa {

struct EncoderState {
    ConvState pre;
    std::vector<ConvState> down;
    std::vector<std::vector<ConvState>> res;
    ConvState post;
};

// Streaming waveform -> 50 Hz content representation z. Mirrors a HiFiGAN
// generator with the transposed convolutions replaced by strided causal
// convolutions, downsampling by [2, 2, 4, 4, 5] (320x overall).
class ContentEncoder {
  public:
    explicit ContentEncoder(const ModelWeights& m) : cfg_(m.config) {
        const auto& ec = cfg_.encoder_channels;
        pre_ = CausalConvLayer("enc.pre", ConvSpec{1, ec[0], 7, 1, 1, true}, m);
        for (int i = 0; i < 5; ++i) {
            const int rate = cfg_.downsample_rates[i];
            down_.emplace_back("enc.down." + std::to_string(i),
                               ConvSpec{ec[i], ec[i + 1], 2 * rate, rate, 1, true}, m);
            res_.emplace_back("enc.res." + std::to_string(i), ec[i + 1], cfg_, m);
        }
        post_ = CausalConvLayer("enc.post", ConvSpec{ec[5], cfg_.hidden_dim, 3, 1, 1, true}, m);
        units_ = CausalConvLayer("enc.units",
                                 ConvSpec{cfg_.hidden_dim, cfg_.num_units, 1, 1, 1, true}, m);
    }

    EncoderState make_state() const {
        EncoderState st;
        st.pre = pre_.make_state();
        for (int i = 0; i < 5; ++i) {
            st.down.push_back(down_[i].make_state());
            st.res.push_back(res_[i].make_state());
        }
        st.post = post_.make_state();
        return st;
    }

    // wave must be 1 x N with N a multiple of 320 (one or more 20 ms hops);
    // callers with arbitrary buffers go through the streaming runtime, which
    // buffers to hop boundaries.
    FrameTensor encode(const FrameTensor& wave, EncoderState& st) const {
        if (wave.channels != 1)
            throw Error("encode: expected mono waveform, got " +
                        std::to_string(wave.channels) + " channels");
        if (wave.frames % kHopSamples != 0)
            throw Error("encode: input length " + std::to_string(wave.frames) +
                        " is not a multiple of " + std::to_string(kHopSamples) +
                        " samples; buffer input to 20 ms hops");
        FrameTensor x = pre_.forward(wave, st.pre);
        for (int i = 0; i < 5; ++i) {
            leaky_relu_inplace(x, kLeakySlope);
            x = down_[i].forward(x, st.down[i]);
            x = res_[i].forward(x, st.res[i], kLeakySlope);
        }
        leaky_relu_inplace(x, kLeakySlope);
        return post_.forward(x, st.post);
    }

    // Per-frame logits over the discrete speech units (training target head;
    // not part of the synthesis path).
    FrameTensor logits(const FrameTensor& z) const {
        ConvState st = units_.make_state();  // kernel 1, no history
        return units_.forward(z, st);
    }

    const ModelConfig& config() const { return cfg_; }

  private:
    ModelConfig cfg_;
    CausalConvLayer pre_;
    std::vector<CausalConvLayer> down_;
    std::vector<MrfBlock> res_;
    CausalConvLayer post_;
    CausalConvLayer units_;
};

// Per-frame argmax over unit logits; ties resolve to the lower index.
inline std::vector<int> predict_units(const FrameTensor& logits) {
    require_finite(logits, "predict_units");
    std::vector<int> out(static_cast<size_t>(logits.frames));
    for (int64_t t = 0; t < logits.frames; ++t) {
        int best = 0;
        float best_v = logits.at(0, t);
        for (int c = 1; c < logits.channels; ++c) {
            const float v = logits.at(c, t);
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        out[t] = best;
    }
    return out;
}

}  // namespace sasa
