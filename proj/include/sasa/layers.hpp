#pragma once

#include <string>
#include <vector>

#include "sasa/kernels.hpp"
#include "sasa/model.hpp"

namespace sasa {

// A causal conv bound to tensors of a loaded model. Keeps an [ic][j][oc]
// transposed copy of the kernel so short pushes into wide layers can take
// the channel-vectorized path.
class CausalConvLayer {
  public:
    CausalConvLayer() = default;
    CausalConvLayer(std::string name, ConvSpec spec, const ModelWeights& m)
        : name_(std::move(name)), spec_(spec) {
        const Tensor& wt = m.get(name_ + ".w");
        const Tensor& bt = m.get(name_ + ".b");
        std::vector<int> want = {spec_.out_channels, spec_.in_channels, spec_.kernel_size};
        if (wt.shape != want)
            throw ContainerError(name_ + ".w has unexpected shape");
        if (bt.shape != std::vector<int>{spec_.out_channels})
            throw ContainerError(name_ + ".b has unexpected shape");
        w_ = wt.data.data();
        b_ = bt.data.data();
        const int k = spec_.kernel_size;
        transposed_.resize(wt.data.size());
        for (int oc = 0; oc < spec_.out_channels; ++oc)
            for (int ic = 0; ic < spec_.in_channels; ++ic)
                for (int j = 0; j < k; ++j)
                    transposed_[(static_cast<size_t>(ic) * k + j) * spec_.out_channels + oc] =
                        w_[(static_cast<size_t>(oc) * spec_.in_channels + ic) * k + j];
    }

    FrameTensor forward(const FrameTensor& x, ConvState& st) const {
        return causal_conv1d(x, w_, b_, spec_, st, name_, transposed_.data());
    }

    FrameTensor forward_upsample(const FrameTensor& x, int up, ConvState& st) const {
        return causal_upsample_conv1d(x, w_, b_, spec_, up, st, name_);
    }

    ConvState make_state() const { return ConvState::zeros(spec_); }
    const ConvSpec& spec() const { return spec_; }
    const std::string& name() const { return name_; }

  private:
    std::string name_;
    ConvSpec spec_;
    const float* w_ = nullptr;
    const float* b_ = nullptr;
    std::vector<float> transposed_;
};

// HiFiGAN-style multi-receptive-field fusion: one residual branch per kernel
// size, each branch a chain of (dilated conv, unit-dilation conv) pairs with
// leaky-relu activations, branch outputs averaged.
class MrfBlock {
  public:
    MrfBlock() = default;
    MrfBlock(const std::string& prefix, int channels, const ModelConfig& cfg,
             const ModelWeights& m) {
        for (size_t ki = 0; ki < cfg.resblock_kernels.size(); ++ki) {
            const int k = cfg.resblock_kernels[ki];
            for (size_t di = 0; di < cfg.resblock_dilations.size(); ++di) {
                const auto& pair = cfg.resblock_dilations[di];
                const std::string base =
                    prefix + "." + std::to_string(ki) + "." + std::to_string(di);
                convs_.emplace_back(base + ".0",
                                    ConvSpec{channels, channels, k, 1, pair[0], true}, m);
                convs_.emplace_back(base + ".1",
                                    ConvSpec{channels, channels, k, 1, pair[1], true}, m);
            }
        }
        branches_ = static_cast<int>(cfg.resblock_kernels.size());
        pairs_ = static_cast<int>(cfg.resblock_dilations.size());
    }

    std::vector<ConvState> make_state() const {
        std::vector<ConvState> st;
        st.reserve(convs_.size());
        for (const auto& c : convs_) st.push_back(c.make_state());
        return st;
    }

    FrameTensor forward(const FrameTensor& x, std::vector<ConvState>& st, float slope) const {
        FrameTensor sum;
        size_t idx = 0;
        for (int b = 0; b < branches_; ++b) {
            FrameTensor xb = x;
            for (int p = 0; p < pairs_; ++p) {
                FrameTensor t = leaky_relu(xb, slope);
                t = convs_[idx].forward(t, st[idx]);
                ++idx;
                leaky_relu_inplace(t, slope);
                t = convs_[idx].forward(t, st[idx]);
                ++idx;
                add_inplace(xb, t);
            }
            if (b == 0)
                sum = std::move(xb);
            else
                add_inplace(sum, xb);
        }
        const float div = static_cast<float>(branches_);
        for (float& v : sum.data) v /= div;
        return sum;
    }

    size_t conv_count() const { return convs_.size(); }

  private:
    std::vector<CausalConvLayer> convs_;
    int branches_ = 0;
    int pairs_ = 0;
};

constexpr float kLeakySlope = 0.1f;

}  // namespace sasa
