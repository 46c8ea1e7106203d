#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "sasa/tensor.hpp"

namespace sasa {

struct ConvSpec {
    int in_channels = 1;
    int out_channels = 1;
    int kernel_size = 1;
    int stride = 1;
    int dilation = 1;
    bool has_bias = true;

    int64_t history_frames() const {
        return static_cast<int64_t>(kernel_size - 1) * dilation;
    }
    int64_t weight_count() const {
        return static_cast<int64_t>(out_channels) * in_channels * kernel_size;
    }
    void validate(const std::string& name) const {
        if (in_channels < 1 || out_channels < 1)
            throw Error(name + ": channel counts must be positive");
        if (kernel_size < 1 || stride < 1 || dilation < 1)
            throw Error(name + ": kernel_size, stride and dilation must be >= 1");
        if (dilation > 1 && stride != 1)
            throw Error(name + ": stride must be 1 when dilation > 1");
    }
};

// Trailing input window a causal convolution needs across calls. Starts as
// zeros, which makes the first call equal to a left-zero-padded offline
// convolution.
struct ConvState {
    FrameTensor history;

    static ConvState zeros(const ConvSpec& spec) {
        ConvState st;
        st.history = FrameTensor(spec.in_channels, spec.history_frames());
        return st;
    }
};

// out[oc][n] = bias[oc] + sum_ic sum_j w[oc][ic][j] * in[ic][n*stride - (k-1-j)*dilation]
// with out-of-range samples taken from `state`. Accumulation runs input
// channels ascending, then taps ascending, for every output element, so any
// chunking of the input concatenates to the bit-identical result.
//
// Two loop structures are used depending on shape: one vectorizes across
// output frames, the other across output channels (using `w_t`, the same
// weights transposed to [ic][j][oc]). Both perform the identical per-element
// operation sequence, so they produce the same bits; the channel form wins
// when a streaming push carries only a handful of frames into a wide layer.
inline FrameTensor causal_conv1d(const FrameTensor& x, const float* w, const float* bias,
                                 const ConvSpec& spec, ConvState& state, const std::string& name,
                                 const float* w_t = nullptr) {
    spec.validate(name);
    if (x.channels != spec.in_channels)
        throw Error(name + ": input has " + std::to_string(x.channels) + " channels, expected " +
                    std::to_string(spec.in_channels));
    if (x.frames % spec.stride != 0)
        throw Error(name + ": input frames (" + std::to_string(x.frames) +
                    ") not divisible by stride " + std::to_string(spec.stride));
    const int64_t hist = spec.history_frames();
    if (state.history.channels != spec.in_channels || state.history.frames != hist)
        throw Error(name + ": state shape " + state.history.shape_str() + " does not match spec");
    require_finite(x, name);

    const int k = spec.kernel_size;
    const int d = spec.dilation;
    const int s = spec.stride;
    const int64_t in_frames = x.frames;
    const int64_t out_frames = in_frames / s;

    FrameTensor ext(spec.in_channels, hist + in_frames);
    for (int c = 0; c < spec.in_channels; ++c) {
        float* e = ext.row(c);
        if (hist > 0) std::memcpy(e, state.history.row(c), hist * sizeof(float));
        if (in_frames > 0) std::memcpy(e + hist, x.row(c), in_frames * sizeof(float));
    }

    FrameTensor out(spec.out_channels, out_frames);
    constexpr int kMaxChan = 1024;
    if (w_t && out_frames < 48 && spec.out_channels >= 32 && spec.out_channels <= kMaxChan) {
        float accv[kMaxChan];
        for (int64_t n = 0; n < out_frames; ++n) {
            if (spec.has_bias)
                std::memcpy(accv, bias, spec.out_channels * sizeof(float));
            else
                std::memset(accv, 0, spec.out_channels * sizeof(float));
            for (int ic = 0; ic < spec.in_channels; ++ic) {
                const float* e = ext.row(ic) + n * s;
                for (int j = 0; j < k; ++j) {
                    const float ev = e[static_cast<int64_t>(j) * d];
                    const float* wt = w_t + (static_cast<size_t>(ic) * k + j) * spec.out_channels;
                    for (int oc = 0; oc < spec.out_channels; ++oc) accv[oc] += ev * wt[oc];
                }
            }
            for (int oc = 0; oc < spec.out_channels; ++oc) out.at(oc, n) = accv[oc];
        }
    } else {
        constexpr int64_t kBlock = 256;
        float acc[kBlock];
        for (int oc = 0; oc < spec.out_channels; ++oc) {
            float* orow = out.row(oc);
            const float b = spec.has_bias ? bias[oc] : 0.0f;
            const float* wrow = w + static_cast<size_t>(oc) * spec.in_channels * k;
            for (int64_t n0 = 0; n0 < out_frames; n0 += kBlock) {
                const int64_t nb = std::min(kBlock, out_frames - n0);
                for (int64_t i = 0; i < nb; ++i) acc[i] = b;
                for (int ic = 0; ic < spec.in_channels; ++ic) {
                    const float* e = ext.row(ic) + n0 * s;
                    const float* wt = wrow + static_cast<size_t>(ic) * k;
                    for (int j = 0; j < k; ++j) {
                        const float wj = wt[j];
                        const float* src = e + static_cast<int64_t>(j) * d;
                        if (s == 1) {
                            for (int64_t i = 0; i < nb; ++i) acc[i] += wj * src[i];
                        } else {
                            for (int64_t i = 0; i < nb; ++i) acc[i] += wj * src[i * s];
                        }
                    }
                }
                std::memcpy(orow + n0, acc, nb * sizeof(float));
            }
        }
    }

    if (hist > 0)
        for (int c = 0; c < spec.in_channels; ++c)
            std::memcpy(state.history.row(c), ext.row(c) + in_frames, hist * sizeof(float));
    return out;
}

// Causal transposed convolution realized as zero-stuffing by `up_factor`
// followed by causal_conv1d, so output frame m depends only on input frames
// <= floor(m / up_factor).
inline FrameTensor causal_upsample_conv1d(const FrameTensor& x, const float* w, const float* bias,
                                          const ConvSpec& spec, int up_factor, ConvState& state,
                                          const std::string& name) {
    if (up_factor < 1) throw Error(name + ": up_factor must be >= 1");
    if (spec.stride != 1 || spec.dilation != 1)
        throw Error(name + ": upsample conv requires stride 1 and dilation 1");
    if (x.channels != spec.in_channels)
        throw Error(name + ": input has " + std::to_string(x.channels) + " channels, expected " +
                    std::to_string(spec.in_channels));
    FrameTensor stuffed(spec.in_channels, x.frames * up_factor);
    for (int c = 0; c < spec.in_channels; ++c) {
        const float* src = x.row(c);
        float* dst = stuffed.row(c);
        for (int64_t t = 0; t < x.frames; ++t) dst[t * up_factor] = src[t];
    }
    return causal_conv1d(stuffed, w, bias, spec, state, name);
}

inline FrameTensor leaky_relu(const FrameTensor& x, float slope) {
    FrameTensor out = x;
    for (float& v : out.data)
        if (v < 0.0f) v *= slope;
    return out;
}

inline void leaky_relu_inplace(FrameTensor& x, float slope) {
    for (float& v : x.data)
        if (v < 0.0f) v *= slope;
}

inline void relu_inplace(FrameTensor& x) {
    for (float& v : x.data)
        if (v < 0.0f) v = 0.0f;
}

inline FrameTensor tanh_map(const FrameTensor& x) {
    FrameTensor out = x;
    for (float& v : out.data) v = std::tanh(v);
    return out;
}

// Per-frame softmax across channels; every column sums to 1 (up to rounding).
inline FrameTensor softmax_channels(const FrameTensor& x) {
    FrameTensor out(x.channels, x.frames);
    for (int64_t t = 0; t < x.frames; ++t) {
        float m = x.at(0, t);
        for (int c = 1; c < x.channels; ++c) m = std::max(m, x.at(c, t));
        float sum = 0.0f;
        for (int c = 0; c < x.channels; ++c) {
            float e = std::exp(x.at(c, t) - m);
            out.at(c, t) = e;
            sum += e;
        }
        for (int c = 0; c < x.channels; ++c) out.at(c, t) /= sum;
    }
    return out;
}

// Running per-channel statistics from the start of the stream, kept in
// Welford form (count, mean, sum of squared deviations) so constant input
// normalizes to exactly zero in float32.
struct CumulativeNormState {
    std::vector<float> mean;
    std::vector<float> m2;
    int64_t count = 0;

    static CumulativeNormState zeros(int channels) {
        CumulativeNormState st;
        st.mean.assign(channels, 0.0f);
        st.m2.assign(channels, 0.0f);
        return st;
    }
};

// Instance normalization with causal (cumulative) statistics: frame t is
// normalized by the mean/variance of frames [0..t] seen so far on this
// stream. Chunking does not change the result.
inline FrameTensor causal_instance_norm(const FrameTensor& x, CumulativeNormState& state,
                                        float eps = 1e-5f) {
    if (static_cast<size_t>(x.channels) != state.mean.size())
        throw Error("causal_instance_norm: state has " + std::to_string(state.mean.size()) +
                    " channels, input has " + std::to_string(x.channels));
    FrameTensor out(x.channels, x.frames);
    for (int64_t t = 0; t < x.frames; ++t) {
        state.count += 1;
        const float inv_n = 1.0f / static_cast<float>(state.count);
        for (int c = 0; c < x.channels; ++c) {
            const float v = x.at(c, t);
            const float delta = v - state.mean[c];
            state.mean[c] += delta * inv_n;
            state.m2[c] += delta * (v - state.mean[c]);
            const float var = state.m2[c] * inv_n;
            out.at(c, t) = (v - state.mean[c]) / std::sqrt(var + eps);
        }
    }
    return out;
}

// Per-frame normalization across channels with learned gain/bias. Dropout
// that follows it in the predictors is identity at inference.
inline FrameTensor layer_norm_frame(const FrameTensor& x, const float* gain, const float* bias,
                                    float eps = 1e-5f) {
    FrameTensor out(x.channels, x.frames);
    const float inv_c = 1.0f / static_cast<float>(x.channels);
    for (int64_t t = 0; t < x.frames; ++t) {
        float mean = 0.0f;
        for (int c = 0; c < x.channels; ++c) mean += x.at(c, t);
        mean *= inv_c;
        float var = 0.0f;
        for (int c = 0; c < x.channels; ++c) {
            const float dv = x.at(c, t) - mean;
            var += dv * dv;
        }
        var *= inv_c;
        const float inv_std = 1.0f / std::sqrt(var + eps);
        for (int c = 0; c < x.channels; ++c)
            out.at(c, t) = (x.at(c, t) - mean) * inv_std * gain[c] + bias[c];
    }
    return out;
}

inline void add_inplace(FrameTensor& a, const FrameTensor& b) {
    if (!a.same_shape(b))
        throw Error("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    for (size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

}  // namespace sasa
