#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "sasa/embedding.hpp"
#include "sasa/layers.hpp"

namespace sasa {

// User-facing prosody controls; the defaults are the identity transform.
struct VarianceControls {
    float pitch_shift_semitones = 0.0f;
    float pitch_scale = 1.0f;
    float energy_scale = 1.0f;

    void validate() const {
        if (!(pitch_scale > 0.0f) || !(energy_scale > 0.0f))
            throw Error("variance controls: pitch_scale and energy_scale must be > 0");
    }
};

// Running mean of voiced log-F0 from the stream start, used when rescaling
// pitch excursions about the utterance-so-far mean.
struct PitchStatState {
    float voiced_sum = 0.0f;
    int64_t voiced_count = 0;
};

struct AdapterState {
    CumulativeNormState norm;
    std::array<ConvState, 2> pitch_conv;
    std::array<ConvState, 2> energy_conv;
    PitchStatState pitch_stats;
};

// Shift is applied per voiced frame (semitones -> log-F0 offset of
// shift*ln2/12), then excursions are scaled about the running voiced mean.
// Frames with value 0 are unvoiced and pass through untouched.
inline FrameTensor transform_pitch_track(const FrameTensor& pitch, const VarianceControls& ctl,
                                         PitchStatState& st) {
    if (pitch.channels != 1) throw Error("pitch track must be 1 x T");
    constexpr float kLn2Over12 = 0.05776226504666210911f;
    const float offset = ctl.pitch_shift_semitones * kLn2Over12;
    FrameTensor out(1, pitch.frames);
    for (int64_t t = 0; t < pitch.frames; ++t) {
        const float v = pitch.at(0, t);
        if (v == 0.0f) {
            out.at(0, t) = 0.0f;
            continue;
        }
        const float shifted = v + offset;
        st.voiced_sum += shifted;
        st.voiced_count += 1;
        if (ctl.pitch_scale == 1.0f) {
            // exact identity at the default scale
            out.at(0, t) = shifted;
        } else {
            const float mean = st.voiced_sum / static_cast<float>(st.voiced_count);
            out.at(0, t) = mean + (shifted - mean) * ctl.pitch_scale;
        }
    }
    return out;
}

// adaIN + FiLM conditioning of the content representation on a speaker
// embedding, plus the pitch/energy predictors and injection.
class SpeakerAdapter {
  public:
    explicit SpeakerAdapter(const ModelWeights& m) : cfg_(m.config) {
        const int h = cfg_.hidden_dim;
        const int e = cfg_.embed_dim;
        const int f = cfg_.predictor_channels;
        scale_ = CausalConvLayer("adapt.scale", ConvSpec{e, h, 1, 1, 1, true}, m);
        shift_ = CausalConvLayer("adapt.shift", ConvSpec{e, h, 1, 1, 1, true}, m);
        for (const char* which : {"pitch", "energy"}) {
            Predictor& p = (std::string(which) == "pitch") ? pitch_ : energy_;
            const std::string prefix = std::string("adapt.") + which;
            p.conv0 = CausalConvLayer(prefix + ".conv.0", ConvSpec{h, f, 3, 1, 1, true}, m);
            p.conv1 = CausalConvLayer(prefix + ".conv.1", ConvSpec{f, f, 3, 1, 1, true}, m);
            p.norm0_g = m.ptr(prefix + ".norm.0.g");
            p.norm0_b = m.ptr(prefix + ".norm.0.b");
            p.norm1_g = m.ptr(prefix + ".norm.1.g");
            p.norm1_b = m.ptr(prefix + ".norm.1.b");
            p.head = CausalConvLayer(prefix + ".head", ConvSpec{f, 1, 1, 1, 1, true}, m);
            p.proj = CausalConvLayer(prefix + ".proj", ConvSpec{1, h, 1, 1, 1, true}, m);
        }
        pitch_mean_ = cfg_.pitch_mean;
        pitch_std_ = cfg_.pitch_std;
        energy_mean_ = cfg_.energy_mean;
        energy_std_ = cfg_.energy_std;
    }

    AdapterState make_state() const {
        AdapterState st;
        st.norm = CumulativeNormState::zeros(cfg_.hidden_dim);
        st.pitch_conv = {pitch_.conv0.make_state(), pitch_.conv1.make_state()};
        st.energy_conv = {energy_.conv0.make_state(), energy_.conv1.make_state()};
        return st;
    }

    // Per-channel (scale, shift) computed from the embedding through the two
    // kernel-1 conv stacks. Fixed for the lifetime of a stream, so sessions
    // compute it once.
    std::pair<std::vector<float>, std::vector<float>> condition(
        const SpeakerEmbedding& emb) const {
        if (emb.dim() != cfg_.embed_dim)
            throw Error("speaker embedding dim " + std::to_string(emb.dim()) +
                        " does not match model embed_dim " + std::to_string(cfg_.embed_dim));
        emb.require_valid("speaker_adapt");
        FrameTensor ein(cfg_.embed_dim, 1);
        for (int c = 0; c < cfg_.embed_dim; ++c) ein.at(c, 0) = emb.values[c];
        ConvState s1 = scale_.make_state();
        ConvState s2 = shift_.make_state();
        FrameTensor sc = scale_.forward(ein, s1);
        FrameTensor sh = shift_.forward(ein, s2);
        return {sc.data, sh.data};
    }

    FrameTensor adapt(const FrameTensor& z, const SpeakerEmbedding& emb,
                      AdapterState& st) const {
        const auto [sc, sh] = condition(emb);
        return adapt_conditioned(z, sc, sh, st);
    }

    FrameTensor adapt_conditioned(const FrameTensor& z, const std::vector<float>& scale,
                                  const std::vector<float>& shift, AdapterState& st) const {
        if (z.channels != cfg_.hidden_dim)
            throw Error("speaker_adapt: z has " + std::to_string(z.channels) +
                        " channels, expected " + std::to_string(cfg_.hidden_dim));
        FrameTensor out = causal_instance_norm(z, st.norm);
        for (int c = 0; c < out.channels; ++c) {
            float* row = out.row(c);
            const float a = scale[c];
            const float b = shift[c];
            for (int64_t t = 0; t < out.frames; ++t) row[t] = row[t] * a + b;
        }
        return out;
    }

    FrameTensor predict_pitch(const FrameTensor& z_adapted, AdapterState& st) const {
        return predict(pitch_, z_adapted, st.pitch_conv, pitch_mean_, pitch_std_);
    }
    FrameTensor predict_energy(const FrameTensor& z_adapted, AdapterState& st) const {
        return predict(energy_, z_adapted, st.energy_conv, energy_mean_, energy_std_);
    }

    // z' = z_adapted + proj_p(transform(pitch)) + proj_e(energy * scale)
    FrameTensor apply_variance(const FrameTensor& z_adapted, const FrameTensor& pitch,
                               const FrameTensor& energy, const VarianceControls& ctl,
                               AdapterState& st) const {
        ctl.validate();
        if (pitch.frames != z_adapted.frames || energy.frames != z_adapted.frames)
            throw Error("apply_variance: track length mismatch (z " +
                        std::to_string(z_adapted.frames) + ", pitch " +
                        std::to_string(pitch.frames) + ", energy " +
                        std::to_string(energy.frames) + ")");
        FrameTensor p = transform_pitch_track(pitch, ctl, st.pitch_stats);
        FrameTensor e(1, energy.frames);
        for (int64_t t = 0; t < energy.frames; ++t)
            e.at(0, t) = energy.at(0, t) * ctl.energy_scale;
        ConvState sp = pitch_.proj.make_state();
        ConvState se = energy_.proj.make_state();
        FrameTensor out = z_adapted;
        add_inplace(out, pitch_.proj.forward(p, sp));
        add_inplace(out, energy_.proj.forward(e, se));
        return out;
    }

    const ModelConfig& config() const { return cfg_; }

  private:
    struct Predictor {
        CausalConvLayer conv0, conv1, head, proj;
        const float* norm0_g = nullptr;
        const float* norm0_b = nullptr;
        const float* norm1_g = nullptr;
        const float* norm1_b = nullptr;
    };

    FrameTensor predict(const Predictor& p, const FrameTensor& z, std::array<ConvState, 2>& st,
                        float mean, float stddev) const {
        FrameTensor t = p.conv0.forward(z, st[0]);
        relu_inplace(t);
        t = layer_norm_frame(t, p.norm0_g, p.norm0_b);
        t = p.conv1.forward(t, st[1]);
        relu_inplace(t);
        t = layer_norm_frame(t, p.norm1_g, p.norm1_b);
        ConvState hs = p.head.make_state();
        FrameTensor raw = p.head.forward(t, hs);
        for (float& v : raw.data) v = v * stddev + mean;
        return raw;
    }

    ModelConfig cfg_;
    CausalConvLayer scale_, shift_;
    Predictor pitch_, energy_;
    float pitch_mean_, pitch_std_, energy_mean_, energy_std_;
};

// ----- ground-truth pitch/energy extraction (analysis side) -----

constexpr float kPitchFloorHz = 50.0f;
constexpr float kPitchCeilHz = 600.0f;
constexpr float kYinThreshold = 0.15f;
constexpr int kYinWindow = 960;  // trailing window per 20 ms hop

// YIN-style estimator over a trailing window per 320-sample hop: cumulative
// mean normalized difference, first dip below threshold walked to its local
// minimum, parabolic refinement. Returns F0 in Hz, or 0 for unvoiced.
class PitchTracker {
  public:
    PitchTracker() : window_(kYinWindow, 0.0f) {}

    float push_hop(const float* hop, int n) {
        if (n != kHopSamples) throw Error("PitchTracker: hop must be 320 samples");
        std::memmove(window_.data(), window_.data() + n, (kYinWindow - n) * sizeof(float));
        std::memcpy(window_.data() + (kYinWindow - n), hop, n * sizeof(float));
        return estimate();
    }

  private:
    float estimate() const {
        const int tau_min = static_cast<int>(kSampleRate / kPitchCeilHz);  // 26
        const int tau_max = static_cast<int>(kSampleRate / kPitchFloorHz);  // 320
        std::vector<double> diff(tau_max + 1, 0.0);
        for (int tau = 1; tau <= tau_max; ++tau) {
            double acc = 0.0;
            for (int i = 0; i + tau < kYinWindow; ++i) {
                const double dv = window_[i] - window_[i + tau];
                acc += dv * dv;
            }
            diff[tau] = acc;
        }
        // cumulative mean normalized difference
        std::vector<double> cmnd(tau_max + 1, 1.0);
        double running = 0.0;
        for (int tau = 1; tau <= tau_max; ++tau) {
            running += diff[tau];
            cmnd[tau] = (running > 0.0) ? diff[tau] * tau / running : 1.0;
        }
        int tau = -1;
        for (int t = tau_min; t <= tau_max; ++t) {
            if (cmnd[t] < kYinThreshold) {
                while (t + 1 <= tau_max && cmnd[t + 1] < cmnd[t]) ++t;
                tau = t;
                break;
            }
        }
        if (tau < 0) return 0.0f;
        double refined = tau;
        if (tau > tau_min && tau < tau_max) {
            const double a = cmnd[tau - 1], b = cmnd[tau], c = cmnd[tau + 1];
            const double den = a - 2.0 * b + c;
            if (den > 1e-12) refined = tau + 0.5 * (a - c) / den;
        }
        const double f0 = kSampleRate / refined;
        if (f0 < kPitchFloorHz || f0 > kPitchCeilHz) return 0.0f;
        return static_cast<float>(f0);
    }

    std::vector<float> window_;
};

// log(RMS + 1e-7) of one 320-sample hop.
inline float hop_energy(const float* hop, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += static_cast<double>(hop[i]) * hop[i];
    const double rms = std::sqrt(acc / n);
    return static_cast<float>(std::log(rms + 1e-7));
}

// Per-hop log-F0 track (natural log of Hz, 0 = unvoiced) for a whole take.
inline FrameTensor extract_pitch(const FrameTensor& wave) {
    if (wave.channels != 1) throw Error("extract_pitch: expected mono waveform");
    const int64_t hops = wave.frames / kHopSamples;
    FrameTensor out(1, hops);
    PitchTracker tracker;
    for (int64_t h = 0; h < hops; ++h) {
        const float f0 = tracker.push_hop(wave.row(0) + h * kHopSamples, kHopSamples);
        out.at(0, h) = (f0 > 0.0f) ? std::log(f0) : 0.0f;
    }
    return out;
}

inline FrameTensor extract_energy(const FrameTensor& wave) {
    if (wave.channels != 1) throw Error("extract_energy: expected mono waveform");
    const int64_t hops = wave.frames / kHopSamples;
    FrameTensor out(1, hops);
    for (int64_t h = 0; h < hops; ++h)
        out.at(0, h) = hop_energy(wave.row(0) + h * kHopSamples, kHopSamples);
    return out;
}

}  // namespace sasa
