#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sasa/adapter.hpp"
#include "sasa/anonymizer.hpp"
#include "sasa/decoder.hpp"
#include "sasa/encoder.hpp"

namespace sasa {

struct ChunkResult {
    std::vector<float> samples;
    double processing_seconds = 0.0;
};

struct SessionOptions {
    VarianceControls controls;
    // Use pitch/energy extracted from the input audio instead of the
    // predictors (analysis/copy mode).
    bool copy_variance = false;
};

class Engine;

// Per-stream causal state: the residual (<320 sample) input buffer plus
// every convolution history and normalization statistic in the pipeline.
// One session must be driven by one thread of control.
class StreamSession {
  public:
    ChunkResult push(std::span<const float> samples);
    std::vector<float> flush();

    int64_t samples_in() const { return samples_in_; }
    int64_t samples_out() const { return samples_out_; }
    bool closed() const { return closed_; }

    // Bytes held by the causal state; constant in stream length.
    size_t state_bytes() const;

  private:
    friend class Engine;
    StreamSession(const Engine& engine, const SpeakerEmbedding& emb, SessionOptions opts);

    std::vector<float> process_hops(const float* samples, int64_t count);

    const Engine* engine_;
    SessionOptions opts_;
    std::vector<float> adain_scale_, adain_shift_;
    DecoderConditioning dec_cond_;
    EncoderState enc_state_;
    AdapterState adapt_state_;
    DecoderState dec_state_;
    PitchTracker pitch_tracker_;
    std::vector<float> residual_;
    int64_t samples_in_ = 0;
    int64_t samples_out_ = 0;
    bool closed_ = false;
};

// Immutable model handle shared by any number of concurrent sessions.
class Engine {
  public:
    explicit Engine(ModelWeights weights)
        : weights_(std::make_shared<ModelWeights>(std::move(weights))),
          encoder_(*weights_),
          adapter_(*weights_),
          decoder_(*weights_),
          generator_(*weights_) {
        weights_->validate();
    }

    const ModelConfig& config() const { return weights_->config; }
    const ModelWeights& weights() const { return *weights_; }
    const ContentEncoder& encoder() const { return encoder_; }
    const SpeakerAdapter& adapter() const { return adapter_; }
    const Decoder& decoder() const { return decoder_; }
    const PseudoGenerator& generator() const { return generator_; }

    StreamSession open_stream(const SpeakerEmbedding& emb, SessionOptions opts = {}) const {
        return StreamSession(*this, emb, std::move(opts));
    }

    // One-shot reference path: pads to a whole number of hops (mirroring
    // flush) and runs the pipeline in a single pass over a fresh state.
    std::vector<float> offline_run(const SpeakerEmbedding& emb, const SessionOptions& opts,
                                   std::span<const float> samples) const {
        StreamSession s = open_stream(emb, opts);
        std::vector<float> padded(samples.begin(), samples.end());
        if (padded.size() % kHopSamples != 0)
            padded.resize((padded.size() / kHopSamples + 1) * kHopSamples, 0.0f);
        ChunkResult r = s.push(padded);
        return std::move(r.samples);
    }

  private:
    std::shared_ptr<ModelWeights> weights_;
    ContentEncoder encoder_;
    SpeakerAdapter adapter_;
    Decoder decoder_;
    PseudoGenerator generator_;
};

inline StreamSession::StreamSession(const Engine& engine, const SpeakerEmbedding& emb,
                                    SessionOptions opts)
    : engine_(&engine), opts_(std::move(opts)) {
    opts_.controls.validate();
    auto cond = engine.adapter().condition(emb);  // validates dims
    adain_scale_ = std::move(cond.first);
    adain_shift_ = std::move(cond.second);
    dec_cond_ = engine.decoder().condition(emb);
    enc_state_ = engine.encoder().make_state();
    adapt_state_ = engine.adapter().make_state();
    dec_state_ = engine.decoder().make_state();
}

inline std::vector<float> StreamSession::process_hops(const float* samples, int64_t count) {
    const Engine& eng = *engine_;
    FrameTensor wave(1, count);
    std::memcpy(wave.row(0), samples, count * sizeof(float));

    FrameTensor z = eng.encoder().encode(wave, enc_state_);
    FrameTensor z_a = eng.adapter().adapt_conditioned(z, adain_scale_, adain_shift_, adapt_state_);

    FrameTensor pitch, energy;
    if (opts_.copy_variance) {
        const int64_t hops = count / kHopSamples;
        pitch = FrameTensor(1, hops);
        energy = FrameTensor(1, hops);
        for (int64_t h = 0; h < hops; ++h) {
            const float* hop = samples + h * kHopSamples;
            const float f0 = pitch_tracker_.push_hop(hop, kHopSamples);
            pitch.at(0, h) = (f0 > 0.0f) ? std::log(f0) : 0.0f;
            energy.at(0, h) = hop_energy(hop, kHopSamples);
        }
    } else {
        pitch = eng.adapter().predict_pitch(z_a, adapt_state_);
        energy = eng.adapter().predict_energy(z_a, adapt_state_);
    }

    FrameTensor z_v =
        eng.adapter().apply_variance(z_a, pitch, energy, opts_.controls, adapt_state_);
    FrameTensor out = eng.decoder().decode(z_v, dec_cond_, dec_state_);
    return std::move(out.data);
}

inline ChunkResult StreamSession::push(std::span<const float> samples) {
    if (closed_) throw Error("push_chunk: session already flushed");
    if (!all_finite(samples.data(), samples.size()))
        throw Error("push_chunk: input contains NaN or Inf");
    const auto t0 = std::chrono::steady_clock::now();

    ChunkResult result;
    const int64_t total = static_cast<int64_t>(residual_.size() + samples.size());
    const int64_t ready = total / kHopSamples * kHopSamples;
    samples_in_ += static_cast<int64_t>(samples.size());
    if (ready == 0) {
        residual_.insert(residual_.end(), samples.begin(), samples.end());
    } else {
        std::vector<float> work(ready);
        std::memcpy(work.data(), residual_.data(), residual_.size() * sizeof(float));
        const int64_t from_input = ready - static_cast<int64_t>(residual_.size());
        std::memcpy(work.data() + residual_.size(), samples.data(),
                    from_input * sizeof(float));
        residual_.assign(samples.begin() + from_input, samples.end());
        result.samples = process_hops(work.data(), ready);
        samples_out_ += static_cast<int64_t>(result.samples.size());
    }
    result.processing_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

inline std::vector<float> StreamSession::flush() {
    if (closed_) throw Error("flush: session already flushed");
    closed_ = true;
    if (residual_.empty()) return {};
    // Zero-pad the trailing partial hop rather than dropping it.
    residual_.resize(kHopSamples, 0.0f);
    std::vector<float> out = process_hops(residual_.data(), kHopSamples);
    residual_.clear();
    samples_out_ += static_cast<int64_t>(out.size());
    return out;
}

inline size_t StreamSession::state_bytes() const {
    size_t n = residual_.capacity() * sizeof(float);
    n += enc_state_.pre.history.data.size() * sizeof(float);
    for (const auto& s : enc_state_.down) n += s.history.data.size() * sizeof(float);
    for (const auto& block : enc_state_.res)
        for (const auto& s : block) n += s.history.data.size() * sizeof(float);
    n += enc_state_.post.history.data.size() * sizeof(float);
    n += (adapt_state_.norm.mean.size() + adapt_state_.norm.m2.size()) * sizeof(float);
    for (const auto& s : adapt_state_.pitch_conv) n += s.history.data.size() * sizeof(float);
    for (const auto& s : adapt_state_.energy_conv) n += s.history.data.size() * sizeof(float);
    n += dec_state_.pre.history.data.size() * sizeof(float);
    for (const auto& s : dec_state_.up) n += s.history.data.size() * sizeof(float);
    for (const auto& block : dec_state_.res)
        for (const auto& s : block) n += s.history.data.size() * sizeof(float);
    n += dec_state_.post.history.data.size() * sizeof(float);
    return n;
}

}  // namespace sasa
