#pragma once

#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "sasa/error.hpp"
#include "sasa/rng.hpp"

namespace sasa {

constexpr int kSampleRate = 16000;
constexpr int kHopSamples = 320;  // product of the downsampling rates; 20 ms at 16 kHz

// Architecture description stored as the JSON text block of a weight
// container. Two stock variants (base/lite) share every rate and kernel
// schedule and differ in widths.
struct ModelConfig {
    std::string variant = "base";
    int sample_rate = kSampleRate;
    int hidden_dim = 512;
    int embed_dim = 704;  // ECAPA (192) + x-vector (512) concatenation
    int num_units = 200;
    std::vector<int> downsample_rates = {2, 2, 4, 4, 5};
    std::vector<int> upsample_rates = {5, 4, 4, 2, 2};
    std::vector<int> resblock_kernels = {3, 7, 11};
    std::vector<std::vector<int>> resblock_dilations = {{1, 1}, {3, 1}, {5, 1}};
    // encoder_channels[0] is the input conv width, [1..5] the width after
    // each downsampling stage; decoder_channels mirrors it for upsampling.
    std::vector<int> encoder_channels;
    std::vector<int> decoder_channels;
    int predictor_channels = 0;
    int gen_latent_dim = 128;
    std::vector<int> gen_hidden = {128, 256};
    float pitch_mean = 0.0f, pitch_std = 1.0f;
    float energy_mean = 0.0f, energy_std = 1.0f;

    static ModelConfig base() {
        ModelConfig c;
        c.variant = "base";
        c.hidden_dim = 512;
        c.encoder_channels = {4, 4, 8, 16, 32, 128};
        c.decoder_channels = {32, 32, 16, 8, 4, 4};
        c.predictor_channels = 288;
        return c;
    }

    static ModelConfig lite() {
        ModelConfig c;
        c.variant = "lite";
        c.hidden_dim = 128;
        c.encoder_channels = {4, 4, 4, 8, 16, 32};
        c.decoder_channels = {16, 16, 8, 4, 4, 4};
        c.predictor_channels = 64;
        return c;
    }

    int hop() const {
        return std::accumulate(downsample_rates.begin(), downsample_rates.end(), 1,
                               std::multiplies<int>());
    }

    void validate() const {
        if (downsample_rates.size() != 5 || upsample_rates.size() != 5)
            throw Error("config: expected 5 downsample and 5 upsample rates");
        int down = hop();
        int up = std::accumulate(upsample_rates.begin(), upsample_rates.end(), 1,
                                 std::multiplies<int>());
        if (down != kHopSamples || up != kHopSamples)
            throw Error("config: rate products must equal " + std::to_string(kHopSamples));
        if (encoder_channels.size() != 6 || decoder_channels.size() != 6)
            throw Error("config: encoder/decoder channel lists must have 6 entries");
        if (hidden_dim < 1 || embed_dim < 1 || num_units < 2 || predictor_channels < 1)
            throw Error("config: invalid dimensions");
        if (resblock_kernels.size() != resblock_dilations.size())
            throw Error("config: resblock kernel/dilation schedule mismatch");
        if (sample_rate != kSampleRate)
            throw Error("config: only 16 kHz models are supported");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "sasa-model";
        j["variant"] = variant;
        j["sample_rate"] = sample_rate;
        j["hidden_dim"] = hidden_dim;
        j["embed_dim"] = embed_dim;
        j["num_units"] = num_units;
        j["downsample_rates"] = downsample_rates;
        j["upsample_rates"] = upsample_rates;
        j["resblock_kernels"] = resblock_kernels;
        j["resblock_dilations"] = resblock_dilations;
        j["encoder_channels"] = encoder_channels;
        j["decoder_channels"] = decoder_channels;
        j["predictor_channels"] = predictor_channels;
        j["gen_latent_dim"] = gen_latent_dim;
        j["gen_hidden"] = gen_hidden;
        j["pitch_stats"] = {pitch_mean, pitch_std};
        j["energy_stats"] = {energy_mean, energy_std};
        return j;
    }

    static ModelConfig from_json(const nlohmann::json& j) {
        ModelConfig c;
        try {
            if (j.at("format").get<std::string>() != "sasa-model")
                throw Error("config: not a model container");
            c.variant = j.at("variant").get<std::string>();
            c.sample_rate = j.at("sample_rate").get<int>();
            c.hidden_dim = j.at("hidden_dim").get<int>();
            c.embed_dim = j.at("embed_dim").get<int>();
            c.num_units = j.at("num_units").get<int>();
            c.downsample_rates = j.at("downsample_rates").get<std::vector<int>>();
            c.upsample_rates = j.at("upsample_rates").get<std::vector<int>>();
            c.resblock_kernels = j.at("resblock_kernels").get<std::vector<int>>();
            c.resblock_dilations = j.at("resblock_dilations").get<std::vector<std::vector<int>>>();
            c.encoder_channels = j.at("encoder_channels").get<std::vector<int>>();
            c.decoder_channels = j.at("decoder_channels").get<std::vector<int>>();
            c.predictor_channels = j.at("predictor_channels").get<int>();
            c.gen_latent_dim = j.at("gen_latent_dim").get<int>();
            c.gen_hidden = j.at("gen_hidden").get<std::vector<int>>();
            c.pitch_mean = j.at("pitch_stats")[0].get<float>();
            c.pitch_std = j.at("pitch_stats")[1].get<float>();
            c.energy_mean = j.at("energy_stats")[0].get<float>();
            c.energy_std = j.at("energy_stats")[1].get<float>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("config: ") + e.what());
        }
        c.validate();
        return c;
    }
};

struct Tensor {
    std::vector<int> shape;
    std::vector<float> data;

    int64_t size() const {
        int64_t n = 1;
        for (int d : shape) n *= d;
        return n;
    }
};

struct TensorSpec {
    std::string name;
    std::vector<int> shape;
    // Weight tensors draw from N(init_mean, 0.02^2); norm gains and the
    // multiplicative conditioning biases start around 1 instead of 0 so a
    // freshly seeded model still passes signal end to end.
    float init_mean = 0.0f;
};

namespace detail {

inline void conv_specs(std::vector<TensorSpec>& out, const std::string& name, int in_ch,
                       int out_ch, int k, float bias_mean = 0.0f) {
    out.push_back({name + ".w", {out_ch, in_ch, k}, 0.0f});
    out.push_back({name + ".b", {out_ch}, bias_mean});
}

inline void resblock_specs(std::vector<TensorSpec>& out, const std::string& prefix, int channels,
                           const ModelConfig& c) {
    for (size_t ki = 0; ki < c.resblock_kernels.size(); ++ki) {
        const int k = c.resblock_kernels[ki];
        for (size_t di = 0; di < c.resblock_dilations.size(); ++di) {
            const std::string base =
                prefix + "." + std::to_string(ki) + "." + std::to_string(di);
            conv_specs(out, base + ".0", channels, channels, k);
            conv_specs(out, base + ".1", channels, channels, k);
        }
    }
}

inline void predictor_specs(std::vector<TensorSpec>& out, const std::string& prefix,
                            const ModelConfig& c) {
    const int f = c.predictor_channels;
    conv_specs(out, prefix + ".conv.0", c.hidden_dim, f, 3);
    out.push_back({prefix + ".norm.0.g", {f}, 1.0f});
    out.push_back({prefix + ".norm.0.b", {f}, 0.0f});
    conv_specs(out, prefix + ".conv.1", f, f, 3);
    out.push_back({prefix + ".norm.1.g", {f}, 1.0f});
    out.push_back({prefix + ".norm.1.b", {f}, 0.0f});
    conv_specs(out, prefix + ".head", f, 1, 1);
    conv_specs(out, prefix + ".proj", 1, c.hidden_dim, 1);
}

}  // namespace detail

// Full tensor directory for one model variant. The order here is the
// canonical payload order of the container file.
inline std::vector<TensorSpec> expected_tensors(const ModelConfig& c) {
    using detail::conv_specs;
    std::vector<TensorSpec> out;
    const auto& ec = c.encoder_channels;
    const auto& dc = c.decoder_channels;

    conv_specs(out, "enc.pre", 1, ec[0], 7);
    for (int i = 0; i < 5; ++i) {
        conv_specs(out, "enc.down." + std::to_string(i), ec[i], ec[i + 1],
                   2 * c.downsample_rates[i]);
        detail::resblock_specs(out, "enc.res." + std::to_string(i), ec[i + 1], c);
    }
    conv_specs(out, "enc.post", ec[5], c.hidden_dim, 3);
    conv_specs(out, "enc.units", c.hidden_dim, c.num_units, 1);

    conv_specs(out, "adapt.scale", c.embed_dim, c.hidden_dim, 1, 1.0f);
    conv_specs(out, "adapt.shift", c.embed_dim, c.hidden_dim, 1, 0.0f);
    detail::predictor_specs(out, "adapt.pitch", c);
    detail::predictor_specs(out, "adapt.energy", c);

    conv_specs(out, "dec.pre", c.hidden_dim, dc[0], 7);
    for (int i = 0; i < 5; ++i) {
        conv_specs(out, "dec.up." + std::to_string(i), dc[i], dc[i + 1],
                   2 * c.upsample_rates[i]);
        detail::resblock_specs(out, "dec.res." + std::to_string(i), dc[i + 1], c);
        conv_specs(out, "dec.film." + std::to_string(i) + ".scale", c.embed_dim, dc[i + 1], 1,
                   1.0f);
        conv_specs(out, "dec.film." + std::to_string(i) + ".shift", c.embed_dim, dc[i + 1], 1,
                   0.0f);
    }
    conv_specs(out, "dec.post", dc[5], 1, 7);

    std::vector<int> gd;
    gd.push_back(c.gen_latent_dim);
    gd.insert(gd.end(), c.gen_hidden.begin(), c.gen_hidden.end());
    gd.push_back(c.embed_dim);
    for (size_t i = 0; i + 1 < gd.size(); ++i) {
        out.push_back({"gen." + std::to_string(i) + ".w", {gd[i + 1], gd[i]}, 0.0f});
        out.push_back({"gen." + std::to_string(i) + ".b", {gd[i + 1]}, 0.0f});
    }
    return out;
}

struct ModelWeights {
    ModelConfig config;
    std::map<std::string, Tensor> tensors;

    const Tensor& get(const std::string& name) const {
        auto it = tensors.find(name);
        if (it == tensors.end()) throw ContainerError("missing tensor: " + name);
        return it->second;
    }
    const float* ptr(const std::string& name) const { return get(name).data.data(); }

    int64_t param_count() const {
        int64_t n = 0;
        for (const auto& [name, t] : tensors) n += t.size();
        return n;
    }

    int64_t param_count_prefix(const std::string& prefix) const {
        int64_t n = 0;
        for (const auto& [name, t] : tensors)
            if (name.rfind(prefix, 0) == 0) n += t.size();
        return n;
    }

    // Every expected tensor present with the exact shape, and nothing extra.
    void validate() const {
        config.validate();
        const auto specs = expected_tensors(config);
        if (specs.size() != tensors.size())
            throw ContainerError("container holds " + std::to_string(tensors.size()) +
                                 " tensors, architecture expects " + std::to_string(specs.size()));
        for (const auto& s : specs) {
            const Tensor& t = get(s.name);
            if (t.shape != s.shape) throw ContainerError("tensor " + s.name + " has wrong shape");
        }
    }

    static ModelWeights seeded(const ModelConfig& config, uint64_t seed) {
        config.validate();
        ModelWeights m;
        m.config = config;
        GaussianRng rng(seed);
        for (const auto& spec : expected_tensors(config)) {
            Tensor t;
            t.shape = spec.shape;
            t.data.resize(t.size());
            for (float& v : t.data) v = rng.next(spec.init_mean, 0.02f);
            m.tensors.emplace(spec.name, std::move(t));
        }
        return m;
    }
};

}  // namespace sasa
