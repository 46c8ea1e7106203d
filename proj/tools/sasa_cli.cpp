// sasa: streaming speaker anonymization engine - command line front end.
//
// Subcommands:
//   anonymize     convert a WAV file to a pseudo-speaker rendition
//   bench         latency / real-time-factor benchmark over a chunk grid
//   init-weights  write a seeded random weight container (base or lite)
//   init-embedding  write a seeded random speaker-embedding sidecar
//   info          inspect a weight container
//   metrics       eer / cosine / stft / mel / ce utilities

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sasa/bench.hpp"
#include "sasa/container.hpp"
#include "sasa/metrics.hpp"
#include "sasa/runtime.hpp"
#include "sasa/wav.hpp"

namespace {

constexpr int kExitFormat = 2;
constexpr int kExitContainer = 3;
constexpr int kExitConstraint = 4;

std::vector<double> load_scores(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sasa::FormatError(path + ": cannot open score file");
    std::vector<double> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            size_t used = 0;
            double v = std::stod(line, &used);
            while (used < line.size() && std::isspace(static_cast<unsigned char>(line[used])))
                ++used;
            if (used != line.size()) throw std::invalid_argument("trailing junk");
            out.push_back(v);
        } catch (const std::exception&) {
            throw sasa::FormatError(path + ":" + std::to_string(lineno) +
                                    ": expected one real number per line");
        }
    }
    return out;
}

// Logits file: one frame per line, `num_units` whitespace-separated reals.
sasa::FrameTensor load_logits(const std::string& path, int num_units) {
    std::ifstream in(path);
    if (!in) throw sasa::FormatError(path + ": cannot open logits file");
    std::vector<std::vector<float>> frames;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<float> row;
        double v;
        while (ls >> v) row.push_back(static_cast<float>(v));
        if (static_cast<int>(row.size()) != num_units)
            throw sasa::FormatError(path + ":" + std::to_string(lineno) + ": expected " +
                                    std::to_string(num_units) + " values, got " +
                                    std::to_string(row.size()));
        frames.push_back(std::move(row));
    }
    sasa::FrameTensor logits(num_units, static_cast<int64_t>(frames.size()));
    for (int64_t t = 0; t < logits.frames; ++t)
        for (int c = 0; c < num_units; ++c) logits.at(c, t) = frames[t][c];
    return logits;
}

std::vector<int> load_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw sasa::FormatError(path + ": cannot open label file");
    std::vector<int> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(std::stoi(line));
        } catch (const std::exception&) {
            throw sasa::FormatError(path + ":" + std::to_string(lineno) +
                                    ": expected one integer label per line");
        }
    }
    return out;
}

struct AnonymizeArgs {
    std::string input, output, model, source_emb, blocklist;
    uint64_t seed = 0;
    int chunk_ms = 20;
    float pitch_shift = 0.0f;
    float pitch_scale = 1.0f;
    float energy_scale = 1.0f;
    float min_distance = 0.3f;
    int max_attempts = 1000;
    bool copy_variance = false;
    bool offline = false;
};

int cmd_anonymize(const AnonymizeArgs& a) {
    const std::vector<float> input = sasa::read_wav_pcm16(a.input);
    sasa::Engine engine(sasa::read_model(a.model));
    const sasa::SpeakerEmbedding source =
        sasa::read_embedding(a.source_emb, engine.config().embed_dim);

    sasa::AnonPolicy policy;
    policy.min_cosine_distance = a.min_distance;
    policy.max_attempts = a.max_attempts;
    policy.rng_seed = a.seed;
    if (!a.blocklist.empty())
        policy.blocklist = sasa::read_embedding_list(a.blocklist, engine.config().embed_dim);

    const sasa::SpeakerEmbedding pseudo = engine.generator().generate(source, policy);
    std::printf("pseudo-speaker cosine distance from source: %.6f\n",
                sasa::cosine_distance(source, pseudo));

    sasa::SessionOptions opts;
    opts.controls.pitch_shift_semitones = a.pitch_shift;
    opts.controls.pitch_scale = a.pitch_scale;
    opts.controls.energy_scale = a.energy_scale;
    opts.copy_variance = a.copy_variance;

    std::vector<float> out;
    if (a.offline) {
        out = engine.offline_run(pseudo, opts, input);
    } else {
        sasa::StreamSession session = engine.open_stream(pseudo, opts);
        const size_t chunk = static_cast<size_t>(a.chunk_ms) * (sasa::kSampleRate / 1000);
        for (size_t pos = 0; pos < input.size(); pos += chunk) {
            const size_t n = std::min(chunk, input.size() - pos);
            sasa::ChunkResult r = session.push({input.data() + pos, n});
            out.insert(out.end(), r.samples.begin(), r.samples.end());
        }
        std::vector<float> tail = session.flush();
        out.insert(out.end(), tail.begin(), tail.end());
    }
    sasa::write_wav_pcm16(a.output, out);
    std::printf("wrote %s (%zu samples, %.2f s)\n", a.output.c_str(), out.size(),
                static_cast<double>(out.size()) / sasa::kSampleRate);
    return 0;
}

struct BenchArgs {
    std::string model;
    std::vector<int> chunk_ms;
    int trials = 20;
    int warmup = 5;
    int parallel = 1;
    uint64_t seed = 1234;
    std::string format = "table";
    std::string device = "cpu";
};

int cmd_bench(const BenchArgs& a) {
    sasa::Engine engine(sasa::read_model(a.model));
    const auto chunks = a.chunk_ms.empty() ? sasa::default_bench_chunks() : a.chunk_ms;
    sasa::BenchReport report =
        sasa::run_bench(engine, chunks, a.trials, a.warmup, a.parallel, a.device, a.seed);
    if (a.format == "json")
        std::cout << report.to_json().dump(2) << "\n";
    else if (a.format == "csv")
        std::cout << report.to_csv();
    else
        std::cout << report.to_table();
    return 0;
}

int cmd_init_weights(const std::string& variant, uint64_t seed, const std::string& out_path) {
    sasa::ModelConfig cfg;
    if (variant == "base")
        cfg = sasa::ModelConfig::base();
    else if (variant == "lite")
        cfg = sasa::ModelConfig::lite();
    else
        throw sasa::Error("unknown variant \"" + variant + "\" (expected base or lite)");
    sasa::ModelWeights m = sasa::ModelWeights::seeded(cfg, seed);
    sasa::write_model(out_path, m);
    const int64_t total = m.param_count();
    const int64_t gen = m.param_count_prefix("gen.");
    std::printf("variant: %s\n", cfg.variant.c_str());
    std::printf("parameters: %" PRId64 " total\n", total);
    std::printf("  encoder:   %" PRId64 "\n", m.param_count_prefix("enc."));
    std::printf("  adapter:   %" PRId64 "\n", m.param_count_prefix("adapt."));
    std::printf("  decoder:   %" PRId64 "\n", m.param_count_prefix("dec."));
    std::printf("  generator: %" PRId64 "\n", gen);
    std::printf("  synthesizer (total - generator): %" PRId64 "\n", total - gen);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}

int cmd_init_embedding(int dim, uint64_t seed, const std::string& out_path) {
    sasa::GaussianRng rng(seed);
    sasa::SpeakerEmbedding emb;
    emb.values.resize(dim);
    for (float& v : emb.values) v = rng.next(0.0f, 1.0f);
    sasa::write_embedding(out_path, emb);
    std::printf("wrote %s (dim %d)\n", out_path.c_str(), dim);
    return 0;
}

int cmd_info(const std::string& path, bool as_json) {
    const auto bytes = sasa::read_file_bytes(path);
    sasa::Container c = sasa::parse_container(bytes.data(), bytes.size());
    int64_t total = 0;
    for (const auto& e : c.entries) total += e.count();
    if (as_json) {
        nlohmann::json j;
        j["config"] = c.config;
        j["tensor_count"] = c.entries.size();
        j["param_count"] = total;
        j["payload_bytes"] = c.payload.size() * sizeof(float);
        j["tensors"] = nlohmann::json::array();
        for (const auto& e : c.entries)
            j["tensors"].push_back({{"name", e.name}, {"shape", e.shape}, {"offset", e.offset}});
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    std::printf("config: %s\n", c.config.dump().c_str());
    std::printf("tensors: %zu, parameters: %" PRId64 ", payload: %zu bytes, checksum ok\n",
                c.entries.size(), total, c.payload.size() * sizeof(float));
    for (const auto& e : c.entries) {
        std::string shape;
        for (size_t i = 0; i < e.shape.size(); ++i)
            shape += (i ? "x" : "") + std::to_string(e.shape[i]);
        std::printf("  %-24s %-12s @ %" PRIu64 "\n", e.name.c_str(), shape.c_str(), e.offset);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sasa: streaming speaker anonymization engine"};
    app.require_subcommand(1);

    AnonymizeArgs an;
    auto* anonymize = app.add_subcommand("anonymize", "Anonymize a 16 kHz mono PCM16 WAV file");
    anonymize->add_option("input", an.input, "input WAV")->required();
    anonymize->add_option("output", an.output, "output WAV")->required();
    anonymize->add_option("--model", an.model, "weight container")->required();
    anonymize->add_option("--source-emb", an.source_emb, "source speaker embedding sidecar")
        ->required();
    anonymize->add_option("--seed", an.seed, "pseudo-speaker RNG seed");
    anonymize->add_option("--chunk-ms", an.chunk_ms, "streaming chunk size in ms")
        ->check(CLI::PositiveNumber);
    anonymize->add_option("--pitch-shift", an.pitch_shift, "pitch shift in semitones");
    anonymize->add_option("--pitch-scale", an.pitch_scale, "pitch excursion scale (> 0)");
    anonymize->add_option("--energy-scale", an.energy_scale, "energy scale (> 0)");
    anonymize->add_option("--min-distance", an.min_distance,
                          "minimum cosine distance of the pseudo speaker");
    anonymize->add_option("--max-attempts", an.max_attempts, "rejection sampling budget");
    anonymize->add_option("--blocklist", an.blocklist,
                          "embedding list the pseudo speaker must also avoid");
    anonymize->add_flag("--copy-variance", an.copy_variance,
                        "use pitch/energy extracted from the input instead of the predictors");
    anonymize->add_flag("--offline", an.offline,
                        "single-pass reference mode (bit-identical to streaming)");

    BenchArgs be;
    auto* bench = app.add_subcommand("bench", "Measure per-chunk latency and RTF");
    bench->add_option("--model", be.model, "weight container")->required();
    bench->add_option("--chunk-ms", be.chunk_ms, "chunk sizes in ms (default 20..140 grid)");
    bench->add_option("--trials", be.trials, "timed pushes per chunk size")
        ->check(CLI::PositiveNumber);
    bench->add_option("--warmup", be.warmup, "untimed pushes per chunk size");
    bench->add_option("--parallel", be.parallel, "number of concurrent sessions")
        ->check(CLI::PositiveNumber);
    bench->add_option("--seed", be.seed, "synthetic input seed");
    bench->add_option("--format", be.format, "table|csv|json")
        ->check(CLI::IsMember({"table", "csv", "json"}));
    bench->add_option("--device-label", be.device, "device label recorded in the report");

    std::string iw_variant = "base", iw_out;
    uint64_t iw_seed = 0;
    auto* init = app.add_subcommand("init-weights", "Write a seeded random weight container");
    init->add_option("--variant", iw_variant, "base|lite")
        ->check(CLI::IsMember({"base", "lite"}));
    init->add_option("--seed", iw_seed, "weight RNG seed");
    init->add_option("--out", iw_out, "output path")->required();

    int ie_dim = 704;
    uint64_t ie_seed = 0;
    std::string ie_out;
    auto* init_emb = app.add_subcommand("init-embedding",
                                        "Write a seeded random speaker-embedding sidecar");
    init_emb->add_option("--dim", ie_dim, "embedding dimension")->check(CLI::PositiveNumber);
    init_emb->add_option("--seed", ie_seed, "RNG seed");
    init_emb->add_option("--out", ie_out, "output path")->required();

    std::string info_path;
    bool info_json = false;
    auto* info = app.add_subcommand("info", "Inspect a weight container");
    info->add_option("path", info_path, "container path")->required();
    info->add_flag("--json", info_json, "machine-readable output");

    auto* metrics = app.add_subcommand("metrics", "Evaluation metric utilities");
    metrics->require_subcommand(1);

    std::string eer_gen, eer_imp;
    auto* eer = metrics->add_subcommand("eer", "Equal error rate from score files");
    eer->add_option("--genuine", eer_gen, "genuine scores, one per line")->required();
    eer->add_option("--impostor", eer_imp, "impostor scores, one per line")->required();

    std::string cos_a, cos_b;
    auto* cosine = metrics->add_subcommand("cosine", "Cosine similarity of two embeddings");
    cosine->add_option("--a", cos_a, "embedding sidecar")->required();
    cosine->add_option("--b", cos_b, "embedding sidecar")->required();

    std::string stft_ref, stft_test;
    auto* stft = metrics->add_subcommand("stft", "Multi-resolution STFT loss of two WAVs");
    stft->add_option("--ref", stft_ref, "reference WAV")->required();
    stft->add_option("--test", stft_test, "test WAV")->required();

    std::string mel_ref, mel_test;
    auto* mel = metrics->add_subcommand("mel", "Log-mel L1 of two WAVs");
    mel->add_option("--ref", mel_ref, "reference WAV")->required();
    mel->add_option("--test", mel_test, "test WAV")->required();

    std::string ce_logits, ce_labels;
    int ce_units = 200;
    auto* ce = metrics->add_subcommand("ce", "Cross-entropy of unit logits against labels");
    ce->add_option("--logits", ce_logits, "one frame of logits per line")->required();
    ce->add_option("--labels", ce_labels, "one unit id per line")->required();
    ce->add_option("--units", ce_units, "number of units per frame");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*anonymize) return cmd_anonymize(an);
        if (*bench) return cmd_bench(be);
        if (*init) return cmd_init_weights(iw_variant, iw_seed, iw_out);
        if (*init_emb) return cmd_init_embedding(ie_dim, ie_seed, ie_out);
        if (*info) return cmd_info(info_path, info_json);
        if (*eer) {
            sasa::ScoreSet s{load_scores(eer_gen), load_scores(eer_imp)};
            if (s.genuine.empty() || s.impostor.empty())
                throw sasa::FormatError("eer: score files must be non-empty");
            sasa::EerResult r = sasa::compute_eer(s);
            std::printf("eer: %.9f\nthreshold: %.9f\n", r.eer, r.threshold);
            return 0;
        }
        if (*cosine) {
            sasa::SpeakerEmbedding a = sasa::read_embedding(cos_a);
            sasa::SpeakerEmbedding b = sasa::read_embedding(cos_b);
            std::printf("cosine_similarity: %.9f\ncosine_distance: %.9f\n",
                        sasa::cosine_similarity_score(a, b), sasa::cosine_distance(a, b));
            return 0;
        }
        if (*stft) {
            const auto x = sasa::read_wav_pcm16(stft_ref);
            const auto y = sasa::read_wav_pcm16(stft_test);
            std::printf("multires_stft_loss: %.9f\n", sasa::multires_stft_loss(x, y));
            return 0;
        }
        if (*mel) {
            const auto x = sasa::read_wav_pcm16(mel_ref);
            const auto y = sasa::read_wav_pcm16(mel_test);
            std::printf("mel_l1: %.9f\n", sasa::mel_l1(x, y));
            return 0;
        }
        if (*ce) {
            sasa::FrameTensor logits = load_logits(ce_logits, ce_units);
            std::vector<int> labels = load_labels(ce_labels);
            std::printf("cross_entropy: %.9f\n",
                        sasa::cross_entropy_units(logits, labels));
            return 0;
        }
    } catch (const sasa::FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return kExitFormat;
    } catch (const sasa::ContainerError& e) {
        std::fprintf(stderr, "container error: %s\n", e.what());
        return kExitContainer;
    } catch (const sasa::ConstraintError& e) {
        std::fprintf(stderr, "constraint failure: %s\n", e.what());
        return kExitConstraint;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
