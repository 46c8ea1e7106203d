#pragma once

#include <future>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sasa/runtime.hpp"

namespace sasa {

// One row of the latency table. latency_ms = chunk_ms + mean_proc_ms and
// rtf = mean_proc_ms / chunk_ms hold exactly by construction.
struct BenchRow {
    int chunk_ms = 0;
    double mean_proc_ms = 0.0;
    double latency_ms = 0.0;
    double rtf = 0.0;
};

struct BenchReport {
    std::string device = "cpu";
    std::string variant;
    int warmup = 0;
    int trials = 0;
    int parallel = 1;
    std::vector<BenchRow> rows;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["device"] = device;
        j["variant"] = variant;
        j["warmup"] = warmup;
        j["trials"] = trials;
        j["parallel"] = parallel;
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows) {
            nlohmann::json row;
            row["chunk_ms"] = r.chunk_ms;
            row["mean_proc_ms"] = r.mean_proc_ms;
            row["latency_ms"] = r.latency_ms;
            row["rtf"] = r.rtf;
            j["rows"].push_back(row);
        }
        return j;
    }

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(17);
        os << "variant,device,chunk_ms,mean_proc_ms,latency_ms,rtf,warmup,trials,parallel\n";
        for (const auto& r : rows)
            os << variant << ',' << device << ',' << r.chunk_ms << ',' << r.mean_proc_ms << ','
               << r.latency_ms << ',' << r.rtf << ',' << warmup << ',' << trials << ','
               << parallel << '\n';
        return os.str();
    }

    std::string to_table() const {
        std::ostringstream os;
        os << "variant: " << variant << "  device: " << device << "  warmup: " << warmup
           << "  trials: " << trials << "  parallel: " << parallel << "\n";
        os << "chunk(ms)   proc(ms)   latency(ms)      RTF\n";
        char line[128];
        for (const auto& r : rows) {
            std::snprintf(line, sizeof(line), "%9d %10.2f %13.2f %8.3f\n", r.chunk_ms,
                          r.mean_proc_ms, r.latency_ms, r.rtf);
            os << line;
        }
        return os.str();
    }
};

inline std::vector<int> default_bench_chunks() { return {20, 40, 60, 100, 120, 140}; }

namespace detail {

inline SpeakerEmbedding bench_embedding(const ModelConfig& cfg, uint64_t seed) {
    GaussianRng rng(seed);
    SpeakerEmbedding emb;
    emb.values.resize(cfg.embed_dim);
    for (float& v : emb.values) v = rng.next(0.0f, 1.0f);
    emb.tag = SpeakerEmbedding::Tag::pseudo;
    return emb;
}

// Mean per-push processing time (seconds) over `trials` timed pushes of
// `chunk_samples` synthetic audio, after `warmup` untimed pushes.
inline double timed_session(const Engine& engine, const SpeakerEmbedding& emb, int chunk_samples,
                            int warmup, int trials, uint64_t seed) {
    StreamSession session = engine.open_stream(emb);
    GaussianRng rng(seed);
    std::vector<float> chunk(chunk_samples);
    double total = 0.0;
    for (int i = 0; i < warmup + trials; ++i) {
        for (float& v : chunk) v = rng.next(0.0f, 0.1f);
        ChunkResult r = session.push(chunk);
        if (i >= warmup) total += r.processing_seconds;
    }
    return total / trials;
}

}  // namespace detail

// Warm up and time P independent sessions per chunk size; the report keeps
// chunk + mean-processing and processing/chunk as exact arithmetic on the
// measured mean.
inline BenchReport run_bench(const Engine& engine, const std::vector<int>& chunk_ms_list,
                             int trials, int warmup, int parallel = 1,
                             const std::string& device = "cpu", uint64_t seed = 1234) {
    if (trials < 1 || warmup < 0 || parallel < 1)
        throw Error("bench: trials must be >= 1, warmup >= 0, parallel >= 1");
    BenchReport report;
    report.device = device;
    report.variant = engine.config().variant;
    report.warmup = warmup;
    report.trials = trials;
    report.parallel = parallel;
    const SpeakerEmbedding emb = detail::bench_embedding(engine.config(), seed);
    for (int chunk_ms : chunk_ms_list) {
        if (chunk_ms < 1) throw Error("bench: chunk sizes must be positive");
        const int chunk_samples = chunk_ms * (kSampleRate / 1000);
        double mean_s = 0.0;
        if (parallel == 1) {
            mean_s = detail::timed_session(engine, emb, chunk_samples, warmup, trials, seed);
        } else {
            std::vector<std::future<double>> futs;
            for (int p = 0; p < parallel; ++p)
                futs.push_back(std::async(std::launch::async, [&, p] {
                    return detail::timed_session(engine, emb, chunk_samples, warmup, trials,
                                                 seed + p);
                }));
            for (auto& f : futs) mean_s += f.get();
            mean_s /= parallel;
        }
        BenchRow row;
        row.chunk_ms = chunk_ms;
        row.mean_proc_ms = mean_s * 1000.0;
        row.latency_ms = chunk_ms + row.mean_proc_ms;
        row.rtf = row.mean_proc_ms / chunk_ms;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace sasa
