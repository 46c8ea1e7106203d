#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sasa/runtime.hpp"

using namespace sasa;

namespace {

const Engine& lite_engine() {
    static Engine e(ModelWeights::seeded(ModelConfig::lite(), 606));
    return e;
}

SpeakerEmbedding random_embedding(uint32_t seed, int dim = 704) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1, 1);
    SpeakerEmbedding e;
    e.values.resize(dim);
    for (float& v : e.values) v = dist(rng);
    e.tag = SpeakerEmbedding::Tag::pseudo;
    return e;
}

std::vector<float> random_samples(size_t n, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-0.6f, 0.6f);
    std::vector<float> s(n);
    for (float& v : s) v = dist(rng);
    return s;
}

}  // namespace

TEST_CASE("buffering law: 100 then 220 samples release one hop") {
    StreamSession s = lite_engine().open_stream(random_embedding(1));
    auto r1 = s.push(random_samples(100, 2));
    CHECK(r1.samples.empty());
    CHECK(s.samples_in() == 100);
    CHECK(s.samples_out() == 0);
    auto r2 = s.push(random_samples(220, 3));
    CHECK(r2.samples.size() == 320);
    CHECK(s.samples_out() == 320);
    CHECK(r2.processing_seconds >= 0.0);
}

TEST_CASE("push of one hop emits one hop") {
    StreamSession s = lite_engine().open_stream(random_embedding(4));
    auto r = s.push(random_samples(320, 5));
    CHECK(r.samples.size() == 320);
}

TEST_CASE("samples_out tracks 320 * floor(samples_in / 320) at all times") {
    StreamSession s = lite_engine().open_stream(random_embedding(6));
    std::mt19937 rng(7);
    int64_t pushed = 0;
    for (int it = 0; it < 25; ++it) {
        const size_t n = rng() % 700;
        s.push(random_samples(n, 100 + it));
        pushed += static_cast<int64_t>(n);
        REQUIRE(s.samples_in() == pushed);
        REQUIRE(s.samples_out() == (pushed / 320) * 320);
    }
}

TEST_CASE("sessions from the same engine are independent") {
    const SpeakerEmbedding emb = random_embedding(8);
    const auto input = random_samples(1600, 9);

    StreamSession alone = lite_engine().open_stream(emb);
    std::vector<float> want;
    for (size_t pos = 0; pos < input.size(); pos += 320) {
        auto r = alone.push({input.data() + pos, 320});
        want.insert(want.end(), r.samples.begin(), r.samples.end());
    }

    StreamSession a = lite_engine().open_stream(emb);
    StreamSession b = lite_engine().open_stream(random_embedding(10));
    std::vector<float> got;
    for (size_t pos = 0; pos < input.size(); pos += 320) {
        auto ra = a.push({input.data() + pos, 320});
        b.push(random_samples(320, static_cast<uint32_t>(pos)));  // interleaved noise
        got.insert(got.end(), ra.samples.begin(), ra.samples.end());
    }
    CHECK(bit_equal(got, want));
}

TEST_CASE("open with wrong embedding dim fails, empty flush is empty") {
    CHECK_THROWS_AS(lite_engine().open_stream(random_embedding(1, 32)), Error);
    StreamSession s = lite_engine().open_stream(random_embedding(11));
    CHECK(s.flush().empty());
    CHECK(s.closed());
}

TEST_CASE("flush pads a 100-sample residual to a full hop and closes the session") {
    StreamSession s = lite_engine().open_stream(random_embedding(12));
    s.push(random_samples(100, 13));
    auto tail = s.flush();
    CHECK(tail.size() == 320);
    CHECK_THROWS_WITH_AS(s.flush(), doctest::Contains("already flushed"), Error);
    CHECK_THROWS_AS(s.push(random_samples(10, 1)), Error);
}

TEST_CASE("flushed output matches the offline run on zero-padded input") {
    const SpeakerEmbedding emb = random_embedding(14);
    const auto input = random_samples(1000, 15);  // not hop aligned

    StreamSession s = lite_engine().open_stream(emb);
    std::vector<float> streamed;
    auto r = s.push(input);
    streamed.insert(streamed.end(), r.samples.begin(), r.samples.end());
    auto tail = s.flush();
    streamed.insert(streamed.end(), tail.begin(), tail.end());

    auto offline = lite_engine().offline_run(emb, SessionOptions{}, input);
    CHECK(offline.size() == 1280);  // ceil(1000/320)*320
    CHECK(bit_equal(streamed, offline));
}

TEST_CASE("pushes [640, 1920, 320] equal one-shot 2880") {
    const SpeakerEmbedding emb = random_embedding(16);
    const auto input = random_samples(2880, 17);

    auto offline = lite_engine().offline_run(emb, SessionOptions{}, input);

    StreamSession s = lite_engine().open_stream(emb);
    std::vector<float> streamed;
    size_t pos = 0;
    for (size_t n : {640u, 1920u, 320u}) {
        auto r = s.push({input.data() + pos, n});
        streamed.insert(streamed.end(), r.samples.begin(), r.samples.end());
        pos += n;
    }
    CHECK(bit_equal(streamed, offline));
}

TEST_CASE("random partitions equal offline for both prediction and copy-variance modes") {
    std::mt19937 rng(18);
    for (bool copy_variance : {false, true}) {
        SessionOptions opts;
        opts.copy_variance = copy_variance;
        const SpeakerEmbedding emb = random_embedding(19);
        const auto input = random_samples(4800 + (rng() % 2000), 20);
        const auto offline = lite_engine().offline_run(emb, opts, input);

        for (int part = 0; part < 5; ++part) {
            StreamSession s = lite_engine().open_stream(emb, opts);
            std::vector<float> streamed;
            size_t pos = 0;
            while (pos < input.size()) {
                size_t n = 1 + rng() % 900;
                n = std::min(n, input.size() - pos);
                auto r = s.push({input.data() + pos, n});
                streamed.insert(streamed.end(), r.samples.begin(), r.samples.end());
                pos += n;
            }
            auto tail = s.flush();
            streamed.insert(streamed.end(), tail.begin(), tail.end());
            REQUIRE(bit_equal(streamed, offline));
        }
    }
}

TEST_CASE("variance controls shape the stream deterministically and stay split-invariant") {
    SessionOptions opts;
    opts.controls.pitch_shift_semitones = 5.0f;
    opts.controls.pitch_scale = 1.4f;
    opts.controls.energy_scale = 0.7f;
    const SpeakerEmbedding emb = random_embedding(21);
    const auto input = random_samples(3200, 22);
    const auto offline = lite_engine().offline_run(emb, opts, input);

    StreamSession s = lite_engine().open_stream(emb, opts);
    std::vector<float> streamed;
    for (size_t pos = 0; pos < input.size(); pos += 800) {
        auto r = s.push({input.data() + pos, 800});
        streamed.insert(streamed.end(), r.samples.begin(), r.samples.end());
    }
    CHECK(bit_equal(streamed, offline));

    const auto again = lite_engine().offline_run(emb, opts, input);
    CHECK(bit_equal(again, offline));
}

TEST_CASE("latency law: first output appears after exactly 320 input samples") {
    for (size_t first_push : {1u, 100u, 319u}) {
        StreamSession s = lite_engine().open_stream(random_embedding(23));
        auto r = s.push(random_samples(first_push, 24));
        CHECK(r.samples.empty());
        auto r2 = s.push(random_samples(320 - first_push, 25));
        CHECK(r2.samples.size() == 320);
    }
}

TEST_CASE("state size is constant in stream length") {
    StreamSession s = lite_engine().open_stream(random_embedding(26));
    s.push(random_samples(320, 27));
    const size_t after_first = s.state_bytes();
    for (int it = 0; it < 20; ++it) s.push(random_samples(960, 28 + it));
    CHECK(s.state_bytes() == after_first);
}

TEST_CASE("non-finite samples are rejected") {
    StreamSession s = lite_engine().open_stream(random_embedding(29));
    std::vector<float> bad(320, 0.0f);
    bad[7] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(s.push(bad), Error);
}

TEST_CASE("end-to-end length preservation for hop multiples") {
    const SpeakerEmbedding emb = random_embedding(30);
    for (size_t n : {320u, 1920u, 16000u}) {
        auto out = lite_engine().offline_run(emb, SessionOptions{}, random_samples(n, 31));
        REQUIRE(out.size() == n);
    }
}
