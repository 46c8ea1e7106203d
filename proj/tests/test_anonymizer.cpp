#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "sasa/anonymizer.hpp"

using namespace sasa;

namespace {

const ModelWeights& lite_model() {
    static ModelWeights m = ModelWeights::seeded(ModelConfig::lite(), 99);
    return m;
}

SpeakerEmbedding make_emb(std::vector<float> v) {
    SpeakerEmbedding e;
    e.values = std::move(v);
    return e;
}

SpeakerEmbedding random_embedding(int dim, uint32_t seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> dist(-1, 1);
    SpeakerEmbedding e;
    e.values.resize(dim);
    for (float& v : e.values) v = dist(rng);
    return e;
}

}  // namespace

TEST_CASE("cosine distance basics: equal, opposite, orthogonal") {
    auto a = make_emb({1, 2, 3});
    CHECK(cosine_distance(a, a) == 0.0f);
    auto b = make_emb({-1, -2, -3});
    CHECK(cosine_distance(a, b) == 2.0f);
    auto x = make_emb({1, 0});
    auto y = make_emb({0, 1});
    CHECK(cosine_distance(x, y) == 1.0f);
}

TEST_CASE("cosine distance symmetry and scale invariance") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<float> dist(-2, 2);
    for (int it = 0; it < 50; ++it) {
        SpeakerEmbedding a = random_embedding(32, 100 + it);
        SpeakerEmbedding b = random_embedding(32, 200 + it);
        const float d = cosine_distance(a, b);
        CHECK(cosine_distance(b, a) == doctest::Approx(d).epsilon(1e-6));
        SpeakerEmbedding scaled = a;
        const float lambda = 0.25f + std::abs(dist(rng));
        for (float& v : scaled.values) v *= lambda;
        CHECK(cosine_distance(scaled, b) == doctest::Approx(d).epsilon(1e-5));
        CHECK(d >= 0.0f);
        CHECK(d <= 2.0f);
    }
}

TEST_CASE("zero-norm embeddings are rejected") {
    auto z = make_emb({0, 0, 0});
    auto a = make_emb({1, 1, 1});
    CHECK_THROWS_AS(cosine_distance(z, a), Error);
    CHECK_THROWS_AS(cosine_distance(a, z), Error);
    auto c = make_emb({1, 2});
    CHECK_THROWS_AS(cosine_distance(a, c), Error);
}

TEST_CASE("threshold 0 accepts the first sample") {
    PseudoGenerator gen(lite_model());
    AnonPolicy policy;
    policy.min_cosine_distance = 0.0f;
    policy.max_attempts = 1;
    policy.rng_seed = 5;
    SpeakerEmbedding src = random_embedding(704, 1);
    SpeakerEmbedding pseudo = gen.generate(src, policy);
    CHECK(pseudo.tag == SpeakerEmbedding::Tag::pseudo);
    CHECK(pseudo.dim() == 704);
}

TEST_CASE("unreachable threshold exhausts max_attempts and reports best distance") {
    PseudoGenerator gen(lite_model());
    AnonPolicy policy;
    policy.min_cosine_distance = 1.99f;
    policy.max_attempts = 25;
    policy.rng_seed = 8;
    SpeakerEmbedding src = random_embedding(704, 2);
    try {
        gen.generate(src, policy);
        FAIL("expected ConstraintError");
    } catch (const ConstraintError& e) {
        CHECK(e.best_value >= 0.0f);
        CHECK(e.best_value < 1.99f);
        CHECK(std::string(e.what()).find("attempts") != std::string::npos);
    }
}

TEST_CASE("returned pseudo-speakers always satisfy the distance constraint") {
    PseudoGenerator gen(lite_model());
    for (int it = 0; it < 300; ++it) {
        AnonPolicy policy;
        policy.min_cosine_distance = 0.3f;
        policy.rng_seed = 1000 + it;
        SpeakerEmbedding src = random_embedding(704, 5000 + it);
        SpeakerEmbedding pseudo = gen.generate(src, policy);
        REQUIRE(cosine_distance(src, pseudo) > 0.3f);
    }
}

TEST_CASE("generation is deterministic in (seed, weights, source)") {
    PseudoGenerator gen(lite_model());
    AnonPolicy policy;
    policy.rng_seed = 424242;
    SpeakerEmbedding src = random_embedding(704, 9);
    SpeakerEmbedding a = gen.generate(src, policy);
    SpeakerEmbedding b = gen.generate(src, policy);
    CHECK(bit_equal(a.values, b.values));
    policy.rng_seed = 424243;
    SpeakerEmbedding c = gen.generate(src, policy);
    CHECK_FALSE(bit_equal(a.values, c.values));
}

TEST_CASE("blocklist entries are kept at distance too") {
    PseudoGenerator gen(lite_model());
    AnonPolicy policy;
    policy.min_cosine_distance = 0.3f;
    policy.rng_seed = 17;
    SpeakerEmbedding src = random_embedding(704, 21);
    policy.blocklist.push_back(random_embedding(704, 22));
    policy.blocklist.push_back(random_embedding(704, 23));
    SpeakerEmbedding pseudo = gen.generate(src, policy);
    CHECK(cosine_distance(src, pseudo) > 0.3f);
    for (const auto& blocked : policy.blocklist)
        CHECK(cosine_distance(blocked, pseudo) > 0.3f);
}

TEST_CASE("policy validation") {
    AnonPolicy p;
    p.min_cosine_distance = 2.5f;
    CHECK_THROWS_AS(p.validate(), Error);
    p.min_cosine_distance = 0.3f;
    p.max_attempts = 0;
    CHECK_THROWS_AS(p.validate(), Error);
}
