#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "sasa/kernels.hpp"

using namespace sasa;

namespace {

FrameTensor random_tensor(int ch, int64_t frames, std::mt19937& rng, float amp = 1.0f) {
    std::uniform_real_distribution<float> dist(-amp, amp);
    FrameTensor x(ch, frames);
    for (float& v : x.data) v = dist(rng);
    return x;
}

std::vector<float> random_weights(const ConvSpec& spec, std::mt19937& rng) {
    std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
    std::vector<float> w(spec.weight_count());
    for (float& v : w) v = dist(rng);
    return w;
}

// Run the conv over a random partition of x and concatenate.
FrameTensor run_chunked(const FrameTensor& x, const float* w, const float* b,
                        const ConvSpec& spec, const std::vector<int64_t>& split_frames) {
    ConvState st = ConvState::zeros(spec);
    FrameTensor out(spec.out_channels, x.frames / spec.stride);
    int64_t in_pos = 0, out_pos = 0;
    for (int64_t n : split_frames) {
        FrameTensor chunk(x.channels, n);
        for (int c = 0; c < x.channels; ++c)
            std::memcpy(chunk.row(c), x.row(c) + in_pos, n * sizeof(float));
        FrameTensor y = causal_conv1d(chunk, w, b, spec, st, "chunked");
        for (int c = 0; c < y.channels; ++c)
            std::memcpy(out.row(c) + out_pos, y.row(c), y.frames * sizeof(float));
        in_pos += n;
        out_pos += y.frames;
    }
    REQUIRE(in_pos == x.frames);
    return out;
}

}  // namespace

TEST_CASE("identity tap kernel passes input through and keeps trailing history") {
    ConvSpec spec{1, 1, 3, 1, 1, false};
    const float w[3] = {0.0f, 0.0f, 1.0f};
    ConvState st = ConvState::zeros(spec);
    FrameTensor x(1, 5);
    for (int i = 0; i < 5; ++i) x.at(0, i) = static_cast<float>(i + 1);
    FrameTensor y = causal_conv1d(x, w, nullptr, spec, st, "id");
    for (int i = 0; i < 5; ++i) CHECK(y.at(0, i) == static_cast<float>(i + 1));
    CHECK(st.history.at(0, 0) == 4.0f);
    CHECK(st.history.at(0, 1) == 5.0f);
}

TEST_CASE("impulse response is the kernel reversed in tap order") {
    ConvSpec spec{1, 1, 4, 1, 1, false};
    const float w[4] = {0.1f, 0.2f, 0.3f, 0.4f};
    ConvState st = ConvState::zeros(spec);
    FrameTensor x(1, 6);
    x.at(0, 0) = 1.0f;
    FrameTensor y = causal_conv1d(x, w, nullptr, spec, st, "imp");
    // out[n] = w[k-1-n] for n < k
    CHECK(y.at(0, 0) == 0.4f);
    CHECK(y.at(0, 1) == 0.3f);
    CHECK(y.at(0, 2) == 0.2f);
    CHECK(y.at(0, 3) == 0.1f);
    CHECK(y.at(0, 4) == 0.0f);
    CHECK(y.at(0, 5) == 0.0f);
}

TEST_CASE("dilated conv matches the direct zero-padded oracle exactly") {
    std::mt19937 rng(7);
    ConvSpec spec{1, 1, 7, 1, 3, true};
    FrameTensor x = random_tensor(1, 64, rng);
    auto w = random_weights(spec, rng);
    std::vector<float> b = {0.25f};
    ConvState st = ConvState::zeros(spec);
    FrameTensor got = causal_conv1d(x, w.data(), b.data(), spec, st, "k7d3");
    FrameTensor want = oracle::direct_causal_conv(x, w.data(), b.data(), spec);
    REQUIRE(got.same_shape(want));
    for (size_t i = 0; i < got.data.size(); ++i) CHECK(got.data[i] == want.data[i]);
}

TEST_CASE("randomized conv shapes match the oracle bit-exactly") {
    std::mt19937 rng(1234);
    std::uniform_int_distribution<int> ch_d(1, 8), k_d(1, 11), pick(0, 2);
    for (int it = 0; it < 120; ++it) {
        ConvSpec spec;
        spec.in_channels = ch_d(rng);
        spec.out_channels = ch_d(rng);
        spec.kernel_size = k_d(rng);
        if (pick(rng) == 0) {
            spec.stride = 1 + pick(rng);
            spec.dilation = 1;
        } else {
            spec.stride = 1;
            spec.dilation = 1 + 2 * pick(rng);
        }
        spec.has_bias = (pick(rng) != 0);
        const int64_t frames = spec.stride * (1 + (rng() % 40));
        FrameTensor x = random_tensor(spec.in_channels, frames, rng);
        auto w = random_weights(spec, rng);
        std::vector<float> b(spec.out_channels, 0.0f);
        for (float& v : b) v = std::uniform_real_distribution<float>(-1, 1)(rng);
        ConvState st = ConvState::zeros(spec);
        FrameTensor got = causal_conv1d(x, w.data(), b.data(), spec, st, "rand");
        FrameTensor want = oracle::direct_causal_conv(x, w.data(), b.data(), spec);
        REQUIRE(got.same_shape(want));
        for (size_t i = 0; i < got.data.size(); ++i) REQUIRE(got.data[i] == want.data[i]);
    }
}

TEST_CASE("split invariance: any chunking concatenates to the one-shot result") {
    std::mt19937 rng(99);
    for (int it = 0; it < 40; ++it) {
        ConvSpec spec;
        spec.in_channels = 1 + static_cast<int>(rng() % 4);
        spec.out_channels = 1 + static_cast<int>(rng() % 4);
        spec.kernel_size = 1 + static_cast<int>(rng() % 10);
        spec.dilation = 1 + static_cast<int>(rng() % 4);
        spec.stride = 1;
        FrameTensor x = random_tensor(spec.in_channels, 60 + rng() % 60, rng);
        auto w = random_weights(spec, rng);
        std::vector<float> b(spec.out_channels, 0.1f);

        ConvState st = ConvState::zeros(spec);
        FrameTensor whole = causal_conv1d(x, w.data(), b.data(), spec, st, "whole");

        std::vector<int64_t> splits;
        int64_t left = x.frames;
        while (left > 0) {
            int64_t n = 1 + static_cast<int64_t>(rng() % 17);
            n = std::min(n, left);
            splits.push_back(n);
            left -= n;
        }
        FrameTensor chunked = run_chunked(x, w.data(), b.data(), spec, splits);
        CHECK(bit_equal(whole, chunked));
    }
}

TEST_CASE("frame-vectorized and channel-vectorized paths agree bit-exactly") {
    std::mt19937 rng(4242);
    ConvSpec spec{48, 64, 5, 1, 2, true};
    FrameTensor x = random_tensor(48, 12, rng);
    auto w = random_weights(spec, rng);
    std::vector<float> b(64, 0.05f);
    std::vector<float> wt(w.size());
    for (int oc = 0; oc < 64; ++oc)
        for (int ic = 0; ic < 48; ++ic)
            for (int j = 0; j < 5; ++j)
                wt[(static_cast<size_t>(ic) * 5 + j) * 64 + oc] =
                    w[(static_cast<size_t>(oc) * 48 + ic) * 5 + j];
    ConvState st1 = ConvState::zeros(spec);
    ConvState st2 = ConvState::zeros(spec);
    FrameTensor a = causal_conv1d(x, w.data(), b.data(), spec, st1, "frame-path", nullptr);
    FrameTensor c = causal_conv1d(x, w.data(), b.data(), spec, st2, "chan-path", wt.data());
    CHECK(bit_equal(a, c));
}

TEST_CASE("upsample conv with repeat kernel duplicates frames") {
    ConvSpec spec{1, 1, 2, 1, 1, false};
    const float w[2] = {1.0f, 1.0f};
    ConvState st = ConvState::zeros(spec);
    FrameTensor x(1, 3);
    x.at(0, 0) = 5.0f;
    x.at(0, 1) = -2.0f;
    x.at(0, 2) = 7.0f;
    FrameTensor y = causal_upsample_conv1d(x, w, nullptr, spec, 2, st, "up2");
    REQUIRE(y.frames == 6);
    const float want[6] = {5, 5, -2, -2, 7, 7};
    for (int i = 0; i < 6; ++i) CHECK(y.at(0, i) == want[i]);
}

TEST_CASE("upsample impulse stays causal: u=4, k=8 touches only frames 0..7") {
    ConvSpec spec{1, 1, 8, 1, 1, false};
    std::vector<float> w(8, 1.0f);
    ConvState st = ConvState::zeros(spec);
    FrameTensor x(1, 4);
    x.at(0, 0) = 1.0f;
    FrameTensor y = causal_upsample_conv1d(x, w.data(), nullptr, spec, 4, st, "up4");
    REQUIRE(y.frames == 16);
    for (int i = 0; i < 16; ++i) {
        if (i <= 7)
            CHECK(y.at(0, i) != 0.0f);
        else
            CHECK(y.at(0, i) == 0.0f);
    }
}

TEST_CASE("upsample conv: chunked three ways equals whole-signal oracle") {
    std::mt19937 rng(3);
    ConvSpec spec{3, 2, 6, 1, 1, true};
    FrameTensor x = random_tensor(3, 24, rng);
    auto w = random_weights(spec, rng);
    std::vector<float> b = {0.3f, -0.2f};
    FrameTensor want = oracle::direct_upsample_conv(x, w.data(), b.data(), spec, 3);

    for (auto splits : std::vector<std::vector<int64_t>>{{24}, {8, 8, 8}, {1, 11, 12}}) {
        ConvState st = ConvState::zeros(spec);
        FrameTensor out(2, 24 * 3);
        int64_t in_pos = 0, out_pos = 0;
        for (int64_t n : splits) {
            FrameTensor chunk(3, n);
            for (int c = 0; c < 3; ++c)
                std::memcpy(chunk.row(c), x.row(c) + in_pos, n * sizeof(float));
            FrameTensor y = causal_upsample_conv1d(chunk, w.data(), b.data(), spec, 3, st, "up");
            for (int c = 0; c < 2; ++c)
                std::memcpy(out.row(c) + out_pos, y.row(c), y.frames * sizeof(float));
            in_pos += n;
            out_pos += y.frames;
        }
        CHECK(bit_equal(out, want));
    }
}

TEST_CASE("activations: leaky relu, tanh, softmax basics") {
    FrameTensor x(1, 3);
    x.at(0, 0) = -1.0f;
    x.at(0, 1) = 0.0f;
    x.at(0, 2) = 2.0f;
    FrameTensor y = leaky_relu(x, 0.1f);
    CHECK(y.at(0, 0) == doctest::Approx(-0.1f));
    CHECK(y.at(0, 1) == 0.0f);
    CHECK(y.at(0, 2) == 2.0f);

    FrameTensor t(1, 1);
    CHECK(tanh_map(t).at(0, 0) == 0.0f);

    FrameTensor logits(5, 2);
    for (float& v : logits.data) v = 1.7f;
    FrameTensor sm = softmax_channels(logits);
    for (int64_t f = 0; f < 2; ++f) {
        float sum = 0.0f;
        for (int c = 0; c < 5; ++c) {
            CHECK(sm.at(c, f) == doctest::Approx(0.2f));
            sum += sm.at(c, f);
        }
        CHECK(sum == doctest::Approx(1.0f).epsilon(1e-5));
    }
}

TEST_CASE("softmax columns sum to one on random logits") {
    std::mt19937 rng(5);
    FrameTensor x = random_tensor(17, 40, rng, 6.0f);
    FrameTensor sm = softmax_channels(x);
    for (int64_t t = 0; t < x.frames; ++t) {
        float sum = 0.0f;
        for (int c = 0; c < 17; ++c) sum += sm.at(c, t);
        CHECK(std::abs(sum - 1.0f) < 1e-5f);
    }
}

TEST_CASE("causal instance norm zeroes constant input") {
    CumulativeNormState st = CumulativeNormState::zeros(3);
    FrameTensor x(3, 10);
    for (float& v : x.data) v = 4.2f;
    FrameTensor y = causal_instance_norm(x, st);
    for (float v : y.data) CHECK(v == 0.0f);
}

TEST_CASE("causal instance norm of [0, 2] matches hand computation") {
    CumulativeNormState st = CumulativeNormState::zeros(1);
    FrameTensor x(1, 2);
    x.at(0, 0) = 0.0f;
    x.at(0, 1) = 2.0f;
    FrameTensor y = causal_instance_norm(x, st, 1e-5f);
    CHECK(y.at(0, 0) == 0.0f);
    // frame 1: mean 1, var 1 -> 1/sqrt(1 + eps)
    CHECK(y.at(0, 1) == doctest::Approx(1.0 / std::sqrt(1.0 + 1e-5)).epsilon(1e-6));
}

TEST_CASE("causal instance norm is split invariant") {
    std::mt19937 rng(11);
    FrameTensor x = random_tensor(4, 100, rng);
    CumulativeNormState whole = CumulativeNormState::zeros(4);
    FrameTensor want = causal_instance_norm(x, whole);

    CumulativeNormState st = CumulativeNormState::zeros(4);
    FrameTensor part1(4, 30), part2(4, 70);
    for (int c = 0; c < 4; ++c) {
        std::memcpy(part1.row(c), x.row(c), 30 * sizeof(float));
        std::memcpy(part2.row(c), x.row(c) + 30, 70 * sizeof(float));
    }
    FrameTensor y1 = causal_instance_norm(part1, st);
    FrameTensor y2 = causal_instance_norm(part2, st);
    FrameTensor got(4, 100);
    for (int c = 0; c < 4; ++c) {
        std::memcpy(got.row(c), y1.row(c), 30 * sizeof(float));
        std::memcpy(got.row(c) + 30, y2.row(c), 70 * sizeof(float));
    }
    CHECK(bit_equal(got, want));
}

TEST_CASE("layer norm: constant frame maps to bias, single channel maps to bias") {
    std::vector<float> gain = {2.0f, 2.0f, 2.0f};
    std::vector<float> bias = {0.5f, -1.0f, 3.0f};
    FrameTensor x(3, 2);
    for (float& v : x.data) v = 7.0f;
    FrameTensor y = layer_norm_frame(x, gain.data(), bias.data());
    for (int64_t t = 0; t < 2; ++t)
        for (int c = 0; c < 3; ++c) CHECK(y.at(c, t) == bias[c]);

    std::vector<float> g1 = {5.0f}, b1 = {-2.5f};
    FrameTensor one(1, 4);
    for (float& v : one.data) v = 9.0f;
    FrameTensor y1 = layer_norm_frame(one, g1.data(), b1.data());
    for (float v : y1.data) CHECK(v == -2.5f);
}

TEST_CASE("layer norm matches the direct formula on random frames") {
    std::mt19937 rng(21);
    FrameTensor x = random_tensor(9, 20, rng);
    std::vector<float> gain(9), bias(9);
    std::uniform_real_distribution<float> dist(-1, 1);
    for (int c = 0; c < 9; ++c) {
        gain[c] = dist(rng);
        bias[c] = dist(rng);
    }
    FrameTensor y = layer_norm_frame(x, gain.data(), bias.data(), 1e-5f);
    for (int64_t t = 0; t < x.frames; ++t) {
        float mean = 0;
        for (int c = 0; c < 9; ++c) mean += x.at(c, t);
        mean /= 9.0f;
        float var = 0;
        for (int c = 0; c < 9; ++c) var += (x.at(c, t) - mean) * (x.at(c, t) - mean);
        var /= 9.0f;
        for (int c = 0; c < 9; ++c) {
            const float want = (x.at(c, t) - mean) / std::sqrt(var + 1e-5f) * gain[c] + bias[c];
            CHECK(y.at(c, t) == doctest::Approx(want).epsilon(1e-6));
        }
    }
}

TEST_CASE("finite in, finite out across kernels") {
    std::mt19937 rng(31);
    ConvSpec spec{2, 3, 9, 1, 5, true};
    FrameTensor x = random_tensor(2, 50, rng, 10.0f);
    auto w = random_weights(spec, rng);
    std::vector<float> b(3, 0.0f);
    ConvState st = ConvState::zeros(spec);
    FrameTensor y = causal_conv1d(x, w.data(), b.data(), spec, st, "fin");
    CHECK(all_finite(y.data.data(), y.data.size()));
    CumulativeNormState ns = CumulativeNormState::zeros(3);
    FrameTensor z = causal_instance_norm(y, ns);
    CHECK(all_finite(z.data.data(), z.data.size()));
}

TEST_CASE("errors: dimension mismatch names the layer, non-finite input rejected") {
    ConvSpec spec{2, 2, 3, 1, 1, true};
    std::vector<float> w(spec.weight_count(), 0.1f), b(2, 0.0f);
    ConvState st = ConvState::zeros(spec);
    FrameTensor bad(3, 4);
    CHECK_THROWS_WITH_AS(causal_conv1d(bad, w.data(), b.data(), spec, st, "enc.down.2"),
                         doctest::Contains("enc.down.2"), Error);

    FrameTensor nan_in(2, 4);
    nan_in.at(0, 1) = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(causal_conv1d(nan_in, w.data(), b.data(), spec, st, "nan"), Error);

    ConvSpec strided{1, 1, 3, 2, 1, true};
    ConvState st2 = ConvState::zeros(strided);
    FrameTensor odd(1, 5);
    CHECK_THROWS_AS(causal_conv1d(odd, w.data(), b.data(), strided, st2, "stride"), Error);

    ConvSpec illegal{1, 1, 3, 2, 2, true};
    CHECK_THROWS_AS(illegal.validate("illegal"), Error);
}
