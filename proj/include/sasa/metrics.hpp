#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "sasa/tensor.hpp"

namespace sasa {

// ----- unit cross-entropy and track MSE -----

// Mean over frames of -log softmax(logits)[label].
inline double cross_entropy_units(const FrameTensor& logits, std::span<const int> labels) {
    if (static_cast<int64_t>(labels.size()) != logits.frames)
        throw Error("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                    std::to_string(logits.frames) + " frames");
    if (logits.frames == 0) return 0.0;
    double total = 0.0;
    for (int64_t t = 0; t < logits.frames; ++t) {
        const int label = labels[t];
        if (label < 0 || label >= logits.channels)
            throw Error("cross_entropy: label " + std::to_string(label) + " out of range [0, " +
                        std::to_string(logits.channels) + ")");
        double m = logits.at(0, t);
        for (int c = 1; c < logits.channels; ++c) m = std::max(m, (double)logits.at(c, t));
        double sum = 0.0;
        for (int c = 0; c < logits.channels; ++c) sum += std::exp(logits.at(c, t) - m);
        total += (std::log(sum) + m) - logits.at(label, t);
    }
    return total / static_cast<double>(logits.frames);
}

inline double mse_track(std::span<const float> pred, std::span<const float> target) {
    if (pred.size() != target.size())
        throw Error("mse_track: length mismatch " + std::to_string(pred.size()) + " vs " +
                    std::to_string(target.size()));
    if (pred.empty()) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred[i]) - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

// ----- STFT -----

struct StftResolution {
    int fft_size = 1024;
    int hop = 120;
    int window_length = 600;

    void validate() const {
        if (fft_size < 2 || (fft_size & (fft_size - 1)) != 0)
            throw Error("stft: fft_size must be a power of two");
        if (window_length > fft_size) throw Error("stft: window_length > fft_size");
        if (hop < 1 || hop > window_length) throw Error("stft: hop must be in [1, window]");
    }
};

inline std::vector<StftResolution> default_stft_resolutions() {
    return {{512, 50, 240}, {1024, 120, 600}, {2048, 240, 1200}};
}

namespace detail {

// Iterative radix-2 Cooley-Tukey, in place.
inline void fft_radix2(std::vector<std::complex<float>>& a) {
    const size_t n = a.size();
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * 3.14159265358979323846 / static_cast<double>(len);
        const std::complex<float> wl(static_cast<float>(std::cos(ang)),
                                     static_cast<float>(std::sin(ang)));
        for (size_t i = 0; i < n; i += len) {
            std::complex<float> w(1.0f, 0.0f);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<float> u = a[i + k];
                const std::complex<float> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

inline std::vector<float> hann_window(int length) {
    std::vector<float> w(length);
    for (int i = 0; i < length; ++i)
        w[i] = static_cast<float>(
            0.5 - 0.5 * std::cos(2.0 * 3.14159265358979323846 * i / static_cast<double>(length)));
    return w;
}

}  // namespace detail

// Hann-windowed magnitude spectrogram, zero-padded so frame t is centered at
// sample t*hop; (fft/2 + 1) bins x (len/hop + 1) frames.
inline FrameTensor stft_magnitude(std::span<const float> wave, const StftResolution& res) {
    res.validate();
    if (static_cast<int>(wave.size()) < res.window_length)
        throw Error("stft: signal shorter than the analysis window");
    const auto window = detail::hann_window(res.window_length);
    const int64_t n_frames = static_cast<int64_t>(wave.size()) / res.hop + 1;
    const int bins = res.fft_size / 2 + 1;
    const int64_t len = static_cast<int64_t>(wave.size());
    FrameTensor out(bins, n_frames);
    std::vector<std::complex<float>> buf;
    for (int64_t f = 0; f < n_frames; ++f) {
        buf.assign(res.fft_size, {0.0f, 0.0f});
        const int64_t start = f * res.hop - res.window_length / 2;
        for (int i = 0; i < res.window_length; ++i) {
            const int64_t idx = start + i;
            const float s = (idx >= 0 && idx < len) ? wave[idx] : 0.0f;
            buf[i] = {s * window[i], 0.0f};
        }
        detail::fft_radix2(buf);
        for (int b = 0; b < bins; ++b) out.at(b, f) = std::abs(buf[b]);
    }
    return out;
}

// Mean over resolutions of spectral convergence + log-magnitude L1.
inline double multires_stft_loss(std::span<const float> x, std::span<const float> y,
                                 const std::vector<StftResolution>& resolutions =
                                     default_stft_resolutions()) {
    if (x.size() != y.size())
        throw Error("multires_stft_loss: length mismatch " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
    constexpr double kLogFloor = 1e-7;
    double total = 0.0;
    for (const auto& res : resolutions) {
        const FrameTensor X = stft_magnitude(x, res);
        const FrameTensor Y = stft_magnitude(y, res);
        double diff_sq = 0.0, ref_sq = 0.0, log_l1 = 0.0;
        for (size_t i = 0; i < X.data.size(); ++i) {
            const double d = static_cast<double>(X.data[i]) - Y.data[i];
            diff_sq += d * d;
            ref_sq += static_cast<double>(X.data[i]) * X.data[i];
            log_l1 += std::abs(std::log(std::max<double>(X.data[i], kLogFloor)) -
                               std::log(std::max<double>(Y.data[i], kLogFloor)));
        }
        const double sc = (ref_sq > 0.0) ? std::sqrt(diff_sq) / std::sqrt(ref_sq) : 0.0;
        total += sc + log_l1 / static_cast<double>(X.data.size());
    }
    return total / static_cast<double>(resolutions.size());
}

// ----- mel reconstruction loss -----

constexpr int kSampleRateForMel = 16000;

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

// Triangular filters (peak 1) over mel-spaced centers; n_mels x (n_fft/2+1).
inline FrameTensor mel_filterbank(int n_mels, int n_fft, int sample_rate, double fmin,
                                  double fmax) {
    const int bins = n_fft / 2 + 1;
    const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
    std::vector<double> centers(n_mels + 2);
    for (int i = 0; i < n_mels + 2; ++i)
        centers[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));
    FrameTensor fb(n_mels, bins);
    for (int m = 0; m < n_mels; ++m) {
        const double lo = centers[m], mid = centers[m + 1], hi = centers[m + 2];
        for (int b = 0; b < bins; ++b) {
            const double f = static_cast<double>(b) * sample_rate / n_fft;
            double v = 0.0;
            if (f > lo && f < mid)
                v = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                v = (hi - f) / (hi - mid);
            fb.at(m, b) = static_cast<float>(v);
        }
    }
    return fb;
}

struct MelParams {
    int n_mels = 80;
    int fft_size = 1024;
    int hop = 256;
    double fmin = 0.0;
    double fmax = 8000.0;
};

// L1 between log-mel spectrograms of the two signals.
inline double mel_l1(std::span<const float> x, std::span<const float> y,
                     const MelParams& p = {}) {
    if (x.size() != y.size())
        throw Error("mel_l1: length mismatch " + std::to_string(x.size()) + " vs " +
                    std::to_string(y.size()));
    const StftResolution res{p.fft_size, p.hop, p.fft_size};
    const FrameTensor X = stft_magnitude(x, res);
    const FrameTensor Y = stft_magnitude(y, res);
    const FrameTensor fb = mel_filterbank(p.n_mels, p.fft_size, kSampleRateForMel, p.fmin, p.fmax);
    constexpr double kLogFloor = 1e-5;
    double acc = 0.0;
    for (int64_t t = 0; t < X.frames; ++t) {
        for (int m = 0; m < p.n_mels; ++m) {
            double mx = 0.0, my = 0.0;
            for (int b = 0; b < X.channels; ++b) {
                mx += static_cast<double>(fb.at(m, b)) * X.at(b, t);
                my += static_cast<double>(fb.at(m, b)) * Y.at(b, t);
            }
            acc += std::abs(std::log(mx + kLogFloor) - std::log(my + kLogFloor));
        }
    }
    return acc / (static_cast<double>(X.frames) * p.n_mels);
}

// ----- EER -----

struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
};

struct EerResult {
    double eer = 0.0;
    double threshold = 0.0;
};

// Sweep candidate thresholds (midpoints of adjacent sorted unique pooled
// scores, padded below/above the extremes); FAR falls and FRR rises with the
// threshold, and the EER is read off by linear interpolation at the crossing.
inline EerResult compute_eer(const ScoreSet& scores) {
    if (scores.genuine.empty() || scores.impostor.empty())
        throw Error("compute_eer: genuine and impostor score lists must be non-empty");
    std::vector<double> g = scores.genuine, i = scores.impostor;
    std::sort(g.begin(), g.end());
    std::sort(i.begin(), i.end());

    std::vector<double> pooled;
    pooled.reserve(g.size() + i.size());
    pooled.insert(pooled.end(), g.begin(), g.end());
    pooled.insert(pooled.end(), i.begin(), i.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    std::vector<double> thresholds;
    thresholds.push_back(pooled.front() - 1.0);
    for (size_t k = 0; k + 1 < pooled.size(); ++k)
        thresholds.push_back(0.5 * (pooled[k] + pooled[k + 1]));
    thresholds.push_back(pooled.back() + 1.0);

    const double ng = static_cast<double>(g.size());
    const double ni = static_cast<double>(i.size());
    auto far_at = [&](double th) {
        // accepted impostors: score >= th
        const auto it = std::lower_bound(i.begin(), i.end(), th);
        return static_cast<double>(i.end() - it) / ni;
    };
    auto frr_at = [&](double th) {
        // rejected genuines: score < th
        const auto it = std::lower_bound(g.begin(), g.end(), th);
        return static_cast<double>(it - g.begin()) / ng;
    };

    double prev_far = far_at(thresholds[0]);
    double prev_frr = frr_at(thresholds[0]);
    double prev_th = thresholds[0];
    for (size_t k = 1; k < thresholds.size(); ++k) {
        const double far = far_at(thresholds[k]);
        const double frr = frr_at(thresholds[k]);
        const double d_prev = prev_far - prev_frr;
        const double d_cur = far - frr;
        if (d_prev >= 0.0 && d_cur < 0.0) {
            const double t = (d_prev - d_cur) > 0.0 ? d_prev / (d_prev - d_cur) : 0.0;
            EerResult r;
            r.eer = prev_frr + t * (frr - prev_frr);
            r.threshold = prev_th + t * (thresholds[k] - prev_th);
            return r;
        }
        if (d_cur == 0.0) {
            EerResult r;
            r.eer = far;
            r.threshold = thresholds[k];
            return r;
        }
        prev_far = far;
        prev_frr = frr;
        prev_th = thresholds[k];
    }
    // FAR starts at 1/FRR at 0 and ends at 0/1, so a crossing always exists;
    // reaching here means the last candidate was it.
    return {prev_frr, prev_th};
}

}  // namespace sasa
