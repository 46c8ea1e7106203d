#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace sasa {

// Deterministic N(0,1) source. std::normal_distribution is
// implementation-defined, so Box-Muller is spelled out here to keep seeded
// weight files and pseudo-speaker draws reproducible.
class GaussianRng {
  public:
    explicit GaussianRng(uint64_t seed) : eng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    float next(float mean, float stddev) {
        return mean + stddev * static_cast<float>(next());
    }

    // Uniform in (0, 1]; never returns 0 so log() above stays finite.
    double uniform01() {
        uint64_t x = eng_();
        return (static_cast<double>(x >> 11) + 1.0) * (1.0 / 9007199254740992.0);
    }

    uint64_t raw() { return eng_(); }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace sasa
