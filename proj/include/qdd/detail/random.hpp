#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace qdd::detail {

/// Gaussian draws via Box-Muller on mt19937_64. std::normal_distribution is
/// implementation-defined, so sequences would differ across standard
/// libraries; this keeps seeded output stable everywhere.
class GaussianSource {
  public:
    explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 =
            (static_cast<double>(engine_()) + 1.0) / (static_cast<double>(engine_.max()) + 2.0);
        const double u2 =
            static_cast<double>(engine_()) / (static_cast<double>(engine_.max()) + 1.0);
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Decorrelates derived seeds (e.g. the measurement-noise stream from the
/// excitation stream) without consuming draws from either.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace qdd::detail
