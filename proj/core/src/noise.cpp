#include "stochlog/noise.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "stochlog/error.hpp"

namespace stochlog {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Boost's default policy evaluates double arguments in long double.
using DoublePolicy = boost::math::policies::policy<boost::math::policies::promote_double<false>>;
}

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept {
    return mix64(master_seed + (index + 1) * kGolden);
}

NormalStream::NormalStream(std::uint64_t seed) noexcept : seed_(seed), key_(mix64(seed ^ 0x6A09E667F3BCC909ULL)) {}

double NormalStream::operator()(std::uint64_t k) const noexcept {
    const std::uint64_t bits = mix64(key_ + (k + 1) * kGolden);
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    return normal_quantile(u);
}

double normal_quantile(double u) {
    // Phi^-1(u) = -sqrt(2) * erfc^-1(2u)
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u, DoublePolicy{});
}

NoiseStream brownian_increments(std::uint64_t seed, std::size_t n, double dt) {
    if (n == 0) throw ValidationError("brownian_increments requires n >= 1");
    if (!(dt > 0.0)) throw ValidationError("brownian_increments requires dt > 0");
    NoiseStream out{seed, dt, {}};
    out.increments.resize(n);
    const NormalStream normal(seed);
    const double scale = std::sqrt(dt);
    for (std::size_t k = 0; k < n; ++k) out.increments[k] = scale * normal(k);
    return out;
}

}  // namespace stochlog
