#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace stochlog {

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Per-path seed for path `index` of an ensemble: the index-th output of a
/// SplitMix64 stream started at `master_seed`.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) noexcept;

/// Counter-based standard normal source.
///
/// Draw k is a pure function of (seed, k): the k-th SplitMix64 output for the
/// stream keyed by `seed` is mapped to a uniform in (0, 1) with 53 random bits
/// and transformed by the inverse normal CDF. Any draw can be replayed without
/// generating its predecessors.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) noexcept;

    double operator()(std::uint64_t k) const noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t key_;
};

/// Inverse of the standard normal CDF for u in (0, 1).
double normal_quantile(double u);

/// Discretised Brownian increments dB_k ~ Normal(0, dt).
struct NoiseStream {
    std::uint64_t seed = 0;
    double dt = 0.0;
    std::vector<double> increments;
};

/// n increments sqrt(dt) * z_k, bit-identical for equal (seed, n, dt).
NoiseStream brownian_increments(std::uint64_t seed, std::size_t n, double dt);

}  // namespace stochlog
