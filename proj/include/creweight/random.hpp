#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace creweight {

/// Injected random source for every stochastic operation.
using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for sub-stream `stream` of a master seed. Distinct (master, stream...)
/// tuples give unrelated seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept;

/// Uniform double in [0,1) with 53 random bits.
double uniform01(Rng& rng) noexcept;

/// Uniform integer in [0,n) without modulo bias. n > 0.
std::uint64_t uniform_below(Rng& rng, std::uint64_t n) noexcept;

/// Index drawn proportionally to nonnegative weights summing to `total`
/// (the caller passes the sum to avoid a second scan). Never returns an
/// index with zero weight.
std::size_t sample_weighted(std::span<const double> weights, double total, Rng& rng);

/// Symmetric Dirichlet(alpha) sample of dimension n.
std::vector<double> sample_dirichlet(std::size_t n, double alpha, Rng& rng);

}  // namespace creweight
