#include "creweight/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "creweight/error.hpp"

namespace creweight {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return mix64(mix64(master) ^ (stream * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(master, a), b);
}

double uniform01(Rng& rng) noexcept {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) noexcept {
  // Lemire-style rejection on the low product word.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    __extension__ using u128 = unsigned __int128;
    const u128 m = static_cast<u128>(rng()) * n;
    if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
  }
}

std::size_t sample_weighted(std::span<const double> weights, double total, Rng& rng) {
  if (weights.empty() || !(total > 0.0)) throw InvalidArgument("sample_weighted: no positive mass");
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last_positive = weights.size();
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = i;
    if (target < acc) return i;
  }
  // Rounding left target just above the running sum.
  if (last_positive == weights.size()) throw InvalidArgument("sample_weighted: no positive mass");
  return last_positive;
}

namespace {

double standard_normal(Rng& rng) {
  // Marsaglia polar method; one value per call keeps the stream stateless.
  for (;;) {
    const double u = 2.0 * uniform01(rng) - 1.0;
    const double v = 2.0 * uniform01(rng) - 1.0;
    const double s = u * u + v * v;
    if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

// log of a Gamma(shape, 1) variate. Working in log space keeps tiny shapes
// from underflowing to exact zeros.
double log_gamma_variate(double shape, Rng& rng) {
  double boost = 0.0;
  if (shape < 1.0) {
    double u = uniform01(rng);
    while (u == 0.0) u = uniform01(rng);
    boost = std::log(u) / shape;
    shape += 1.0;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return std::log(d * v) + boost;
    if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return std::log(d * v) + boost;
  }
}

}  // namespace

std::vector<double> sample_dirichlet(std::size_t n, double alpha, Rng& rng) {
  if (n == 0) throw InvalidArgument("dirichlet dimension must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("dirichlet alpha must be positive");
  std::vector<double> out(n);
  for (auto& v : out) v = log_gamma_variate(alpha, rng);
  const double mx = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (auto& v : out) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace creweight
