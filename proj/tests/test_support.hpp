#pragma once
// Test doubles shared by the unit and acceptance suites.
#include <algorithm>
#include <cmath>
#include <cstring>

#include "creweight/generator.hpp"
#include "creweight/random.hpp"

namespace creweight::testing {

// Next-token law depends on the whole prefix, with some zero entries.
class PrefixModel final : public ModelSource {
 public:
  PrefixModel(std::size_t vocab, std::uint64_t seed, double zero_rate = 0.3)
      : vocab_(vocab), seed_(seed), zero_rate_(zero_rate) {}
  std::size_t vocab_size() const override { return vocab_; }
  ProbabilityVector next_distribution(std::span<const TokenId> context) const override {
    std::uint64_t s = seed_;
    for (auto t : context) s = mix64(s ^ (t + 0x9e3779b97f4a7c15ULL));
    s = mix64(s + context.size());
    Rng rng(s);
    std::vector<double> w(vocab_);
    double total = 0;
    for (auto& x : w) {
      x = uniform01(rng) < zero_rate_ ? 0.0 : -std::log1p(-uniform01(rng));
      total += x;
    }
    if (total == 0.0) {
      w[uniform_below(rng, vocab_)] = 1.0;
      total = 1.0;
    }
    for (auto& x : w) x /= total;
    return ProbabilityVector::unchecked(std::move(w));
  }

 private:
  std::size_t vocab_;
  std::uint64_t seed_;
  double zero_rate_;
};

// Deterministic chain: token i is always followed by (i * 3 + 1) mod N.
class OneHotChain final : public ModelSource {
 public:
  explicit OneHotChain(std::size_t vocab) : vocab_(vocab) {}
  std::size_t vocab_size() const override { return vocab_; }
  ProbabilityVector next_distribution(std::span<const TokenId> context) const override {
    std::vector<double> p(vocab_, 0.0);
    const TokenId prev = context.empty() ? 0 : context.back();
    p[(prev * 3 + 1) % vocab_] = 1.0;
    return ProbabilityVector::unchecked(std::move(p));
  }
  TokenId successor(TokenId prev) const { return static_cast<TokenId>((prev * 3 + 1) % vocab_); }

 private:
  std::size_t vocab_;
};

// Codes read from an explicit table indexed by the last context token (n = 1).
class TableCodeSource final : public CodeSource {
 public:
  explicit TableCodeSource(std::vector<std::uint32_t> index, std::vector<double> j = {})
      : index_(std::move(index)), j_(std::move(j)) {}
  WatermarkCode code(std::span<const TokenId> context) const override {
    WatermarkCode c;
    const TokenId last = context.back();
    std::memcpy(c.code_id.data(), &last, sizeof last);
    c.cluster_index = index_.at(last);
    return c;
  }
  double uniform(std::span<const TokenId> context) const override { return j_.empty() ? 0.5 : j_.at(context.back()); }

 private:
  std::vector<std::uint32_t> index_;
  std::vector<double> j_;
};

// Per-step law of the cluster reweight, written out from its definition.
inline std::vector<double> reference_step_law(const std::vector<double>& p, const std::vector<std::uint32_t>& cluster_of,
                                              std::uint32_t h, std::uint32_t target) {
  std::vector<double> pr(h, 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) pr[cluster_of[x]] += p[x];
  const double accept = std::min(1.0, h * pr[target]);
  std::vector<double> over(h, 0.0);
  double over_total = 0;
  for (std::uint32_t c = 0; c < h; ++c) {
    over[c] = std::max(0.0, h * pr[c] - 1.0);
    over_total += over[c];
  }
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    const auto c = cluster_of[x];
    if (p[x] == 0.0) continue;
    double cluster_mass = (c == target) ? accept : 0.0;
    if (accept < 1.0) cluster_mass += (1.0 - accept) * over[c] / over_total;
    out[x] = cluster_mass * p[x] / pr[c];
  }
  return out;
}

}  // namespace creweight::testing
