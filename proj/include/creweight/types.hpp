#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "creweight/error.hpp"

namespace creweight {

using TokenId = std::uint32_t;

/// A discrete probability law stored densely. The tag keeps token-level
/// and cluster-level laws from being mixed up.
template <class Tag>
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;

  /// Validates nonnegativity and unit mass (within kSumTolerance).
  explicit Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidArgument("distribution must be non-empty");
    double sum = 0.0;
    for (double p : probs_) {
      if (!std::isfinite(p) || p < 0.0)
        throw InvalidArgument("distribution entries must be finite and nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance)
      throw InvalidArgument("distribution must sum to 1 (got " + std::to_string(sum) + ")");
  }

  /// Skips validation. For values produced by code that already guarantees the invariants.
  static Distribution unchecked(std::vector<double> probs) {
    Distribution d;
    d.probs_ = std::move(probs);
    return d;
  }

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }
  const std::vector<double>& vec() const noexcept { return probs_; }

  friend bool operator==(const Distribution&, const Distribution&) = default;

 private:
  std::vector<double> probs_;
};

struct TokenLawTag {};
struct ClusterLawTag {};

/// Next-token law over the vocabulary.
using ProbabilityVector = Distribution<TokenLawTag>;
/// Mass per cluster.
using ClusterDistribution = Distribution<ClusterLawTag>;

/// Ordered token ids with an optional prompt prefix.
struct TokenSequence {
  std::vector<TokenId> prompt;
  std::vector<TokenId> tokens;

  friend bool operator==(const TokenSequence&, const TokenSequence&) = default;
};

}  // namespace creweight
