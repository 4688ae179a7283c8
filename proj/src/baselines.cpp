#include <algorithm>
#include <cmath>

#include "creweight/watermark.hpp"

namespace creweight {

std::vector<TokenId> keyed_permutation(const SecretKey& key, std::span<const TokenId> context,
                                       std::size_t vocab_size) {
  std::vector<TokenId> perm(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) perm[i] = static_cast<TokenId>(i);
  Rng rng(keyed_prf64(key, "creweight/perm/v1", context));
  for (std::size_t i = vocab_size; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
  return perm;
}

ProbabilityVector dip_reweight(const ProbabilityVector& p, std::span<const TokenId> order, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 0.5)) throw InvalidArgument("dip_reweight: alpha must lie in [0, 0.5]");
  if (order.size() != p.size()) throw InvalidArgument("dip_reweight: order is not a permutation of the vocabulary");
  std::vector<char> seen(p.size(), 0);
  for (auto t : order) {
    if (t >= p.size() || seen[t]) throw InvalidArgument("dip_reweight: order is not a permutation of the vocabulary");
    seen[t] = 1;
  }
  double total = 0.0;
  for (double v : p.probs()) total += v;
  // Boundaries scale with the actual total so alpha = 0 is an exact identity.
  const double lo = alpha * total;
  const double hi = (1.0 - alpha) * total;
  const auto overlap = [](double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
  };
  std::vector<double> out(p.size(), 0.0);
  double start = 0.0;
  for (auto t : order) {
    const double end = start + p[t];
    out[t] = overlap(start, end, lo, hi) + 2.0 * overlap(start, end, hi, total);
    start = end;
  }
  return ProbabilityVector::unchecked(std::move(out));
}

ProbabilityVector kgw_reweight(const ProbabilityVector& p, std::span<const TokenId> green_set, double delta) {
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InvalidArgument("kgw_reweight: delta must be nonnegative");
  std::vector<double> out(p.vec());
  const double boost = std::exp(delta);
  std::vector<char> green(p.size(), 0);
  for (auto t : green_set) {
    if (t >= p.size()) throw InvalidArgument("kgw_reweight: green token outside the vocabulary");
    green[t] = 1;
  }
  double total = 0.0;
  for (std::size_t t = 0; t < out.size(); ++t) {
    if (green[t]) out[t] *= boost;
    total += out[t];
  }
  for (auto& v : out) v /= total;
  return ProbabilityVector::unchecked(std::move(out));
}

}  // namespace creweight
