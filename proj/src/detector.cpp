#include "creweight/detector.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/special_functions/beta.hpp>

#include "creweight/generator.hpp"
#include "json.hpp"

namespace creweight {

namespace {

// Neumaier summation.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

// pmf(i) * factor, leaving log space only when the pmf itself underflows.
double scaled_pmf(std::uint64_t t, std::uint64_t i, double success, double log_p, double log_q, double factor) {
  const double td = static_cast<double>(t);
  const double id = static_cast<double>(i);
  const double d = boost::math::ibeta_derivative(id + 1.0, td - id + 1.0, success) / (td + 1.0);
  if (d > 1e-290) return d * factor;
  return std::exp(std::lgamma(td + 1.0) - std::lgamma(id + 1.0) - std::lgamma(td - id + 1.0) + id * log_p +
                  (td - id) * log_q + std::log(factor));
}

void check_success(double success) {
  if (!(success > 0.0 && success < 1.0)) throw InvalidArgument("binomial success probability must lie in (0,1)");
}

}  // namespace

int score_token(const WatermarkCode& code, TokenId token, const Clustering& clustering) {
  return clustering.cluster_of(token) == code.cluster_index ? 1 : 0;
}

double binomial_tail_sum(std::uint64_t t, std::uint64_t k, double success) {
  check_success(success);
  if (k > t) throw InvalidArgument("binomial_tail: k = " + std::to_string(k) + " exceeds t = " + std::to_string(t));
  if (k == 0) return 1.0;
  const double log_p = std::log(success);
  const double log_q = std::log1p(-success);
  const double ratio = success / (1.0 - success);
  const double mean = static_cast<double>(t) * success;
  if (static_cast<double>(k) > mean) {
    // Upper tail terms decrease from k upward: scale by pmf(k).
    CompensatedSum acc;
    double term = 1.0;
    for (std::uint64_t i = k; i <= t; ++i) {
      acc.add(term);
      term *= static_cast<double>(t - i) / static_cast<double>(i + 1) * ratio;
      if (term < 1e-18 * acc.value()) break;
    }
    return std::min(1.0, scaled_pmf(t, k, success, log_p, log_q, acc.value()));
  }
  // Lower tail terms decrease from k-1 downward.
  CompensatedSum acc;
  double term = 1.0;
  for (std::uint64_t i = k - 1;; --i) {
    acc.add(term);
    if (i == 0) break;
    term *= static_cast<double>(i) / static_cast<double>(t - i + 1) / ratio;
    if (term < 1e-18 * acc.value()) break;
  }
  const double lower = scaled_pmf(t, k - 1, success, log_p, log_q, acc.value());
  return std::clamp(1.0 - lower, 0.0, 1.0);
}

double binomial_tail_beta(std::uint64_t t, std::uint64_t k, double success) {
  check_success(success);
  if (k > t) throw InvalidArgument("binomial_tail: k = " + std::to_string(k) + " exceeds t = " + std::to_string(t));
  if (k == 0) return 1.0;
  // P(X >= k) = I_p(k, t - k + 1)
  return boost::math::ibeta(static_cast<double>(k), static_cast<double>(t - k + 1), success);
}

double binomial_tail_p(std::uint64_t t, std::uint64_t k, double success) {
  if (t > kIncompleteBetaCutover) return binomial_tail_beta(t, k, success);
  return binomial_tail_sum(t, k, success);
}

double binomial_tail(std::uint64_t t, std::uint64_t k, std::uint32_t h) {
  if (h < 2) throw InvalidArgument("binomial_tail: h must be >= 2");
  return binomial_tail_p(t, k, 1.0 / static_cast<double>(h));
}

Threshold threshold_for_fpr(std::uint64_t t, std::uint32_t h, double fpr) {
  if (!(fpr > 0.0 && fpr < 1.0)) throw InvalidArgument("fpr must lie in the open interval (0,1)");
  if (binomial_tail(t, t, h) > fpr) return {t + 1, false};
  std::uint64_t lo = 0, hi = t;  // tail(hi) <= fpr
  while (lo < hi) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (binomial_tail(t, mid, h) <= fpr)
      hi = mid;
    else
      lo = mid + 1;
  }
  return {lo, true};
}

DetectionReport detect(std::span<const TokenId> tokens, const SecretKey& key, const Clustering& clustering,
                       const DetectOptions& opts) {
  if (opts.n < 1) throw InvalidArgument("detect: n must be >= 1");
  if (!(opts.fpr > 0.0 && opts.fpr < 1.0)) throw InvalidArgument("fpr must lie in the open interval (0,1)");
  if (clustering.num_clusters() < 2) throw InvalidArgument("detect: h must be >= 2 for a meaningful test");
  if (tokens.size() <= opts.n)
    throw InvalidInput("detect: sequence of length " + std::to_string(tokens.size()) + " is too short for n = " +
                       std::to_string(opts.n));
  const std::size_t vocab = clustering.vocab_size();
  for (auto t : tokens)
    if (t >= vocab) throw InvalidInput("detect: token " + std::to_string(t) + " outside the vocabulary");

  DetectionReport r;
  r.h = clustering.num_clusters();
  r.fpr = opts.fpr;
  CodeHistory seen;
  for (std::size_t i = opts.n; i < tokens.size(); ++i) {
    const auto code = derive_code(key, tokens.subspan(i - opts.n, opts.n), r.h);
    if (opts.dedup && !seen.insert(code.code_id)) continue;
    const int f = score_token(code, tokens[i], clustering);
    r.flags.push_back(static_cast<std::uint8_t>(f));
    r.score += static_cast<std::uint64_t>(f);
  }
  r.scored_positions = r.flags.size();
  r.p_value = binomial_tail(r.scored_positions, r.score, r.h);
  r.decision = r.p_value <= opts.fpr;
  return r;
}

std::vector<DetectionReport> detect_batch(std::span<const std::vector<TokenId>> seqs, const SecretKey& key,
                                          const Clustering& clustering, const DetectOptions& opts) {
  std::vector<DetectionReport> out(seqs.size());
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(seqs.size()); ++i) {
    try {
      out[i] = detect(seqs[i], key, clustering, opts);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::vector<DetectionReport> detect_batch_serial(std::span<const std::vector<TokenId>> seqs, const SecretKey& key,
                                                 const Clustering& clustering, const DetectOptions& opts) {
  std::vector<DetectionReport> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(detect(s, key, clustering, opts));
  return out;
}

std::string report_to_json(const DetectionReport& report, bool include_flags) {
  nlohmann::ordered_json j;
  j["score"] = report.score;
  j["scored_positions"] = report.scored_positions;
  j["h"] = report.h;
  j["p_value"] = report.p_value;
  j["decision"] = report.decision;
  j["fpr"] = report.fpr;
  if (include_flags) j["flags"] = report.flags;
  return j.dump(2);
}

std::vector<TokenId> green_list(const SecretKey& key, std::span<const TokenId> context, std::size_t vocab_size,
                                double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("green_list: gamma must lie in (0,1)");
  auto perm = keyed_permutation(key, context, vocab_size);
  const auto count = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(vocab_size)));
  return {perm.end() - static_cast<std::ptrdiff_t>(count), perm.end()};
}

GreenListDetection detect_green(std::span<const TokenId> tokens, const SecretKey& key, std::size_t vocab_size,
                                std::uint32_t n, double gamma, GreenTest test, double fpr, bool dedup) {
  if (n < 1) throw InvalidArgument("detect: n must be >= 1");
  if (!(fpr > 0.0 && fpr < 1.0)) throw InvalidArgument("fpr must lie in the open interval (0,1)");
  if (tokens.size() <= n)
    throw InvalidInput("detect: sequence of length " + std::to_string(tokens.size()) + " is too short for n = " +
                       std::to_string(n));
  for (auto t : tokens)
    if (t >= vocab_size) throw InvalidInput("detect: token " + std::to_string(t) + " outside the vocabulary");
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidArgument("detect: gamma must lie in (0,1)");
  const auto green_count = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(vocab_size)));
  const double rate = static_cast<double>(green_count) / static_cast<double>(vocab_size);

  // Rank of every token in each context's permutation; contexts repeat often.
  std::map<std::vector<TokenId>, std::vector<std::uint32_t>> rank_cache;
  std::set<std::vector<TokenId>> seen;
  GreenListDetection r;
  std::vector<TokenId> ctx;
  for (std::size_t i = n; i < tokens.size(); ++i) {
    ctx.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i - n), tokens.begin() + static_cast<std::ptrdiff_t>(i));
    if (dedup && !seen.insert(ctx).second) continue;
    auto it = rank_cache.find(ctx);
    if (it == rank_cache.end()) {
      const auto perm = keyed_permutation(key, ctx, vocab_size);
      std::vector<std::uint32_t> rank(vocab_size);
      for (std::size_t pos = 0; pos < perm.size(); ++pos) rank[perm[pos]] = static_cast<std::uint32_t>(pos);
      it = rank_cache.emplace(ctx, std::move(rank)).first;
    }
    if (it->second[tokens[i]] >= vocab_size - green_count) ++r.green;
    ++r.scored_positions;
  }
  const double T = static_cast<double>(r.scored_positions);
  if (test == GreenTest::kZScore) {
    r.statistic = (static_cast<double>(r.green) - rate * T) / std::sqrt(T * rate * (1.0 - rate));
    r.p_value = 0.5 * std::erfc(r.statistic / std::sqrt(2.0));
  } else {
    r.statistic = static_cast<double>(r.green);
    r.p_value = binomial_tail_p(r.scored_positions, r.green, rate);
  }
  r.decision = r.p_value <= fpr;
  return r;
}

}  // namespace creweight
