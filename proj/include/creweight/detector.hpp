#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "creweight/codebook.hpp"
#include "creweight/watermark.hpp"

namespace creweight {

struct DetectionReport {
  std::uint64_t score = 0;
  std::uint64_t scored_positions = 0;
  std::uint32_t h = 0;
  double p_value = 1.0;
  bool decision = false;
  double fpr = 0.01;
  std::vector<std::uint8_t> flags;  // one per scored position
};

struct DetectOptions {
  std::uint32_t n = 1;
  double fpr = 0.01;
  bool dedup = false;  // score each distinct code once
};

/// 1 iff the token lies in the cluster the code selects.
int score_token(const WatermarkCode& code, TokenId token, const Clustering& clustering);

/// P(X >= k) for X ~ Binomial(t, 1/h). Log-space with compensated summation;
/// switches to the regularized incomplete beta for t > kIncompleteBetaCutover.
double binomial_tail(std::uint64_t t, std::uint64_t k, std::uint32_t h);
/// Same for a general success probability in (0,1).
double binomial_tail_p(std::uint64_t t, std::uint64_t k, double success);
/// Direct log-space summation only (no incomplete-beta switch).
double binomial_tail_sum(std::uint64_t t, std::uint64_t k, double success);
/// Regularized incomplete beta route only.
double binomial_tail_beta(std::uint64_t t, std::uint64_t k, double success);

inline constexpr std::uint64_t kIncompleteBetaCutover = 100000;

struct Threshold {
  std::uint64_t k = 0;     // smallest k with tail(k) <= fpr, or t + 1
  bool achievable = true;  // false when even k = t exceeds fpr
};

/// Smallest score whose null tail is at most fpr. fpr must lie in (0,1).
Threshold threshold_for_fpr(std::uint64_t t, std::uint32_t h, double fpr);

/// Recomputes codes from key and context and runs the exact binomial test.
/// Positions n..len-1 (0-based) are scored; the detector never sees the model.
DetectionReport detect(std::span<const TokenId> tokens, const SecretKey& key, const Clustering& clustering,
                       const DetectOptions& opts);

/// Detection over many sequences; OpenMP across sequences.
std::vector<DetectionReport> detect_batch(std::span<const std::vector<TokenId>> seqs, const SecretKey& key,
                                          const Clustering& clustering, const DetectOptions& opts);
/// Serial reference for detect_batch.
std::vector<DetectionReport> detect_batch_serial(std::span<const std::vector<TokenId>> seqs, const SecretKey& key,
                                                 const Clustering& clustering, const DetectOptions& opts);

/// {score, scored_positions, h, p_value, decision, fpr[, flags]}
std::string report_to_json(const DetectionReport& report, bool include_flags);

// ---- baseline detectors ----------------------------------------------------

enum class GreenTest {
  kZScore,    // KGW: one-sided z on the green count
  kBinomial,  // DiPmark-style: exact binomial tail on the green count
};

struct GreenListDetection {
  std::uint64_t green = 0;
  std::uint64_t scored_positions = 0;
  double statistic = 0.0;  // z for kZScore, green count for kBinomial
  double p_value = 1.0;
  bool decision = false;
};

/// Green list of a context = the last round(gamma * N) tokens of keyed_permutation.
std::vector<TokenId> green_list(const SecretKey& key, std::span<const TokenId> context, std::size_t vocab_size,
                                double gamma);

GreenListDetection detect_green(std::span<const TokenId> tokens, const SecretKey& key, std::size_t vocab_size,
                                std::uint32_t n, double gamma, GreenTest test, double fpr, bool dedup = false);

}  // namespace creweight
