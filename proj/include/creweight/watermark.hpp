#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "creweight/codebook.hpp"
#include "creweight/random.hpp"
#include "creweight/types.hpp"

namespace creweight {

/// Opaque watermark key, at least 16 bytes. Only the fingerprint is printable.
class SecretKey {
 public:
  static constexpr std::size_t kMinBytes = 16;

  explicit SecretKey(std::vector<std::uint8_t> bytes);
  static SecretKey from_hex(std::string_view hex);
  /// Reads a hex key from a file (surrounding whitespace ignored).
  static SecretKey from_file(const std::string& path);
  /// Reads a hex key from an environment variable; nullopt when unset.
  static std::optional<SecretKey> from_env(const char* var);
  static SecretKey random();
  /// Deterministic key for simulations.
  static SecretKey from_seed(std::uint64_t seed);

  std::string to_hex() const;
  /// Short non-reversible identifier safe to print.
  std::string fingerprint() const;
  /// Keying material for the PRF (the raw key, or its hash when longer than 64 bytes).
  std::span<const std::uint8_t> prf_key() const noexcept { return prf_key_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::vector<std::uint8_t> prf_key_;
};

/// Sentinel filling context slots that precede the first token.
inline TokenId context_pad(std::size_t vocab_size) { return static_cast<TokenId>(vocab_size); }

/// Watermark code for one position: 128-bit identity plus the selected cluster.
struct WatermarkCode {
  std::array<std::uint8_t, 16> code_id{};
  std::uint32_t cluster_index = 0;

  friend bool operator==(const WatermarkCode&, const WatermarkCode&) = default;
};

struct CodeIdHash {
  std::size_t operator()(const std::array<std::uint8_t, 16>& id) const noexcept;
};

/// Keyed BLAKE2b of (domain tag | context ids as u32 LE | counter). The
/// cluster index is mapped to [0,h) by rejection, so it is unbiased.
WatermarkCode derive_code(const SecretKey& key, std::span<const TokenId> context, std::uint32_t h);

/// Uniform [0,1) value derived from (key, context); used by the deterministic-j mode.
double derive_uniform(const SecretKey& key, std::span<const TokenId> context);

/// 64-bit keyed PRF output under a caller-chosen domain tag.
std::uint64_t keyed_prf64(const SecretKey& key, std::string_view domain, std::span<const TokenId> context);

/// Pr(c_i) = sum of p over the members of cluster i.
ClusterDistribution cluster_probabilities(const ProbabilityVector& p, const Clustering& clustering);

/// Normalized overflow law: weight_i = max(0, h * Pr(c_i) - 1).
/// Throws InternalLogicError when every weight is zero.
ClusterDistribution overflow_distribution(const ClusterDistribution& cd);

/// Probability that the pseudo-selected cluster is kept: min(1, h * Pr(c_i)).
double acceptance_probability(const ClusterDistribution& cd, std::uint32_t cluster_index);

/// Where the j draw comes from in cluster-based reweight.
enum class AcceptanceDraw { kFreshRandom, kFromCode };

/// One draw of the cluster-based reweight: accept the code's cluster when
/// j < h * Pr(c), otherwise draw a cluster from the overflow law, then sample
/// a token inside the chosen cluster in proportion to p.
/// `j_override` supplies j directly (deterministic mode); otherwise j comes from rng.
TokenId creweight_sample(const ProbabilityVector& p, const Clustering& clustering, const WatermarkCode& code, Rng& rng,
                         std::optional<double> j_override = std::nullopt);

/// Exact law of creweight_sample for a fixed cluster index with j integrated out.
ProbabilityVector creweight_distribution(const ProbabilityVector& p, const Clustering& clustering,
                                         std::uint32_t cluster_index);

/// Law of creweight_sample for a fixed cluster index and a fixed j.
ProbabilityVector creweight_distribution_given_j(const ProbabilityVector& p, const Clustering& clustering,
                                                 std::uint32_t cluster_index, double j);

/// Per-cluster breakdown of the first-stage selection, averaged over a uniform
/// cluster index. accepted[c] + inflow[c] equals Pr(c) exactly in real arithmetic.
struct SelectionBreakdown {
  std::vector<double> accepted;  // (1/h) * min(1, h Pr(c))
  std::vector<double> inflow;    // rejected mass routed to c through the overflow law
  double rejected = 0.0;         // total rejected mass, (1/h) * sum max(0, 1 - h Pr(c))
};
SelectionBreakdown selection_breakdown(const ClusterDistribution& cd);

// ---- baselines ------------------------------------------------------------

/// Keyed permutation of [0,N) for a context (Fisher-Yates driven by the PRF).
std::vector<TokenId> keyed_permutation(const SecretKey& key, std::span<const TokenId> context, std::size_t vocab_size);

/// DiP-reweight: token masses laid on [0,1] in `order`; mass in [0,alpha) is
/// dropped, [alpha,1-alpha) kept, [1-alpha,1] doubled.
ProbabilityVector dip_reweight(const ProbabilityVector& p, std::span<const TokenId> order, double alpha);

/// KGW boost: p[x] * exp(delta) on green tokens, renormalized.
ProbabilityVector kgw_reweight(const ProbabilityVector& p, std::span<const TokenId> green_set, double delta);

/// Sample a token from p.
TokenId sample_token(const ProbabilityVector& p, Rng& rng);

}  // namespace creweight
