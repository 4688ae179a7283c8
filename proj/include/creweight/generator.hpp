#pragma once

#include <functional>
#include <memory>
#include <span>
#include <unordered_set>

#include "creweight/codebook.hpp"
#include "creweight/random.hpp"
#include "creweight/types.hpp"
#include "creweight/watermark.hpp"

namespace creweight {

/// Next-token distribution source. Implementations must be safe for
/// concurrent read-only use.
class ModelSource {
 public:
  virtual ~ModelSource() = default;
  virtual std::size_t vocab_size() const = 0;
  /// `context` is the prompt followed by every token generated so far.
  virtual ProbabilityVector next_distribution(std::span<const TokenId> context) const = 0;
};

struct GenerationConfig {
  std::uint32_t n = 1;   // context n-gram length
  std::uint32_t t = 0;   // tokens to generate
  std::uint32_t h = 16;  // cluster count; must match the clustering
  bool history_enabled = true;
  AcceptanceDraw draw = AcceptanceDraw::kFreshRandom;
};

/// Codes already used in a generation. A code seen again falls back to plain sampling.
class CodeHistory {
 public:
  /// Returns false when the id was already present.
  bool insert(const std::array<std::uint8_t, 16>& id) { return ids_.insert(id).second; }
  bool contains(const std::array<std::uint8_t, 16>& id) const { return ids_.contains(id); }
  std::size_t size() const noexcept { return ids_.size(); }
  void clear() { ids_.clear(); }

 private:
  std::unordered_set<std::array<std::uint8_t, 16>, CodeIdHash> ids_;
};

/// Maps a context to a watermark code. The keyed implementation is the real
/// one; tests substitute explicit tables to marginalize over codes exactly.
class CodeSource {
 public:
  virtual ~CodeSource() = default;
  virtual WatermarkCode code(std::span<const TokenId> context) const = 0;
  /// j for the deterministic acceptance mode.
  virtual double uniform(std::span<const TokenId> context) const = 0;
};

class KeyedCodeSource final : public CodeSource {
 public:
  KeyedCodeSource(const SecretKey& key, std::uint32_t h) : key_(key), h_(h) {}
  WatermarkCode code(std::span<const TokenId> context) const override { return derive_code(key_, context, h_); }
  double uniform(std::span<const TokenId> context) const override { return derive_uniform(key_, context); }

 private:
  const SecretKey& key_;
  std::uint32_t h_;
};

/// Last n tokens of `history`, left-padded with the sentinel id `vocab_size`.
void context_window(std::span<const TokenId> history, std::uint32_t n, std::size_t vocab_size,
                    std::vector<TokenId>& out);

/// Picks the next token given the model law and the n-gram context.
using StepSampler = std::function<TokenId(const ProbabilityVector& p, std::span<const TokenId> context, Rng& rng)>;

/// Shared autoregressive loop: exactly `t` tokens are produced after the prompt.
TokenSequence generate_sequence(const ModelSource& model, std::uint32_t n, std::uint32_t t,
                                const std::vector<TokenId>& prompt, Rng& rng, const StepSampler& sampler);

/// Watermarked generation with cluster-based reweight. `persistent_history`,
/// when given, is used instead of a fresh per-call history.
TokenSequence generate_watermarked(const ModelSource& model, const GenerationConfig& cfg, const Clustering& clustering,
                                   const SecretKey& key, const std::vector<TokenId>& prompt, Rng& rng,
                                   CodeHistory* persistent_history = nullptr);
TokenSequence generate_watermarked(const ModelSource& model, const GenerationConfig& cfg, const Clustering& clustering,
                                   const CodeSource& codes, const std::vector<TokenId>& prompt, Rng& rng,
                                   CodeHistory* persistent_history = nullptr);

/// Ancestral sampling from the model (null-hypothesis control).
TokenSequence generate_plain(const ModelSource& model, const GenerationConfig& cfg, const std::vector<TokenId>& prompt,
                             Rng& rng);

/// Exact probability that generate_watermarked emits `tokens` after `prompt`
/// for the given code source, with the sampling randomness integrated out.
double watermarked_sequence_probability(const ModelSource& model, const GenerationConfig& cfg,
                                        const Clustering& clustering, const CodeSource& codes,
                                        const std::vector<TokenId>& prompt, std::span<const TokenId> tokens);

/// Exact probability of `tokens` under generate_plain.
double plain_sequence_probability(const ModelSource& model, const std::vector<TokenId>& prompt,
                                  std::span<const TokenId> tokens);

}  // namespace creweight
