#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "creweight/codebook.hpp"
#include "creweight/generator.hpp"
#include "creweight/random.hpp"

namespace creweight {

/// Blob-structured embedding table together with the planted blob labels.
struct SyntheticCodebook {
  TokenEmbeddingTable table;
  std::vector<std::uint32_t> blob_of;
};

/// n_blobs Gaussian blobs (per-coordinate std blob_std) whose centers sit on a
/// lattice of spacing `separation`, so centers are pairwise >= separation apart.
/// Tokens are spread evenly over blobs in a seed-dependent order.
SyntheticCodebook synthesize_codebook(std::uint64_t seed, std::size_t vocab_size, std::size_t dim, std::size_t n_blobs,
                                      double separation, double blob_std);

/// Markov mock of an autoregressive model: each context state (the last
/// `order` tokens, sentinel-padded) owns a Dirichlet row tempered by 1/temperature.
class MockModel final : public ModelSource {
 public:
  static constexpr double kMinTemperature = 1e-6;
  /// Rows are tabulated up front when (N+1)^order * N stays under this many entries.
  static constexpr std::size_t kMaxTabulatedEntries = std::size_t{1} << 23;

  MockModel(std::uint64_t seed, std::size_t vocab_size, std::uint32_t order, double dirichlet_alpha,
            double temperature);

  std::size_t vocab_size() const override { return vocab_size_; }
  ProbabilityVector next_distribution(std::span<const TokenId> context) const override;

  std::uint32_t order() const noexcept { return order_; }
  double dirichlet_alpha() const noexcept { return alpha_; }
  double temperature() const noexcept { return temperature_; }
  std::uint64_t seed() const noexcept { return seed_; }
  bool tabulated() const noexcept { return !table_.empty(); }

  /// The row for an explicit state (order tokens, ids may equal N as padding).
  std::vector<double> row_for_state(std::span<const TokenId> state) const;

 private:
  std::uint64_t state_index(std::span<const TokenId> state) const;
  std::vector<double> make_row(std::uint64_t state_seed) const;

  std::uint64_t seed_;
  std::size_t vocab_size_;
  std::uint32_t order_;
  double alpha_;
  double temperature_;
  std::size_t num_states_ = 0;
  std::vector<double> table_;  // num_states_ * vocab_size_ when tabulated
};

MockModel sample_mock_model(std::uint64_t seed, std::size_t vocab_size, std::uint32_t order, double dirichlet_alpha,
                            double temperature);

/// Shannon entropy in nats.
double entropy_nats(std::span<const double> p);

struct RetokenizationChannel {
  double p_flip = 0.0;  // per-token perturbation probability, [0,1]
  double beta = 0.0;    // similarity temperature, >= 0
};

/// Replacement law y != x with P(y) proportional to exp(-beta * |e_x - e_y|^2).
/// Per-token CDFs are precomputed (in parallel) for vocabularies up to
/// kMaxPrecomputedVocab; larger vocabularies compute weights on demand.
class ReplacementSampler {
 public:
  static constexpr std::size_t kMaxPrecomputedVocab = 4096;

  ReplacementSampler(const TokenEmbeddingTable& table, double beta);
  /// Serial precomputation; reference for tests and the benchmark.
  static ReplacementSampler build_serial(const TokenEmbeddingTable& table, double beta);

  TokenId sample(TokenId x, Rng& rng) const;
  /// Normalized replacement law for x (entry x is zero).
  std::vector<double> law(TokenId x) const;
  std::size_t vocab_size() const noexcept { return table_->vocab_size(); }
  double beta() const noexcept { return beta_; }
  const std::vector<double>& cdf_table() const noexcept { return cdf_; }

 private:
  ReplacementSampler(const TokenEmbeddingTable& table, double beta, bool parallel);
  void fill_weights(TokenId x, std::span<double> w) const;

  const TokenEmbeddingTable* table_;
  double beta_;
  std::vector<double> cdf_;  // N*N cumulative, empty when computing on demand
};

/// Perturbs each token independently with probability p_flip using `sampler`.
/// Length and prompt are preserved.
TokenSequence apply_retokenization(const TokenSequence& seq, const ReplacementSampler& sampler, double p_flip,
                                   Rng& rng);
TokenSequence apply_retokenization(const TokenSequence& seq, const TokenEmbeddingTable& table,
                                   const RetokenizationChannel& ch, Rng& rng);

/// Replaces each token with a uniformly random different token with probability `rate`.
TokenSequence apply_substitution_attack(const TokenSequence& seq, std::size_t vocab_size, double rate, Rng& rng);

}  // namespace creweight
