#include "creweight/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace creweight {

SyntheticCodebook synthesize_codebook(std::uint64_t seed, std::size_t vocab_size, std::size_t dim, std::size_t n_blobs,
                                      double separation, double blob_std) {
  if (vocab_size == 0 || dim == 0) throw InvalidArgument("synthesize_codebook: N and d must be positive");
  if (n_blobs == 0 || n_blobs > vocab_size) throw InvalidArgument("synthesize_codebook: need 1 <= n_blobs <= N");
  if (!(separation >= 0.0) || !std::isfinite(separation))
    throw InvalidArgument("synthesize_codebook: separation must be finite and nonnegative");
  if (!(blob_std >= 0.0) || !std::isfinite(blob_std))
    throw InvalidArgument("synthesize_codebook: blob_std must be finite and nonnegative");

  Rng rng(derive_seed(seed, 0xc0deb00cULL));
  // Lattice side m with m^d >= 2 * n_blobs leaves room for random placement.
  std::uint64_t side = 2;
  while (std::pow(static_cast<double>(side), static_cast<double>(dim)) < 2.0 * static_cast<double>(n_blobs)) ++side;
  std::set<std::vector<std::uint64_t>> used;
  std::vector<double> centers;
  centers.reserve(n_blobs * dim);
  while (used.size() < n_blobs) {
    std::vector<std::uint64_t> cell(dim);
    for (auto& c : cell) c = uniform_below(rng, side);
    if (!used.insert(cell).second) continue;
    for (auto c : cell) centers.push_back(separation * static_cast<double>(c));
  }

  std::vector<std::uint32_t> blob_of(vocab_size);
  for (std::size_t t = 0; t < vocab_size; ++t) blob_of[t] = static_cast<std::uint32_t>(t % n_blobs);
  for (std::size_t i = vocab_size; i > 1; --i) std::swap(blob_of[i - 1], blob_of[uniform_below(rng, i)]);

  std::vector<float> values(vocab_size * dim);
  for (std::size_t t = 0; t < vocab_size; ++t)
    for (std::size_t k = 0; k < dim; ++k) {
      // Box-Muller keeps the stream independent of the standard library's normal.
      const double u1 = 1.0 - uniform01(rng);
      const double u2 = uniform01(rng);
      const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
      values[t * dim + k] = static_cast<float>(centers[blob_of[t] * dim + k] + blob_std * z);
    }
  return {TokenEmbeddingTable(vocab_size, dim, std::move(values)), std::move(blob_of)};
}

MockModel::MockModel(std::uint64_t seed, std::size_t vocab_size, std::uint32_t order, double dirichlet_alpha,
                     double temperature)
    : seed_(seed), vocab_size_(vocab_size), order_(order), alpha_(dirichlet_alpha), temperature_(temperature) {
  if (vocab_size_ == 0) throw InvalidArgument("mock model: N must be positive");
  if (!(alpha_ > 0.0) || !std::isfinite(alpha_)) throw InvalidArgument("mock model: dirichlet_alpha must be positive");
  if (!(temperature_ > 0.0) || !std::isfinite(temperature_))
    throw InvalidArgument("mock model: temperature must be positive");
  temperature_ = std::max(temperature_, kMinTemperature);

  double states = 1.0;
  for (std::uint32_t k = 0; k < order_; ++k) states *= static_cast<double>(vocab_size_ + 1);
  if (states * static_cast<double>(vocab_size_) <= static_cast<double>(kMaxTabulatedEntries)) {
    num_states_ = static_cast<std::size_t>(states);
    table_.resize(num_states_ * vocab_size_);
#pragma omp parallel for schedule(static)
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(num_states_); ++s) {
      const auto row = make_row(derive_seed(seed_, static_cast<std::uint64_t>(s)));
      std::copy(row.begin(), row.end(), table_.begin() + s * static_cast<std::int64_t>(vocab_size_));
    }
  }
}

std::uint64_t MockModel::state_index(std::span<const TokenId> state) const {
  // Mixed-radix index in base N+1; unique while it fits in 64 bits, hashed beyond that.
  std::uint64_t idx = 0;
  for (auto t : state) idx = idx * (vocab_size_ + 1) + t;
  return idx;
}

std::vector<double> MockModel::make_row(std::uint64_t state_seed) const {
  Rng rng(state_seed);
  auto row = sample_dirichlet(vocab_size_, alpha_, rng);
  if (temperature_ != 1.0) {
    const double inv_t = 1.0 / temperature_;
    double mx = -std::numeric_limits<double>::infinity();
    std::vector<double> logits(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      logits[i] = row[i] > 0.0 ? std::log(row[i]) * inv_t : -std::numeric_limits<double>::infinity();
      mx = std::max(mx, logits[i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] = std::exp(logits[i] - mx);
      sum += row[i];
    }
    for (auto& v : row) v /= sum;
  }
  return row;
}

std::vector<double> MockModel::row_for_state(std::span<const TokenId> state) const {
  if (state.size() != order_) throw InvalidArgument("mock model: state length differs from order");
  for (auto t : state)
    if (t > vocab_size_) throw InvalidArgument("mock model: state token outside the vocabulary");
  const std::uint64_t idx = state_index(state);
  if (!table_.empty()) {
    const auto begin = table_.begin() + static_cast<std::ptrdiff_t>(idx * vocab_size_);
    return {begin, begin + static_cast<std::ptrdiff_t>(vocab_size_)};
  }
  std::uint64_t h = 0;
  for (auto t : state) h = derive_seed(h, t);
  return make_row(derive_seed(seed_, h));
}

ProbabilityVector MockModel::next_distribution(std::span<const TokenId> context) const {
  std::vector<TokenId> state;
  context_window(context, order_, vocab_size_, state);
  if (order_ == 0) state.clear();
  return ProbabilityVector::unchecked(row_for_state(state));
}

MockModel sample_mock_model(std::uint64_t seed, std::size_t vocab_size, std::uint32_t order, double dirichlet_alpha,
                            double temperature) {
  return MockModel(seed, vocab_size, order, dirichlet_alpha, temperature);
}

double entropy_nats(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

ReplacementSampler::ReplacementSampler(const TokenEmbeddingTable& table, double beta)
    : ReplacementSampler(table, beta, true) {}

ReplacementSampler ReplacementSampler::build_serial(const TokenEmbeddingTable& table, double beta) {
  return ReplacementSampler(table, beta, false);
}

ReplacementSampler::ReplacementSampler(const TokenEmbeddingTable& table, double beta, bool parallel)
    : table_(&table), beta_(beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("retokenization: beta must be nonnegative");
  const std::size_t n = table.vocab_size();
  if (n > kMaxPrecomputedVocab || n < 2) return;
  cdf_.resize(n * n);
  const auto fill = [&](std::int64_t x) {
    std::span<double> row(cdf_.data() + x * static_cast<std::int64_t>(n), n);
    fill_weights(static_cast<TokenId>(x), row);
    double acc = 0.0;
    for (auto& v : row) {
      acc += v;
      v = acc;
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) fill(x);
  } else {
    for (std::int64_t x = 0; x < static_cast<std::int64_t>(n); ++x) fill(x);
  }
}

void ReplacementSampler::fill_weights(TokenId x, std::span<double> w) const {
  const std::size_t n = table_->vocab_size();
  const std::size_t d = table_->dim();
  const auto ex = table_->row(x);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < n; ++y) {
    if (y == x) {
      w[y] = 0.0;
      continue;
    }
    const auto ey = table_->row(static_cast<TokenId>(y));
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = static_cast<double>(ex[k]) - ey[k];
      s += diff * diff;
    }
    w[y] = s;
    dmin = std::min(dmin, s);
  }
  // Shift by the nearest distance so large beta cannot underflow every weight.
  for (std::size_t y = 0; y < n; ++y)
    if (y != x) w[y] = std::exp(-beta_ * (w[y] - dmin));
}

std::vector<double> ReplacementSampler::law(TokenId x) const {
  const std::size_t n = table_->vocab_size();
  if (x >= n) throw InvalidArgument("replacement law: token outside the vocabulary");
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  fill_weights(x, w);
  double total = 0.0;
  for (double v : w) total += v;
  for (auto& v : w) v /= total;
  return w;
}

TokenId ReplacementSampler::sample(TokenId x, Rng& rng) const {
  const std::size_t n = table_->vocab_size();
  if (x >= n) throw InvalidArgument("replacement: token outside the vocabulary");
  if (n < 2) return x;
  if (!cdf_.empty()) {
    const double* row = cdf_.data() + std::size_t{x} * n;
    const double target = uniform01(rng) * row[n - 1];
    auto y = static_cast<std::size_t>(std::upper_bound(row, row + n, target) - row);
    if (y >= n) y = n - 1;
    // Skip zero-width entries (x itself) that upper_bound can land on only via rounding.
    while (y == x || (y > 0 ? row[y] - row[y - 1] : row[0]) <= 0.0) y = (y + 1) % n;
    return static_cast<TokenId>(y);
  }
  std::vector<double> w(n);
  fill_weights(x, w);
  double total = 0.0;
  for (double v : w) total += v;
  return static_cast<TokenId>(sample_weighted(w, total, rng));
}

TokenSequence apply_retokenization(const TokenSequence& seq, const ReplacementSampler& sampler, double p_flip,
                                   Rng& rng) {
  if (!(p_flip >= 0.0 && p_flip <= 1.0)) throw InvalidArgument("retokenization: p_flip must lie in [0,1]");
  TokenSequence out = seq;
  for (auto& t : out.tokens) {
    if (t >= sampler.vocab_size()) throw InvalidArgument("retokenization: token outside the vocabulary");
    if (uniform01(rng) < p_flip) t = sampler.sample(t, rng);
  }
  return out;
}

TokenSequence apply_retokenization(const TokenSequence& seq, const TokenEmbeddingTable& table,
                                   const RetokenizationChannel& ch, Rng& rng) {
  const ReplacementSampler sampler(table, ch.beta);
  return apply_retokenization(seq, sampler, ch.p_flip, rng);
}

TokenSequence apply_substitution_attack(const TokenSequence& seq, std::size_t vocab_size, double rate, Rng& rng) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw InvalidArgument("substitution: rate must lie in [0,1]");
  if (vocab_size == 0) throw InvalidArgument("substitution: empty vocabulary");
  TokenSequence out = seq;
  for (auto& t : out.tokens) {
    if (t >= vocab_size) throw InvalidArgument("substitution: token outside the vocabulary");
    if (vocab_size < 2 || !(uniform01(rng) < rate)) continue;
    auto y = static_cast<TokenId>(uniform_below(rng, vocab_size - 1));
    t = y >= t ? y + 1 : y;
  }
  return out;
}

}  // namespace creweight
