#include "creweight/generator.hpp"

#include <algorithm>

namespace creweight {

namespace {

void check_config(const ModelSource& model, const GenerationConfig& cfg) {
  if (cfg.n < 1) throw InvalidArgument("generation: n must be >= 1");
  if (cfg.t < 1) throw InvalidArgument("generation: t must be >= 1");
  if (model.vocab_size() == 0) throw InvalidArgument("generation: model has an empty vocabulary");
}

void check_clustering(const ModelSource& model, const GenerationConfig& cfg, const Clustering& clustering) {
  if (clustering.num_clusters() != cfg.h)
    throw InvalidArgument("generation: clustering has h = " + std::to_string(clustering.num_clusters()) +
                          " but the config asks for h = " + std::to_string(cfg.h));
  if (clustering.vocab_size() != model.vocab_size())
    throw InvalidArgument("generation: clustering covers " + std::to_string(clustering.vocab_size()) +
                          " tokens, model vocabulary is " + std::to_string(model.vocab_size()));
}

void check_prompt(const ModelSource& model, const std::vector<TokenId>& prompt) {
  for (auto t : prompt)
    if (t >= model.vocab_size()) throw InvalidArgument("prompt token " + std::to_string(t) + " outside the vocabulary");
}

}  // namespace

void context_window(std::span<const TokenId> history, std::uint32_t n, std::size_t vocab_size,
                    std::vector<TokenId>& out) {
  out.assign(n, context_pad(vocab_size));
  const std::size_t have = std::min<std::size_t>(n, history.size());
  std::copy(history.end() - static_cast<std::ptrdiff_t>(have), history.end(), out.end() - static_cast<std::ptrdiff_t>(have));
}

TokenSequence generate_sequence(const ModelSource& model, std::uint32_t n, std::uint32_t t,
                                const std::vector<TokenId>& prompt, Rng& rng, const StepSampler& sampler) {
  if (n < 1) throw InvalidArgument("generation: n must be >= 1");
  if (t < 1) throw InvalidArgument("generation: t must be >= 1");
  check_prompt(model, prompt);
  std::vector<TokenId> full(prompt);
  full.reserve(prompt.size() + t);
  std::vector<TokenId> ctx;
  for (std::uint32_t i = 0; i < t; ++i) {
    const auto p = model.next_distribution(full);
    if (p.size() != model.vocab_size()) throw InvalidInput("model returned a distribution of the wrong length");
    context_window(full, n, model.vocab_size(), ctx);
    const TokenId next = sampler(p, ctx, rng);
    full.push_back(next);
  }
  TokenSequence out;
  out.prompt = prompt;
  out.tokens.assign(full.begin() + static_cast<std::ptrdiff_t>(prompt.size()), full.end());
  return out;
}

TokenSequence generate_watermarked(const ModelSource& model, const GenerationConfig& cfg, const Clustering& clustering,
                                   const SecretKey& key, const std::vector<TokenId>& prompt, Rng& rng,
                                   CodeHistory* persistent_history) {
  const KeyedCodeSource codes(key, cfg.h);
  return generate_watermarked(model, cfg, clustering, codes, prompt, rng, persistent_history);
}

TokenSequence generate_watermarked(const ModelSource& model, const GenerationConfig& cfg, const Clustering& clustering,
                                   const CodeSource& codes, const std::vector<TokenId>& prompt, Rng& rng,
                                   CodeHistory* persistent_history) {
  check_config(model, cfg);
  check_clustering(model, cfg, clustering);
  CodeHistory local;
  CodeHistory& hist = persistent_history ? *persistent_history : local;
  const StepSampler step = [&](const ProbabilityVector& p, std::span<const TokenId> ctx, Rng& r) -> TokenId {
    const auto code = codes.code(ctx);
    if (cfg.history_enabled && !hist.insert(code.code_id)) return sample_token(p, r);
    std::optional<double> j;
    if (cfg.draw == AcceptanceDraw::kFromCode) j = codes.uniform(ctx);
    return creweight_sample(p, clustering, code, r, j);
  };
  return generate_sequence(model, cfg.n, cfg.t, prompt, rng, step);
}

TokenSequence generate_plain(const ModelSource& model, const GenerationConfig& cfg, const std::vector<TokenId>& prompt,
                             Rng& rng) {
  check_config(model, cfg);
  return generate_sequence(model, cfg.n, cfg.t, prompt, rng,
                           [](const ProbabilityVector& p, std::span<const TokenId>, Rng& r) { return sample_token(p, r); });
}

double watermarked_sequence_probability(const ModelSource& model, const GenerationConfig& cfg,
                                        const Clustering& clustering, const CodeSource& codes,
                                        const std::vector<TokenId>& prompt, std::span<const TokenId> tokens) {
  check_config(model, cfg);
  check_clustering(model, cfg, clustering);
  check_prompt(model, prompt);
  if (tokens.size() != cfg.t) return 0.0;
  CodeHistory hist;
  std::vector<TokenId> full(prompt);
  std::vector<TokenId> ctx;
  double prob = 1.0;
  for (auto tok : tokens) {
    if (tok >= model.vocab_size()) return 0.0;
    const auto p = model.next_distribution(full);
    context_window(full, cfg.n, model.vocab_size(), ctx);
    const auto code = codes.code(ctx);
    if (cfg.history_enabled && !hist.insert(code.code_id)) {
      prob *= p[tok];
    } else if (cfg.draw == AcceptanceDraw::kFromCode) {
      prob *= creweight_distribution_given_j(p, clustering, code.cluster_index, codes.uniform(ctx))[tok];
    } else {
      prob *= creweight_distribution(p, clustering, code.cluster_index)[tok];
    }
    if (prob == 0.0) return 0.0;
    full.push_back(tok);
  }
  return prob;
}

double plain_sequence_probability(const ModelSource& model, const std::vector<TokenId>& prompt,
                                  std::span<const TokenId> tokens) {
  check_prompt(model, prompt);
  std::vector<TokenId> full(prompt);
  double prob = 1.0;
  for (auto tok : tokens) {
    if (tok >= model.vocab_size()) return 0.0;
    prob *= model.next_distribution(full)[tok];
    if (prob == 0.0) return 0.0;
    full.push_back(tok);
  }
  return prob;
}

}  // namespace creweight
