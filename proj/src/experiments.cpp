#include "creweight/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "creweight/generator.hpp"
#include "json.hpp"

namespace creweight {

namespace {

enum Stream : std::uint64_t {
  kKeyStream = 1,
  kGenStream = 2,
  kChannelStream = 3,
  kNullStream = 4,
  kNullChannelStream = 5,
  kScrambleStream = 6,
  kKMeansStream = 7,
};

std::string fmt_num(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

const char* method_name(MethodKind k) {
  switch (k) {
    case MethodKind::kCReweight: return "creweight";
    case MethodKind::kDipReweight: return "dip";
    case MethodKind::kKgw: return "kgw";
  }
  return "?";
}

const char* channel_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::kIdentity: return "identity";
    case ChannelKind::kRetokenize: return "retokenize";
    case ChannelKind::kSubstitute: return "substitute";
  }
  return "?";
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

// Distortion-free baselines share the code-history rule: a context already
// watermarked in this generation is sampled from the raw model law.
TokenSequence generate_for_method(const MethodSpec& m, const ExperimentConfig& cfg, const ExperimentAssets& assets,
                                  std::size_t method_index, const SecretKey& key, Rng& rng) {
  const auto& model = assets.model;
  const std::size_t vocab = model.vocab_size();
  switch (m.kind) {
    case MethodKind::kCReweight: {
      GenerationConfig g{cfg.n, cfg.t, m.h, cfg.history_enabled, AcceptanceDraw::kFreshRandom};
      return generate_watermarked(model, g, assets.clusterings[method_index], key, {}, rng);
    }
    case MethodKind::kDipReweight: {
      std::set<std::vector<TokenId>> history;
      return generate_sequence(model, cfg.n, cfg.t, {}, rng,
                               [&](const ProbabilityVector& p, std::span<const TokenId> ctx, Rng& r) -> TokenId {
                                 if (cfg.history_enabled && !history.emplace(ctx.begin(), ctx.end()).second)
                                   return sample_token(p, r);
                                 const auto order = keyed_permutation(key, ctx, vocab);
                                 return sample_token(dip_reweight(p, order, m.alpha), r);
                               });
    }
    case MethodKind::kKgw:
      return generate_sequence(model, cfg.n, cfg.t, {}, rng,
                               [&](const ProbabilityVector& p, std::span<const TokenId> ctx, Rng& r) -> TokenId {
                                 return sample_token(kgw_reweight(p, green_list(key, ctx, vocab, m.gamma), m.delta), r);
                               });
  }
  throw InternalLogicError("unknown method");
}

double p_value_for_method(const MethodSpec& m, const ExperimentConfig& cfg, const ExperimentAssets& assets,
                          std::size_t method_index, const SecretKey& key, std::span<const TokenId> tokens) {
  const std::size_t vocab = assets.model.vocab_size();
  switch (m.kind) {
    case MethodKind::kCReweight:
      return detect(tokens, key, assets.clusterings[method_index], {cfg.n, 0.5, cfg.dedup_detection}).p_value;
    case MethodKind::kDipReweight:
      return detect_green(tokens, key, vocab, cfg.n, 0.5, GreenTest::kBinomial, 0.5, cfg.dedup_detection).p_value;
    case MethodKind::kKgw:
      return detect_green(tokens, key, vocab, cfg.n, m.gamma, GreenTest::kZScore, 0.5, cfg.dedup_detection).p_value;
  }
  throw InternalLogicError("unknown method");
}

class ChannelApplier {
 public:
  ChannelApplier(const ChannelSpec& spec, const TokenEmbeddingTable& table) : spec_(spec), vocab_(table.vocab_size()) {
    if (spec.kind == ChannelKind::kRetokenize) sampler_.emplace(table, spec.beta);
  }
  TokenSequence operator()(const TokenSequence& seq, Rng& rng) const {
    switch (spec_.kind) {
      case ChannelKind::kIdentity: return seq;
      case ChannelKind::kRetokenize: return apply_retokenization(seq, *sampler_, spec_.p_flip, rng);
      case ChannelKind::kSubstitute: return apply_substitution_attack(seq, vocab_, spec_.rate, rng);
    }
    return seq;
  }

 private:
  ChannelSpec spec_;
  std::size_t vocab_;
  std::optional<ReplacementSampler> sampler_;
};

void set_jobs(int jobs) {
  if (jobs > 0) omp_set_num_threads(jobs);
}

ChannelRun run_channel(const ExperimentConfig& cfg, const ExperimentAssets& assets, const ChannelSpec& channel,
                       std::vector<double>& method_seconds) {
  const std::size_t nm = cfg.methods.size();
  const ChannelApplier apply(channel, assets.codebook.table);
  ChannelRun run;
  run.channel = channel;
  run.watermarked_p.assign(nm, std::vector<double>(cfg.trials, 1.0));
  run.null_p.assign(nm, std::vector<double>(cfg.include_null ? cfg.trials : 0, 1.0));
  std::vector<std::vector<double>> seconds(cfg.trials, std::vector<double>(nm, 0.0));
  std::exception_ptr error;

#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cfg.trials); ++i) {
    try {
      const auto trial = static_cast<std::uint64_t>(i);
      const auto key = SecretKey::from_seed(derive_seed(cfg.master_seed, kKeyStream, trial));
      for (std::size_t m = 0; m < nm; ++m) {
        const Timer timer;
        Rng gen_rng(derive_seed(cfg.master_seed, kGenStream, trial));
        const auto seq = generate_for_method(cfg.methods[m], cfg, assets, m, key, gen_rng);
        Rng ch_rng(derive_seed(cfg.master_seed, kChannelStream, trial));
        const auto attacked = apply(seq, ch_rng);
        run.watermarked_p[m][i] = p_value_for_method(cfg.methods[m], cfg, assets, m, key, attacked.tokens);
        seconds[i][m] += timer.seconds();
      }
      if (cfg.include_null) {
        Rng null_rng(derive_seed(cfg.master_seed, kNullStream, trial));
        GenerationConfig g{cfg.n, cfg.t, 0, false, AcceptanceDraw::kFreshRandom};
        const auto plain = generate_plain(assets.model, g, {}, null_rng);
        Rng ch_rng(derive_seed(cfg.master_seed, kNullChannelStream, trial));
        const auto attacked = apply(plain, ch_rng);
        for (std::size_t m = 0; m < nm; ++m)
          run.null_p[m][i] = p_value_for_method(cfg.methods[m], cfg, assets, m, key, attacked.tokens);
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  method_seconds.assign(nm, 0.0);
  for (const auto& row : seconds)
    for (std::size_t m = 0; m < nm; ++m) method_seconds[m] += row[m];
  return run;
}

ResultRow make_row(const std::string& method, const std::string& channel, const std::string& sample, double fpr,
                   const std::vector<double>& p_values, double seconds) {
  ResultRow r;
  r.method = method;
  r.channel = channel;
  r.sample = sample;
  r.fpr = fpr;
  r.trials = static_cast<std::uint32_t>(p_values.size());
  std::uint64_t hits = 0;
  double sum = 0.0;
  for (double p : p_values) {
    hits += p <= fpr ? 1 : 0;
    sum += p;
  }
  r.tpr = p_values.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(p_values.size());
  const auto ci = wilson_interval(hits, p_values.size());
  r.wilson_lo = ci.lo;
  r.wilson_hi = ci.hi;
  r.mean_p = p_values.empty() ? 0.0 : sum / static_cast<double>(p_values.size());
  r.wall_time_s = seconds;
  return r;
}

void tabulate(const ExperimentConfig& cfg, const ChannelRun& run, const std::vector<double>& seconds,
              ResultTable& table) {
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    const auto label = cfg.methods[m].label();
    for (double fpr : cfg.fprs) {
      table.rows.push_back(make_row(label, run.channel.label(), "watermarked", fpr, run.watermarked_p[m], seconds[m]));
      if (cfg.include_null)
        table.rows.push_back(make_row(label, run.channel.label(), "null", fpr, run.null_p[m], 0.0));
    }
  }
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case MethodKind::kCReweight: return "C-reweight(h=" + std::to_string(h) + ")";
    case MethodKind::kDipReweight: return "DiP-reweight(alpha=" + fmt_num(alpha) + ")";
    case MethodKind::kKgw: return "KGW(delta=" + fmt_num(delta) + ",gamma=" + fmt_num(gamma) + ")";
  }
  return "?";
}

void MethodSpec::validate(std::size_t vocab_size) const {
  switch (kind) {
    case MethodKind::kCReweight:
      if (h < 2) throw ConfigError("C-reweight needs h >= 2");
      if (h > vocab_size)
        throw ConfigError("C-reweight h = " + std::to_string(h) + " exceeds vocabulary size " +
                          std::to_string(vocab_size));
      break;
    case MethodKind::kDipReweight:
      if (!(alpha >= 0.0 && alpha <= 0.5)) throw ConfigError("DiP-reweight alpha must lie in [0, 0.5]");
      break;
    case MethodKind::kKgw:
      if (!(delta >= 0.0) || !std::isfinite(delta)) throw ConfigError("KGW delta must be nonnegative");
      if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("KGW gamma must lie in (0,1)");
      break;
  }
}

std::string ChannelSpec::label() const {
  switch (kind) {
    case ChannelKind::kIdentity: return "identity";
    case ChannelKind::kRetokenize: return "retokenize(p_flip=" + fmt_num(p_flip) + ",beta=" + fmt_num(beta) + ")";
    case ChannelKind::kSubstitute: return "substitute(rate=" + fmt_num(rate) + ")";
  }
  return "?";
}

void ChannelSpec::validate() const {
  if (!(p_flip >= 0.0 && p_flip <= 1.0)) throw ConfigError("channel p_flip must lie in [0,1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("channel beta must be nonnegative");
  if (!(rate >= 0.0 && rate <= 1.0)) throw ConfigError("channel rate must lie in [0,1]");
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw ConfigError("experiment needs at least one method");
  if (trials < 1) throw ConfigError("trial count must be >= 1");
  if (n < 1) throw ConfigError("n must be >= 1");
  if (t <= n) throw ConfigError("sequence length t must exceed n");
  if (fprs.empty()) throw ConfigError("fpr grid is empty");
  for (double f : fprs)
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("fpr levels must lie in (0,1)");
  if (codebook.vocab_size < 2) throw ConfigError("vocabulary must have at least 2 tokens");
  if (codebook.n_blobs < 1 || codebook.n_blobs > codebook.vocab_size) throw ConfigError("need 1 <= n_blobs <= N");
  if (!(model.dirichlet_alpha > 0.0)) throw ConfigError("model dirichlet_alpha must be positive");
  if (!(model.temperature > 0.0)) throw ConfigError("model temperature must be positive");
  for (const auto& m : methods) m.validate(codebook.vocab_size);
  channel.validate();
}

ExperimentAssets build_assets(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto& cb = cfg.codebook;
  ExperimentAssets assets{
      synthesize_codebook(cb.seed, cb.vocab_size, cb.dim, cb.n_blobs, cb.separation, cb.blob_std),
      sample_mock_model(cfg.model.seed, cb.vocab_size, cfg.model.order, cfg.model.dirichlet_alpha,
                        cfg.model.temperature),
      {}};
  for (const auto& m : cfg.methods) {
    if (m.kind == MethodKind::kCReweight)
      assets.clusterings.push_back(
          kmeans_cluster(assets.codebook.table, m.h, derive_seed(cb.seed, kKMeansStream, m.h), cfg.kmeans_iters));
    else
      assets.clusterings.emplace_back();
  }
  return assets;
}

ExperimentResult run_detectability_experiment(const ExperimentConfig& cfg) {
  return run_robustness_experiment(cfg, {cfg.channel});
}

ExperimentResult run_robustness_experiment(const ExperimentConfig& cfg, const std::vector<ChannelSpec>& channels) {
  if (channels.empty()) throw ConfigError("robustness sweep needs at least one channel");
  for (const auto& c : channels) c.validate();
  const auto assets = build_assets(cfg);
  set_jobs(cfg.jobs);
  ExperimentResult result;
  for (const auto& ch : channels) {
    std::vector<double> seconds;
    auto run = run_channel(cfg, assets, ch, seconds);
    tabulate(cfg, run, seconds, result.table);
    result.runs.push_back(std::move(run));
  }
  return result;
}

const ResultRow& ResultTable::find(const std::string& method, const std::string& channel, const std::string& sample,
                                   double fpr) const {
  for (const auto& r : rows)
    if (r.method == method && r.channel == channel && r.sample == sample && r.fpr == fpr) return r;
  throw InvalidArgument("no result row for " + method + " / " + channel + " / " + sample);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string rows_to_csv(const std::vector<ResultRow>& rows, bool timing) {
  std::ostringstream out;
  out.precision(10);
  out << "method,channel,sample,fpr,tpr,wilson_lo,wilson_hi,mean_p,trials";
  if (timing) out << ",wall_time_s";
  out << '\n';
  for (const auto& r : rows) {
    out << csv_field(r.method) << ',' << csv_field(r.channel) << ',' << r.sample << ',' << r.fpr << ',' << r.tpr << ','
        << r.wilson_lo << ',' << r.wilson_hi << ',' << r.mean_p << ',' << r.trials;
    if (timing) out << ',' << r.wall_time_s;
    out << '\n';
  }
  return out.str();
}

// Random partition of [0,n) into h non-empty clusters.
Clustering random_clustering(std::size_t n, std::uint32_t h, Rng& rng) {
  std::vector<TokenId> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<TokenId>(i);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  std::vector<std::uint32_t> assignment(n);
  for (std::size_t i = 0; i < n; ++i)
    assignment[order[i]] = i < h ? static_cast<std::uint32_t>(i) : static_cast<std::uint32_t>(uniform_below(rng, h));
  return Clustering(h, std::move(assignment));
}

double max_marginal_deviation(const ProbabilityVector& p, const Clustering& clustering, const ReweightLaw& law) {
  const std::uint32_t h = clustering.num_clusters();
  std::vector<double> mean(p.size(), 0.0);
  for (std::uint32_t i = 0; i < h; ++i) {
    const auto w = law(p, clustering, i);
    for (std::size_t x = 0; x < p.size(); ++x) mean[x] += w[x];
  }
  double dev = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) dev = std::max(dev, std::abs(mean[x] / h - p[x]));
  return dev;
}

}  // namespace

std::string ResultTable::to_csv() const { return rows_to_csv(rows, true); }
std::string ResultTable::to_csv_without_timing() const { return rows_to_csv(rows, false); }

DistortionCheckReport run_distortion_free_check(const DistortionCheckConfig& cfg, const ReweightLaw& law) {
  if (cfg.vocab_sizes.empty() || cfg.cluster_counts.empty()) throw ConfigError("distortion check needs sizes");
  Rng rng(cfg.seed);
  DistortionCheckReport rep;
  const auto record = [&](double dev) {
    rep.max_deviation = std::max(rep.max_deviation, dev);
    ++rep.cases;
  };
  for (std::uint32_t c = 0; c < cfg.num_distributions; ++c) {
    const std::size_t n = cfg.vocab_sizes[c % cfg.vocab_sizes.size()];
    const std::uint32_t h = cfg.cluster_counts[(c / cfg.vocab_sizes.size()) % cfg.cluster_counts.size()];
    if (h > n) continue;
    const auto clustering = random_clustering(n, h, rng);
    const ProbabilityVector p(sample_dirichlet(n, cfg.dirichlet_alpha, rng));
    record(max_marginal_deviation(p, clustering, law));
  }
  if (cfg.include_edge_cases) {
    for (auto n : cfg.vocab_sizes)
      for (auto h : cfg.cluster_counts) {
        if (h > n) continue;
        const auto clustering = random_clustering(n, h, rng);
        // Mass only on the first ceil(h/2) clusters; the rest carry zero mass.
        std::vector<double> zm(n, 0.0);
        double sum = 0.0;
        for (std::size_t x = 0; x < n; ++x)
          if (clustering.cluster_of(static_cast<TokenId>(x)) < (h + 1) / 2) {
            zm[x] = 0.05 + uniform01(rng);
            sum += zm[x];
          }
        for (auto& v : zm) v /= sum;
        record(max_marginal_deviation(ProbabilityVector(zm), clustering, law));
        ++rep.zero_mass_cases;

        std::vector<double> oh(n, 0.0);
        oh[uniform_below(rng, n)] = 1.0;
        const double dev = max_marginal_deviation(ProbabilityVector(oh), clustering, law);
        record(dev);
        rep.one_hot_max_deviation = std::max(rep.one_hot_max_deviation, dev);
        ++rep.one_hot_cases;
      }
  }
  rep.pass = rep.max_deviation <= cfg.tolerance;
  return rep;
}

CalibrationReport null_calibration(const CalibrationConfig& cfg) {
  if (cfg.trials < 1) throw ConfigError("calibration needs at least one trial");
  if (cfg.t <= cfg.n) throw ConfigError("sequence length t must exceed n");
  if (cfg.h < 2 || cfg.h > cfg.codebook.vocab_size) throw ConfigError("calibration needs 2 <= h <= N");
  const auto& cb = cfg.codebook;
  const auto codebook = synthesize_codebook(cb.seed, cb.vocab_size, cb.dim, cb.n_blobs, cb.separation, cb.blob_std);
  const auto model = sample_mock_model(cfg.model.seed, cb.vocab_size, cfg.model.order, cfg.model.dirichlet_alpha,
                                       cfg.model.temperature);
  const auto clustering = kmeans_cluster(codebook.table, cfg.h, derive_seed(cb.seed, kKMeansStream, cfg.h));
  set_jobs(cfg.jobs);

  CalibrationReport rep;
  rep.p_values.assign(cfg.trials, 1.0);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(cfg.trials); ++i) {
    try {
      const auto trial = static_cast<std::uint64_t>(i);
      const auto key = SecretKey::from_seed(derive_seed(cfg.master_seed, kKeyStream, trial));
      GenerationConfig g{cfg.n, cfg.t, cfg.h, true, AcceptanceDraw::kFreshRandom};
      Rng rng(derive_seed(cfg.master_seed, kNullStream, trial));
      TokenSequence seq;
      if (cfg.scrambled_key) {
        seq = generate_watermarked(model, g, clustering, key, {}, rng);
        const auto other = SecretKey::from_seed(derive_seed(cfg.master_seed, kScrambleStream, trial));
        rep.p_values[i] = detect(seq.tokens, other, clustering, {cfg.n, 0.5, false}).p_value;
      } else {
        seq = generate_plain(model, g, {}, rng);
        rep.p_values[i] = detect(seq.tokens, key, clustering, {cfg.n, 0.5, false}).p_value;
      }
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  rep.dominance = true;
  rep.max_dominance_excess = -1.0;
  const double trials = static_cast<double>(cfg.trials);
  for (double level : cfg.levels) {
    CalibrationLevel l;
    l.level = level;
    const auto hits = std::count_if(rep.p_values.begin(), rep.p_values.end(), [&](double p) { return p <= level; });
    l.empirical = static_cast<double>(hits) / trials;
    l.upper_3sigma = level + 3.0 * std::sqrt(level * (1.0 - level) / trials);
    l.within = l.empirical <= l.upper_3sigma;
    rep.dominance = rep.dominance && l.within;
    rep.max_dominance_excess = std::max(rep.max_dominance_excess, l.empirical - level);
    rep.levels.push_back(l);
  }
  rep.ks_distance = ks_uniform_distance(rep.p_values);
  return rep;
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, std::min(phat, center - half)), std::min(1.0, std::max(phat, center + half))};
}

McNemarResult mcnemar_exact(const std::vector<bool>& first, const std::vector<bool>& second) {
  if (first.size() != second.size()) throw InvalidArgument("mcnemar: paired samples differ in length");
  McNemarResult r;
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i] && !second[i]) ++r.only_first;
    if (!first[i] && second[i]) ++r.only_second;
  }
  const std::uint64_t discordant = r.only_first + r.only_second;
  if (discordant == 0) return r;
  const std::uint64_t larger = std::max(r.only_first, r.only_second);
  r.p_value = std::min(1.0, 2.0 * binomial_tail_p(discordant, larger, 0.5));
  return r;
}

double ks_uniform_distance(std::vector<double> sample) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double x = std::clamp(sample[i], 0.0, 1.0);
    d = std::max({d, static_cast<double>(i + 1) / n - x, x - static_cast<double>(i) / n});
  }
  return d;
}

std::string experiment_manifest(const ExperimentConfig& cfg, const std::vector<ChannelSpec>& channels) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  auto methods = nlohmann::ordered_json::array();
  for (const auto& m : cfg.methods)
    methods.push_back({{"kind", method_name(m.kind)},
                       {"label", m.label()},
                       {"h", m.h},
                       {"alpha", m.alpha},
                       {"delta", m.delta},
                       {"gamma", m.gamma}});
  j["methods"] = methods;
  j["trials"] = cfg.trials;
  j["t"] = cfg.t;
  j["n"] = cfg.n;
  j["codebook"] = {{"N", cfg.codebook.vocab_size},     {"d", cfg.codebook.dim},
                   {"n_blobs", cfg.codebook.n_blobs},  {"separation", cfg.codebook.separation},
                   {"blob_std", cfg.codebook.blob_std}, {"seed", cfg.codebook.seed}};
  j["model"] = {{"order", cfg.model.order},
                {"dirichlet_alpha", cfg.model.dirichlet_alpha},
                {"temperature", cfg.model.temperature},
                {"seed", cfg.model.seed}};
  auto chans = nlohmann::ordered_json::array();
  for (const auto& c : channels)
    chans.push_back({{"kind", channel_name(c.kind)}, {"p_flip", c.p_flip}, {"beta", c.beta}, {"rate", c.rate}});
  j["channels"] = chans;
  j["fprs"] = cfg.fprs;
  j["master_seed"] = cfg.master_seed;
  j["history_enabled"] = cfg.history_enabled;
  j["dedup_detection"] = cfg.dedup_detection;
  j["include_null"] = cfg.include_null;
  j["kmeans_iters"] = cfg.kmeans_iters;
  j["jobs"] = cfg.jobs;
  return j.dump(2);
}

}  // namespace creweight
