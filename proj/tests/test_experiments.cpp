#include <cmath>

#include "creweight/experiments.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace creweight;

namespace {

// Reweight with the acceptance test j < Pr(c) in place of j < h Pr(c).
ProbabilityVector corrupted_law(const ProbabilityVector& p, const Clustering& c, std::uint32_t idx) {
  const auto cd = cluster_probabilities(p, c);
  const double accept = std::min(1.0, cd[idx]);
  const std::uint32_t h = c.num_clusters();
  std::vector<double> over(h);
  double total = 0;
  for (std::uint32_t k = 0; k < h; ++k) total += over[k] = std::max(0.0, h * cd[k] - 1.0);
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    const auto k = c.cluster_of(static_cast<TokenId>(x));
    if (p[x] == 0.0) continue;
    double mass = k == idx ? accept : 0.0;
    if (total > 0) mass += (1 - accept) * over[k] / total;
    out[x] = mass * p[x] / cd[k];
  }
  return ProbabilityVector::unchecked(out);
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.methods = {MethodSpec::creweight(8), MethodSpec::dip(0.4), MethodSpec::kgw(1.0)};
  cfg.trials = 24;
  cfg.t = 64;
  cfg.codebook.vocab_size = 128;
  cfg.codebook.n_blobs = 8;
  cfg.fprs = {0.01};
  cfg.master_seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("distortion check passes for the cluster reweight") {
  DistortionCheckConfig cfg;
  cfg.cluster_counts = {4};
  const auto rep = run_distortion_free_check(cfg);
  CHECK(rep.pass);
  CHECK(rep.max_deviation <= 1e-12);
  CHECK(rep.one_hot_max_deviation == 0.0);
}

TEST_CASE("distortion check fails for the corrupted acceptance rule") {
  const auto rep = run_distortion_free_check({}, corrupted_law);
  CHECK_FALSE(rep.pass);
  CHECK(rep.max_deviation > 1e-3);
}

TEST_CASE("wilson interval") {
  // Closed form at 5/10, z = 1.96.
  const double z = 1.96, n = 10, ph = 0.5;
  const double center = (ph + z * z / (2 * n)) / (1 + z * z / n);
  const double half = z / (1 + z * z / n) * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n));
  const auto w = wilson_interval(5, 10, z);
  CHECK(w.lo == doctest::Approx(center - half));
  CHECK(w.hi == doctest::Approx(center + half));
  CHECK(wilson_interval(0, 10).lo == 0.0);
  CHECK(wilson_interval(10, 10).hi == doctest::Approx(1.0));
}

TEST_CASE("mcnemar exact") {
  std::vector<bool> a(30, false), b(30, false);
  for (int i = 0; i < 10; ++i) a[i] = true;
  const auto r = mcnemar_exact(a, b);
  CHECK(r.only_first == 10);
  CHECK(r.only_second == 0);
  CHECK(r.p_value == doctest::Approx(2.0 / 1024));
  CHECK(mcnemar_exact(a, a).p_value == 1.0);
  // 3 vs 1 discordant: two-sided 2 * P(X <= 1 | n=4) = 2 * 5/16.
  std::vector<bool> c{true, true, true, false}, d{false, false, false, true};
  CHECK(mcnemar_exact(c, d).p_value == doctest::Approx(10.0 / 16));
}

TEST_CASE("ks distance") {
  CHECK(ks_uniform_distance({0.5}) == doctest::Approx(0.5));
  CHECK(ks_uniform_distance({0.25, 0.75}) == doctest::Approx(0.25));
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  cfg.methods = {MethodSpec::creweight(500)};
  CHECK_THROWS_AS(run_detectability_experiment(cfg), ConfigError);
  cfg = small_config();
  cfg.methods = {MethodSpec::dip(0.7)};
  CHECK_THROWS_AS(run_detectability_experiment(cfg), ConfigError);
  CHECK_THROWS_AS(ChannelSpec::retokenize(1.5, 0).validate(), ConfigError);
}

TEST_CASE("experiment is deterministic and thread-count independent") {
  auto cfg = small_config();
  cfg.jobs = 1;
  const auto a = run_detectability_experiment(cfg);
  cfg.jobs = 3;
  const auto b = run_detectability_experiment(cfg);
  CHECK(a.table.to_csv_without_timing() == b.table.to_csv_without_timing());
  CHECK(a.runs[0].watermarked_p == b.runs[0].watermarked_p);
  const auto& row = a.table.find("C-reweight(h=8)", "identity", "watermarked", 0.01);
  CHECK(row.trials == 24);
  CHECK(row.wilson_lo <= row.tpr);
  CHECK(row.tpr <= row.wilson_hi);
}

TEST_CASE("identity robustness run reproduces the detectability run") {
  const auto cfg = small_config();
  const auto det = run_detectability_experiment(cfg);
  const auto rob = run_robustness_experiment(cfg, {ChannelSpec::retokenize(0.0, 5.0)});
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) CHECK(det.runs[0].watermarked_p[m] == rob.runs[0].watermarked_p[m]);
}

TEST_CASE("near one-hot model carries no signal for distortion-free methods") {
  auto cfg = small_config();
  cfg.methods = {MethodSpec::creweight(8), MethodSpec::dip(0.4)};
  cfg.model.temperature = 1e-9;
  cfg.trials = 200;
  cfg.dedup_detection = true;
  const auto res = run_detectability_experiment(cfg);
  for (const auto& m : cfg.methods) CHECK(res.table.find(m.label(), "identity", "watermarked", 0.01).tpr <= 0.05);
}

TEST_CASE("calibration with h=2 keeps P(p <= a) <= a on the grid") {
  CalibrationConfig cfg;
  cfg.trials = 2000;
  cfg.t = 512;
  cfg.h = 2;
  const auto rep = null_calibration(cfg);
  CHECK(rep.p_values.size() == 2000);
  CHECK(rep.dominance);
}

TEST_CASE("manifest carries the configuration but no key") {
  const auto cfg = small_config();
  const auto j = nlohmann::json::parse(experiment_manifest(cfg, {cfg.channel}));
  CHECK(j.contains("master_seed"));
  CHECK(j.dump().find("key\"") == std::string::npos);
}
