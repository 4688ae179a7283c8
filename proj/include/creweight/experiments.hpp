#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "creweight/channel.hpp"
#include "creweight/codebook.hpp"
#include "creweight/detector.hpp"
#include "creweight/watermark.hpp"

namespace creweight {

enum class MethodKind { kCReweight, kDipReweight, kKgw };

struct MethodSpec {
  MethodKind kind = MethodKind::kCReweight;
  std::uint32_t h = 16;  // C-reweight cluster count
  double alpha = 0.4;    // DiP-reweight
  double delta = 1.0;    // KGW boost
  double gamma = 0.5;    // KGW green fraction

  static MethodSpec creweight(std::uint32_t h) { return {MethodKind::kCReweight, h}; }
  static MethodSpec dip(double alpha) { return {MethodKind::kDipReweight, 16, alpha}; }
  static MethodSpec kgw(double delta, double gamma = 0.5) { return {MethodKind::kKgw, 16, 0.4, delta, gamma}; }

  std::string label() const;
  void validate(std::size_t vocab_size) const;
};

enum class ChannelKind { kIdentity, kRetokenize, kSubstitute };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::kIdentity;
  double p_flip = 0.0;  // retokenize
  double beta = 0.0;    // retokenize
  double rate = 0.0;    // substitute

  static ChannelSpec identity() { return {}; }
  static ChannelSpec retokenize(double p_flip, double beta) { return {ChannelKind::kRetokenize, p_flip, beta}; }
  static ChannelSpec substitute(double rate) { return {ChannelKind::kSubstitute, 0.0, 0.0, rate}; }

  std::string label() const;
  void validate() const;
};

struct CodebookSpec {
  std::size_t vocab_size = 1024;
  std::size_t dim = 8;
  std::size_t n_blobs = 16;
  double separation = 10.0;
  double blob_std = 1.0;
  std::uint64_t seed = 1;
};

struct ModelSpec {
  std::uint32_t order = 1;
  double dirichlet_alpha = 1.0;
  double temperature = 1.0;
  std::uint64_t seed = 2;
};

struct ExperimentConfig {
  std::vector<MethodSpec> methods = {MethodSpec::creweight(16)};
  std::uint32_t trials = 500;
  std::uint32_t t = 1024;
  std::uint32_t n = 1;
  CodebookSpec codebook;
  ModelSpec model;
  ChannelSpec channel;
  std::vector<double> fprs = {0.01, 0.001};
  std::uint64_t master_seed = 0;
  bool history_enabled = true;
  bool dedup_detection = false;
  bool include_null = true;
  int jobs = 0;  // 0 = OpenMP default
  int kmeans_iters = 100;

  void validate() const;
};

struct ResultRow {
  std::string method;
  std::string channel;
  std::string sample;  // "watermarked" or "null"
  double fpr = 0.0;
  double tpr = 0.0;    // detection rate; the empirical FPR on null rows
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double mean_p = 0.0;
  std::uint32_t trials = 0;
  double wall_time_s = 0.0;
};

struct ResultTable {
  std::vector<ResultRow> rows;

  const ResultRow& find(const std::string& method, const std::string& channel, const std::string& sample,
                        double fpr) const;
  std::string to_csv() const;
  /// Rows without wall time; equal across re-runs with the same seeds.
  std::string to_csv_without_timing() const;
};

/// Per-trial p-values kept for paired comparisons.
struct ChannelRun {
  ChannelSpec channel;
  std::vector<std::vector<double>> watermarked_p;  // [method][trial]
  std::vector<std::vector<double>> null_p;         // [method][trial]
};

struct ExperimentResult {
  ResultTable table;
  std::vector<ChannelRun> runs;
};

/// Everything a trial needs that is fixed across trials.
struct ExperimentAssets {
  SyntheticCodebook codebook;
  MockModel model;
  std::vector<Clustering> clusterings;  // one per method; empty for baselines
};
ExperimentAssets build_assets(const ExperimentConfig& cfg);

/// Watermarked and null sequences, pushed through cfg.channel, detected, and
/// tabulated at each FPR level using analytic thresholds.
ExperimentResult run_detectability_experiment(const ExperimentConfig& cfg);

/// Same as above for every channel in `channels`, sharing trial seeds so the
/// rows are paired across channels and methods.
ExperimentResult run_robustness_experiment(const ExperimentConfig& cfg, const std::vector<ChannelSpec>& channels);

// ---- distortion-freeness ---------------------------------------------------

/// P_W(. | cluster index) for a reweight rule under test.
using ReweightLaw =
    std::function<ProbabilityVector(const ProbabilityVector&, const Clustering&, std::uint32_t cluster_index)>;

struct DistortionCheckConfig {
  std::uint32_t num_distributions = 100;
  std::vector<std::size_t> vocab_sizes = {8, 16, 32, 64};
  std::vector<std::uint32_t> cluster_counts = {2, 4, 8};
  double dirichlet_alpha = 0.5;
  bool include_edge_cases = true;  // zero-mass clusters and one-hot laws
  double tolerance = 1e-12;
  std::uint64_t seed = 7;
};

struct DistortionCheckReport {
  double max_deviation = 0.0;
  std::uint32_t cases = 0;
  std::uint32_t zero_mass_cases = 0;
  std::uint32_t one_hot_cases = 0;
  double one_hot_max_deviation = 0.0;
  bool pass = false;
};

/// max over sampled laws p and clusterings of |(1/h) sum_i P_W(.|i) - p|.
DistortionCheckReport run_distortion_free_check(const DistortionCheckConfig& cfg,
                                                const ReweightLaw& law = creweight_distribution);

// ---- null calibration --------------------------------------------------------

struct CalibrationConfig {
  std::uint32_t trials = 10000;
  std::uint32_t t = 512;
  std::uint32_t h = 16;
  std::uint32_t n = 1;
  CodebookSpec codebook;
  ModelSpec model;
  std::vector<double> levels = {0.001, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5};
  bool scrambled_key = false;  // watermark with one key, detect with another
  std::uint64_t master_seed = 11;
  int jobs = 0;
};

struct CalibrationLevel {
  double level = 0.0;
  double empirical = 0.0;
  double upper_3sigma = 0.0;  // level + 3 sqrt(level (1 - level) / trials)
  bool within = false;
};

struct CalibrationReport {
  std::vector<double> p_values;
  std::vector<CalibrationLevel> levels;
  double ks_distance = 0.0;            // sup |F_n(x) - x|
  double max_dominance_excess = 0.0;   // max over levels of (empirical - level)
  bool dominance = false;              // every level within its 3-sigma bound
};

CalibrationReport null_calibration(const CalibrationConfig& cfg);

// ---- statistics helpers --------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};
/// Wilson score interval for successes/trials at ~95% (z = 1.96).
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct McNemarResult {
  std::uint64_t only_first = 0;   // first detected, second not
  std::uint64_t only_second = 0;  // second detected, first not
  double p_value = 1.0;           // exact two-sided
};
McNemarResult mcnemar_exact(const std::vector<bool>& first, const std::vector<bool>& second);

/// Kolmogorov-Smirnov distance of a sample from Uniform(0,1).
double ks_uniform_distance(std::vector<double> sample);

/// JSON manifest of a resolved experiment config.
std::string experiment_manifest(const ExperimentConfig& cfg, const std::vector<ChannelSpec>& channels);

}  // namespace creweight
