// creweight: cluster, keygen, generate, attack, detect, experiment.
#include <sys/stat.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "creweight/channel.hpp"
#include "creweight/codebook.hpp"
#include "creweight/config.hpp"
#include "creweight/detector.hpp"
#include "creweight/experiments.hpp"
#include "creweight/generator.hpp"
#include "creweight/sequence_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace creweight;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kKeyEnv = "CREWEIGHT_KEY";

enum ExitCode { kOk = 0, kFailure = 1, kIo = 2, kBadConfig = 3, kNoKey = 4 };

class MissingKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path manifest_path(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

struct KeyArgs {
  std::string key_file;
};

std::pair<SecretKey, std::string> resolve_key(const KeyArgs& args) {
  if (!args.key_file.empty()) return {SecretKey::from_file(args.key_file), "file:" + args.key_file};
  if (auto k = SecretKey::from_env(kKeyEnv)) return {*k, std::string("env:") + kKeyEnv};
  throw MissingKey(std::string("no key: pass --key-file or set ") + kKeyEnv);
}

struct ModelArgs {
  std::uint64_t seed = 2;
  std::uint32_t order = 1;
  double dirichlet_alpha = 1.0;
  double temperature = 1.0;
};

void add_model_flags(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model-seed", m.seed, "mock model seed");
  cmd->add_option("--order", m.order, "mock model Markov order");
  cmd->add_option("--dirichlet-alpha", m.dirichlet_alpha, "mock model Dirichlet concentration (> 0)");
  cmd->add_option("--temperature", m.temperature, "mock model temperature (> 0)");
}

// Flags given explicitly win over the config file, which wins over defaults.
void overlay_model(CLI::App* cmd, const SimConfig& file, ModelArgs& m) {
  if (!file.model) return;
  if (!cmd->count("--model-seed")) m.seed = file.model->seed;
  if (!cmd->count("--order")) m.order = file.model->order;
  if (!cmd->count("--dirichlet-alpha")) m.dirichlet_alpha = file.model->dirichlet_alpha;
  if (!cmd->count("--temperature")) m.temperature = file.model->temperature;
}

ojson model_json(const ModelArgs& m) {
  return {{"seed", m.seed}, {"order", m.order}, {"dirichlet_alpha", m.dirichlet_alpha}, {"temperature", m.temperature}};
}

std::vector<TokenId> parse_prompt(const std::string& s) {
  std::vector<TokenId> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(static_cast<TokenId>(std::stoul(tok)));
    } catch (const std::exception&) {
      throw ConfigError("--prompt: '" + tok + "' is not a token id");
    }
  }
  return out;
}

MethodSpec parse_method(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  MethodSpec m;
  if (kind == "creweight")
    m = MethodSpec::creweight(16);
  else if (kind == "dip")
    m = MethodSpec::dip(0.4);
  else if (kind == "kgw")
    m = MethodSpec::kgw(1.0);
  else
    throw ConfigError("--method: unknown method '" + kind + "' (creweight, dip, kgw)");
  if (colon == std::string::npos) return m;
  std::stringstream ss(spec.substr(colon + 1));
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--method: expected key=value, got '" + kv + "'");
    const std::string k = kv.substr(0, eq);
    double v = 0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw ConfigError("--method: bad value in '" + kv + "'");
    }
    if (k == "h")
      m.h = static_cast<std::uint32_t>(v);
    else if (k == "alpha")
      m.alpha = v;
    else if (k == "delta")
      m.delta = v;
    else if (k == "gamma")
      m.gamma = v;
    else
      throw ConfigError("--method: unknown parameter '" + k + "'");
  }
  return m;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  CodebookSpec spec;
  std::string out;
  std::string config;
};

int cmd_synth(const SynthArgs& a, CLI::App* cmd) {
  CodebookSpec spec = a.spec;
  if (!a.config.empty()) {
    const auto file = load_sim_config(a.config);
    if (file.codebook) {
      const auto& f = *file.codebook;
      if (!cmd->count("--N")) spec.vocab_size = f.vocab_size;
      if (!cmd->count("--d")) spec.dim = f.dim;
      if (!cmd->count("--n-blobs")) spec.n_blobs = f.n_blobs;
      if (!cmd->count("--separation")) spec.separation = f.separation;
      if (!cmd->count("--blob-std")) spec.blob_std = f.blob_std;
      if (!cmd->count("--seed")) spec.seed = f.seed;
    }
  }
  const auto cb = synthesize_codebook(spec.seed, spec.vocab_size, spec.dim, spec.n_blobs, spec.separation, spec.blob_std);
  save_embeddings(a.out, cb.table);
  ojson m = {{"command", "synth-codebook"},
             {"version", 1},
             {"N", spec.vocab_size},
             {"d", spec.dim},
             {"n_blobs", spec.n_blobs},
             {"separation", spec.separation},
             {"blob_std", spec.blob_std},
             {"seed", spec.seed},
             {"output", a.out}};
  write_text(manifest_path(a.out), m.dump(2));
  std::cout << "wrote " << spec.vocab_size << " x " << spec.dim << " embeddings to " << a.out << "\n";
  return kOk;
}

struct ClusterArgs {
  std::string embeddings;
  std::uint32_t h = 0;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;
  std::string out;
  std::string json_out;
};

int cmd_cluster(const ClusterArgs& a) {
  const auto table = load_embeddings_any(a.embeddings);
  if (a.h < 1 || a.h > table.vocab_size())
    throw ConfigError("--h must satisfy 1 <= h <= N (h = " + std::to_string(a.h) + ", N = " +
                      std::to_string(table.vocab_size()) + ")");
  const auto res = kmeans_fit(table, {a.h, a.seed, a.max_iters, a.tol});
  save_codebook(a.out, table, res.clustering);
  if (!a.json_out.empty()) write_text(a.json_out, clustering_to_json(res.clustering, &table));
  const auto sizes = res.clustering.cluster_sizes();
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  ojson m = {{"command", "cluster"}, {"version", 1},        {"embeddings", a.embeddings}, {"h", a.h},
             {"seed", a.seed},       {"max_iters", a.max_iters}, {"tol", a.tol},       {"output", a.out},
             {"iterations", res.iterations}, {"converged", res.converged}};
  write_text(manifest_path(a.out), m.dump(2));
  std::cout << "clusters: " << a.h << "  N: " << table.vocab_size() << "  sizes min/mean/max: " << *mn << "/"
            << static_cast<double>(table.vocab_size()) / a.h << "/" << *mx << "  iterations: " << res.iterations
            << (res.converged ? " (converged)" : " (max_iters reached)") << "\n";
  return kOk;
}

struct KeygenArgs {
  std::string out;
  bool force = false;
};

int cmd_keygen(const KeygenArgs& a) {
  if (fs::exists(a.out) && !a.force) throw ConfigError("'" + a.out + "' exists; pass --force to overwrite");
  const auto key = SecretKey::random();
  {
    std::ofstream out(a.out, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + a.out + "' for writing");
  }
  if (::chmod(a.out.c_str(), S_IRUSR | S_IWUSR) != 0) throw IoError("cannot set permissions on '" + a.out + "'");
  write_text(a.out, key.to_hex() + "\n");
  std::cout << "wrote key to " << a.out << " (fingerprint " << key.fingerprint() << ")\n";
  return kOk;
}

struct GenerateArgs {
  std::string clustering;
  KeyArgs key;
  std::uint32_t h = 0;
  std::uint32_t ngram = 1;
  std::uint32_t length = 1024;
  std::uint64_t seed = 0;
  std::string out;
  std::string prompt;
  std::string config;
  bool plain = false;
  bool no_history = false;
  bool deterministic_j = false;
  ModelArgs model;
};

int cmd_generate(GenerateArgs a, CLI::App* cmd) {
  if (!a.config.empty()) overlay_model(cmd, load_sim_config(a.config), a.model);
  const auto clustering = load_clustering(a.clustering);
  if (a.h != 0 && a.h != clustering.num_clusters())
    throw ConfigError("--h = " + std::to_string(a.h) + " but the clustering has h = " +
                      std::to_string(clustering.num_clusters()));
  const auto model = sample_mock_model(a.model.seed, clustering.vocab_size(), a.model.order, a.model.dirichlet_alpha,
                                       a.model.temperature);
  GenerationConfig cfg{a.ngram, a.length, clustering.num_clusters(), !a.no_history,
                       a.deterministic_j ? AcceptanceDraw::kFromCode : AcceptanceDraw::kFreshRandom};
  const auto prompt = parse_prompt(a.prompt);
  Rng rng(a.seed);
  TokenSequence seq;
  std::string key_source;
  if (a.plain) {
    seq = generate_plain(model, cfg, prompt, rng);
  } else {
    auto [key, source] = resolve_key(a.key);
    key_source = source;
    seq = generate_watermarked(model, cfg, clustering, key, prompt, rng);
  }
  save_sequence(a.out, seq);
  ojson m = {{"command", "generate"},
             {"version", 1},
             {"clustering", a.clustering},
             {"h", clustering.num_clusters()},
             {"ngram", a.ngram},
             {"length", a.length},
             {"seed", a.seed},
             {"prompt", prompt},
             {"watermarked", !a.plain},
             {"history", !a.no_history},
             {"deterministic_j", a.deterministic_j},
             {"model", model_json(a.model)},
             {"key_source", key_source},
             {"output", a.out}};
  write_text(manifest_path(a.out), m.dump(2));
  std::cout << "wrote " << seq.tokens.size() << " tokens to " << a.out << "\n";
  return kOk;
}

struct AttackArgs {
  std::string in;
  std::string out;
  std::string clustering;
  std::string kind = "retokenize";
  double p_flip = 0.1;
  double beta = 1.0;
  double rate = 0.1;
  std::uint64_t seed = 0;
  std::string config;
};

int cmd_attack(AttackArgs a, CLI::App* cmd) {
  if (!a.config.empty()) {
    const auto file = load_sim_config(a.config);
    if (file.channel) {
      const auto& c = *file.channel;
      if (!cmd->count("--kind")) a.kind = c.kind == ChannelKind::kSubstitute ? "substitute" : "retokenize";
      if (!cmd->count("--p-flip")) a.p_flip = c.p_flip;
      if (!cmd->count("--beta")) a.beta = c.beta;
      if (!cmd->count("--rate")) a.rate = c.rate;
    }
  }
  const auto seq = load_sequence(a.in);
  Rng rng(a.seed);
  TokenSequence out;
  std::size_t vocab = 0;
  if (a.kind == "retokenize") {
    if (!has_embeddings(a.clustering))
      throw ConfigError("'" + a.clustering + "' has no embedding section; the retokenization channel needs one");
    const auto table = load_embeddings(a.clustering);
    vocab = table.vocab_size();
    check_token_range(seq, vocab);
    if (!(a.p_flip >= 0.0 && a.p_flip <= 1.0)) throw ConfigError("--p-flip must lie in [0,1]");
    if (!(a.beta >= 0.0)) throw ConfigError("--beta must be >= 0");
    out = apply_retokenization(seq, table, {a.p_flip, a.beta}, rng);
  } else if (a.kind == "substitute") {
    vocab = load_clustering(a.clustering).vocab_size();
    check_token_range(seq, vocab);
    if (!(a.rate >= 0.0 && a.rate <= 1.0)) throw ConfigError("--rate must lie in [0,1]");
    out = apply_substitution_attack(seq, vocab, a.rate, rng);
  } else {
    throw ConfigError("--kind must be retokenize or substitute");
  }
  save_sequence(a.out, out);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) changed += seq.tokens[i] != out.tokens[i];
  ojson m = {{"command", "attack"}, {"version", 1},   {"input", a.in},   {"clustering", a.clustering},
             {"kind", a.kind},      {"p_flip", a.p_flip}, {"beta", a.beta}, {"rate", a.rate},
             {"seed", a.seed},      {"changed", changed}, {"output", a.out}};
  write_text(manifest_path(a.out), m.dump(2));
  std::cout << "changed " << changed << " of " << seq.tokens.size() << " tokens; wrote " << a.out << "\n";
  return kOk;
}

struct DetectArgs {
  std::string in;
  std::string clustering;
  KeyArgs key;
  std::uint32_t h = 0;
  std::uint32_t ngram = 1;
  double fpr = 0.01;
  bool dedup = false;
  bool flags = false;
  std::string out;
};

int cmd_detect(const DetectArgs& a) {
  const auto clustering = load_clustering(a.clustering);
  if (a.h != 0 && a.h != clustering.num_clusters())
    throw ConfigError("--h = " + std::to_string(a.h) + " but the clustering has h = " +
                      std::to_string(clustering.num_clusters()));
  if (!(a.fpr > 0.0 && a.fpr < 1.0)) throw ConfigError("--fpr must lie in (0,1)");
  auto [key, source] = resolve_key(a.key);
  const auto seq = load_sequence(a.in);
  const auto report = detect(seq.tokens, key, clustering, {a.ngram, a.fpr, a.dedup});
  auto j = ojson::parse(report_to_json(report, a.flags));
  j["manifest"] = {{"command", "detect"},   {"version", 1},      {"input", a.in},   {"clustering", a.clustering},
                   {"ngram", a.ngram},      {"fpr", a.fpr},      {"dedup", a.dedup}, {"key_source", source}};
  const auto text = j.dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  return kOk;
}

struct ExperimentArgs {
  std::string kind = "detectability";
  std::vector<std::string> methods;
  std::uint32_t trials = 500;
  std::uint32_t length = 1024;
  std::uint32_t ngram = 1;
  std::vector<double> fprs;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string format = "csv";
  std::string out;
  std::string config;
  bool dedup = false;
  ModelArgs model;
  std::uint32_t h = 16;
};

int cmd_experiment(ExperimentArgs a, CLI::App* cmd) {
  SimConfig file;
  if (!a.config.empty()) file = load_sim_config(a.config);
  overlay_model(cmd, file, a.model);
  ExperimentConfig cfg;
  if (file.codebook) cfg.codebook = *file.codebook;
  if (file.channel) cfg.channel = *file.channel;
  cfg.model = {a.model.order, a.model.dirichlet_alpha, a.model.temperature, a.model.seed};
  cfg.trials = a.trials;
  cfg.t = a.length;
  cfg.n = a.ngram;
  cfg.master_seed = a.seed;
  cfg.jobs = a.jobs;
  cfg.dedup_detection = a.dedup;
  if (!a.fprs.empty()) cfg.fprs = a.fprs;
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (const auto& m : a.methods) cfg.methods.push_back(parse_method(m));
  }
  if (a.format != "csv" && a.format != "json") throw ConfigError("--format must be csv or json");

  std::string body;
  ojson manifest;
  if (a.kind == "detectability" || a.kind == "robustness") {
    std::vector<ChannelSpec> channels = {cfg.channel};
    if (a.kind == "robustness" && !file.sweep.empty()) channels = file.sweep;
    cfg.validate();
    const auto res = run_robustness_experiment(cfg, channels);
    manifest = ojson::parse(experiment_manifest(cfg, channels));
    if (a.format == "csv") {
      body = res.table.to_csv();
    } else {
      auto rows = ojson::array();
      for (const auto& r : res.table.rows)
        rows.push_back({{"method", r.method},       {"channel", r.channel}, {"sample", r.sample},
                        {"fpr", r.fpr},             {"tpr", r.tpr},         {"wilson_lo", r.wilson_lo},
                        {"wilson_hi", r.wilson_hi}, {"mean_p", r.mean_p},   {"trials", r.trials},
                        {"wall_time_s", r.wall_time_s}});
      body = ojson{{"rows", rows}, {"manifest", manifest}}.dump(2) + "\n";
    }
  } else if (a.kind == "calibration") {
    CalibrationConfig c;
    c.trials = a.trials;
    c.t = a.length;
    c.h = a.h;
    c.n = a.ngram;
    c.codebook = cfg.codebook;
    c.model = cfg.model;
    c.master_seed = a.seed;
    c.jobs = a.jobs;
    const auto rep = null_calibration(c);
    manifest = {{"command", "experiment"}, {"kind", "calibration"}, {"trials", c.trials}, {"t", c.t},
                {"h", c.h},                {"n", c.n},              {"master_seed", c.master_seed},
                {"model", model_json(a.model)}};
    std::ostringstream ss;
    ss.precision(10);
    ss << "level,empirical_fpr,upper_3sigma,within\n";
    for (const auto& l : rep.levels) ss << l.level << ',' << l.empirical << ',' << l.upper_3sigma << ',' << l.within << '\n';
    ss << "# ks_distance=" << rep.ks_distance << " dominance=" << rep.dominance << '\n';
    body = ss.str();
  } else if (a.kind == "distortion") {
    DistortionCheckConfig c;
    c.seed = a.seed;
    const auto rep = run_distortion_free_check(c);
    manifest = {{"command", "experiment"}, {"kind", "distortion"}, {"seed", c.seed},
                {"num_distributions", c.num_distributions}};
    std::ostringstream ss;
    ss.precision(6);
    ss << "cases,max_deviation,one_hot_max_deviation,pass\n"
       << rep.cases << ',' << rep.max_deviation << ',' << rep.one_hot_max_deviation << ',' << rep.pass << '\n';
    body = ss.str();
  } else {
    throw ConfigError("--kind must be detectability, robustness, calibration or distortion");
  }
  if (a.out.empty()) {
    std::cout << body;
  } else {
    write_text(a.out, body);
    write_text(manifest_path(a.out), manifest.dump(2));
  }
  return kOk;
}

void print_error(const char* kind, const std::string& message) {
  std::cerr << ojson{{"error", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster-based distortion-free watermarking: clustering, generation, attacks, detection"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth-codebook", "Write a blob-structured synthetic embedding table");
  synth_cmd->add_option("--N", synth.spec.vocab_size, "vocabulary size");
  synth_cmd->add_option("--d", synth.spec.dim, "embedding dimension");
  synth_cmd->add_option("--n-blobs", synth.spec.n_blobs, "number of Gaussian blobs");
  synth_cmd->add_option("--separation", synth.spec.separation, "minimum blob-center distance");
  synth_cmd->add_option("--blob-std", synth.spec.blob_std, "per-coordinate blob std");
  synth_cmd->add_option("--seed", synth.spec.seed, "seed");
  synth_cmd->add_option("--config", synth.config, "versioned JSON config file");
  synth_cmd->add_option("--out", synth.out, "output container")->required();

  ClusterArgs cluster;
  auto* cluster_cmd = app.add_subcommand("cluster", "k-means cluster an embedding table");
  cluster_cmd->add_option("--embeddings", cluster.embeddings, "embedding container or .csv")->required();
  cluster_cmd->add_option("--h", cluster.h, "number of clusters")->required();
  cluster_cmd->add_option("--seed", cluster.seed, "k-means++ seed");
  cluster_cmd->add_option("--max-iters", cluster.max_iters, "Lloyd iteration cap");
  cluster_cmd->add_option("--tol", cluster.tol, "centroid-shift tolerance");
  cluster_cmd->add_option("--out", cluster.out, "output container (embeddings + assignment)")->required();
  cluster_cmd->add_option("--json", cluster.json_out, "also write a JSON export");

  KeygenArgs keygen;
  auto* keygen_cmd = app.add_subcommand("keygen", "Write a random 32-byte hex key to a 0600 file");
  keygen_cmd->add_option("--out", keygen.out, "key file")->required();
  keygen_cmd->add_flag("--force", keygen.force, "overwrite an existing file");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate a (watermarked) sequence from the mock model");
  gen_cmd->add_option("--clustering", gen.clustering, "codebook/clustering container")->required();
  gen_cmd->add_option("--key-file", gen.key.key_file, std::string("hex key file (or set ") + kKeyEnv + ")");
  gen_cmd->add_option("--h", gen.h, "expected cluster count; must match the clustering");
  gen_cmd->add_option("--ngram", gen.ngram, "context length n");
  gen_cmd->add_option("--length", gen.length, "tokens to generate");
  gen_cmd->add_option("--seed", gen.seed, "sampling seed");
  gen_cmd->add_option("--prompt", gen.prompt, "comma-separated prompt token ids");
  gen_cmd->add_option("--config", gen.config, "versioned JSON config file");
  gen_cmd->add_flag("--plain", gen.plain, "sample without a watermark");
  gen_cmd->add_flag("--no-history", gen.no_history, "disable the code history");
  gen_cmd->add_flag("--deterministic-j", gen.deterministic_j, "derive the acceptance draw from the code");
  add_model_flags(gen_cmd, gen.model);
  gen_cmd->add_option("--out", gen.out, "output sequence (.bin for binary)")->required();

  AttackArgs attack;
  auto* attack_cmd = app.add_subcommand("attack", "Apply a token-edit channel to a sequence file");
  attack_cmd->add_option("--in", attack.in, "input sequence")->required();
  attack_cmd->add_option("--out", attack.out, "output sequence")->required();
  attack_cmd->add_option("--clustering", attack.clustering, "codebook container (embeddings for retokenize)")
      ->required();
  attack_cmd->add_option("--kind", attack.kind, "retokenize or substitute");
  attack_cmd->add_option("--p-flip", attack.p_flip, "per-token perturbation probability");
  attack_cmd->add_option("--beta", attack.beta, "similarity temperature");
  attack_cmd->add_option("--rate", attack.rate, "substitution rate");
  attack_cmd->add_option("--seed", attack.seed, "channel seed");
  attack_cmd->add_option("--config", attack.config, "versioned JSON config file");

  DetectArgs det;
  auto* det_cmd = app.add_subcommand("detect", "Score a sequence and run the exact binomial test");
  det_cmd->add_option("--in", det.in, "sequence file")->required();
  det_cmd->add_option("--clustering", det.clustering, "codebook/clustering container")->required();
  det_cmd->add_option("--key-file", det.key.key_file, std::string("hex key file (or set ") + kKeyEnv + ")");
  det_cmd->add_option("--h", det.h, "expected cluster count; must match the clustering");
  det_cmd->add_option("--ngram", det.ngram, "context length n");
  det_cmd->add_option("--fpr", det.fpr, "false-positive rate for the decision");
  det_cmd->add_flag("--dedup", det.dedup, "score each distinct code once");
  det_cmd->add_flag("--flags", det.flags, "include per-position flags");
  det_cmd->add_option("--out", det.out, "write the report here instead of stdout");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a desk-scale evaluation");
  exp_cmd->add_option("--kind", exp.kind, "detectability, robustness, calibration or distortion");
  exp_cmd->add_option("--method", exp.methods, "creweight:h=16 | dip:alpha=0.4 | kgw:delta=1,gamma=0.5 (repeatable)");
  exp_cmd->add_option("--trials", exp.trials, "trial count");
  exp_cmd->add_option("--length", exp.length, "sequence length t");
  exp_cmd->add_option("--ngram", exp.ngram, "context length n");
  exp_cmd->add_option("--h", exp.h, "cluster count for calibration");
  exp_cmd->add_option("--fpr", exp.fprs, "FPR levels (repeatable)");
  exp_cmd->add_option("--seed", exp.seed, "master seed");
  exp_cmd->add_option("--jobs", exp.jobs, "worker threads (0 = all)");
  exp_cmd->add_option("--format", exp.format, "csv or json");
  exp_cmd->add_option("--out", exp.out, "output file (stdout when omitted)");
  exp_cmd->add_option("--config", exp.config, "versioned JSON config file");
  exp_cmd->add_flag("--dedup", exp.dedup, "score each distinct code once");
  add_model_flags(exp_cmd, exp.model);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("invalid-config", e.what());
    return kBadConfig;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, synth_cmd);
    if (*cluster_cmd) return cmd_cluster(cluster);
    if (*keygen_cmd) return cmd_keygen(keygen);
    if (*gen_cmd) return cmd_generate(gen, gen_cmd);
    if (*attack_cmd) return cmd_attack(attack, attack_cmd);
    if (*det_cmd) return cmd_detect(det);
    if (*exp_cmd) return cmd_experiment(exp, exp_cmd);
  } catch (const MissingKey& e) {
    print_error("missing-key", e.what());
    return kNoKey;
  } catch (const IoError& e) {
    print_error("io-error", e.what());
    return kIo;
  } catch (const ParseError& e) {
    print_error("parse-error", e.what());
    return kIo;
  } catch (const IntegrityError& e) {
    print_error("integrity-error", e.what());
    return kIo;
  } catch (const ConfigError& e) {
    print_error("invalid-config", e.what());
    return kBadConfig;
  } catch (const InvalidArgument& e) {
    print_error("invalid-config", e.what());
    return kBadConfig;
  } catch (const InvalidInput& e) {
    print_error("invalid-input", e.what());
    return kBadConfig;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kFailure;
  }
  return kOk;
}
