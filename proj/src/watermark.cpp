#include "creweight/watermark.hpp"

#include <sodium.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace creweight {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw InternalLogicError("libsodium failed to initialize");
}

constexpr std::string_view kCodeDomain = "creweight/code/v1";
constexpr std::string_view kUniformDomain = "creweight/j/v1";

// Keyed BLAKE2b-256 over (domain | n | context ids | counter).
std::array<std::uint8_t, 32> prf_block(const SecretKey& key, std::string_view domain, std::span<const TokenId> context,
                                       std::uint32_t counter) {
  ensure_sodium();
  crypto_generichash_state st;
  const auto k = key.prf_key();
  crypto_generichash_init(&st, k.data(), k.size(), 32);
  crypto_generichash_update(&st, reinterpret_cast<const unsigned char*>(domain.data()), domain.size());
  const auto put_u32 = [&st](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    crypto_generichash_update(&st, b, 4);
  };
  put_u32(static_cast<std::uint32_t>(context.size()));
  for (auto t : context) put_u32(t);
  put_u32(counter);
  std::array<std::uint8_t, 32> out{};
  crypto_generichash_final(&st, out.data(), out.size());
  return out;
}

std::uint64_t load_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

void check_sizes(const ProbabilityVector& p, const Clustering& clustering) {
  if (p.size() != clustering.vocab_size())
    throw InvalidArgument("probability vector has length " + std::to_string(p.size()) + " but the clustering covers " +
                          std::to_string(clustering.vocab_size()) + " tokens");
}

// Token from cluster c in proportion to p (second-stage sampling).
TokenId sample_within(const ProbabilityVector& p, std::span<const TokenId> members, double mass, Rng& rng) {
  if (!(mass > 0.0)) throw InternalLogicError("second-stage sampling from a zero-mass cluster");
  const double target = uniform01(rng) * mass;
  double acc = 0.0;
  TokenId last = members.front();
  bool any = false;
  for (auto t : members) {
    if (p[t] <= 0.0) continue;
    acc += p[t];
    last = t;
    any = true;
    if (target < acc) return t;
  }
  if (!any) throw InternalLogicError("second-stage sampling found no positive-mass token");
  return last;
}

std::vector<double> overflow_weights(const ClusterDistribution& cd, double& total) {
  const double h = static_cast<double>(cd.size());
  std::vector<double> w(cd.size());
  total = 0.0;
  for (std::size_t i = 0; i < cd.size(); ++i) {
    w[i] = std::max(0.0, h * cd[i] - 1.0);
    total += w[i];
  }
  return w;
}

}  // namespace

SecretKey::SecretKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.empty()) throw InvalidArgument("secret key is empty");
  if (bytes_.size() < kMinBytes)
    throw InvalidArgument("secret key must be at least " + std::to_string(kMinBytes) + " bytes");
  if (bytes_.size() <= crypto_generichash_KEYBYTES_MAX) {
    prf_key_ = bytes_;
  } else {
    ensure_sodium();
    prf_key_.resize(crypto_generichash_KEYBYTES);
    crypto_generichash(prf_key_.data(), prf_key_.size(), bytes_.data(), bytes_.size(), nullptr, 0);
  }
}

SecretKey SecretKey::from_hex(std::string_view hex) {
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.front()))) hex.remove_prefix(1);
  while (!hex.empty() && std::isspace(static_cast<unsigned char>(hex.back()))) hex.remove_suffix(1);
  if (hex.empty()) throw InvalidArgument("secret key is empty");
  if (hex.size() % 2) throw InvalidArgument("hex key has odd length");
  std::vector<std::uint8_t> bytes(hex.size() / 2);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InvalidArgument("hex key contains a non-hex character");
    bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return SecretKey(std::move(bytes));
}

SecretKey SecretKey::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read key file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_hex(text);
}

std::optional<SecretKey> SecretKey::from_env(const char* var) {
  const char* v = std::getenv(var);
  if (!v || !*v) return std::nullopt;
  return from_hex(v);
}

SecretKey SecretKey::random() {
  ensure_sodium();
  std::vector<std::uint8_t> bytes(32);
  randombytes_buf(bytes.data(), bytes.size());
  return SecretKey(std::move(bytes));
}

SecretKey SecretKey::from_seed(std::uint64_t seed) {
  std::vector<std::uint8_t> bytes(32);
  for (std::size_t w = 0; w < 4; ++w) {
    const std::uint64_t v = derive_seed(seed, 0x6b6579ULL, w);
    for (std::size_t b = 0; b < 8; ++b) bytes[w * 8 + b] = static_cast<std::uint8_t>(v >> (8 * b));
  }
  return SecretKey(std::move(bytes));
}

std::string SecretKey::to_hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes_.size() * 2);
  for (auto b : bytes_) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::string SecretKey::fingerprint() const {
  ensure_sodium();
  std::array<std::uint8_t, 8> fp{};
  const std::string_view tag = "creweight/fingerprint/v1";
  crypto_generichash(fp.data(), fp.size(), reinterpret_cast<const unsigned char*>(tag.data()), tag.size(),
                     prf_key_.data(), prf_key_.size());
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  for (auto b : fp) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::size_t CodeIdHash::operator()(const std::array<std::uint8_t, 16>& id) const noexcept {
  return static_cast<std::size_t>(load_u64(id.data()) ^ (load_u64(id.data() + 8) * 0x9e3779b97f4a7c15ULL));
}

WatermarkCode derive_code(const SecretKey& key, std::span<const TokenId> context, std::uint32_t h) {
  if (h == 0) throw InvalidArgument("derive_code: h must be >= 1");
  WatermarkCode code;
  auto block = prf_block(key, kCodeDomain, context, 0);
  std::copy_n(block.begin(), 16, code.code_id.begin());
  // Accept words below the largest multiple of h not exceeding 2^64.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % h + 1) % h;  // inclusive
  for (std::uint32_t counter = 1;; ++counter) {
    for (int w = 0; w < 2; ++w) {
      const std::uint64_t x = load_u64(block.data() + 16 + 8 * w);
      if (x <= limit) {
        code.cluster_index = static_cast<std::uint32_t>(x % h);
        return code;
      }
    }
    block = prf_block(key, kCodeDomain, context, counter);
  }
}

double derive_uniform(const SecretKey& key, std::span<const TokenId> context) {
  const auto block = prf_block(key, kUniformDomain, context, 0);
  return static_cast<double>(load_u64(block.data()) >> 11) * 0x1.0p-53;
}

std::uint64_t keyed_prf64(const SecretKey& key, std::string_view domain, std::span<const TokenId> context) {
  const auto block = prf_block(key, domain, context, 0);
  return load_u64(block.data());
}

ClusterDistribution cluster_probabilities(const ProbabilityVector& p, const Clustering& clustering) {
  check_sizes(p, clustering);
  std::vector<double> out(clustering.num_clusters(), 0.0);
  const auto& assignment = clustering.assignment();
  for (std::size_t t = 0; t < p.size(); ++t) out[assignment[t]] += p[t];
  return ClusterDistribution::unchecked(std::move(out));
}

ClusterDistribution overflow_distribution(const ClusterDistribution& cd) {
  double total = 0.0;
  auto w = overflow_weights(cd, total);
  if (!(total > 0.0)) throw InternalLogicError("overflow distribution consulted but no cluster overflows");
  for (auto& v : w) v /= total;
  return ClusterDistribution::unchecked(std::move(w));
}

double acceptance_probability(const ClusterDistribution& cd, std::uint32_t cluster_index) {
  if (cluster_index >= cd.size()) throw InvalidArgument("cluster index out of range");
  return std::min(1.0, static_cast<double>(cd.size()) * cd[cluster_index]);
}

TokenId creweight_sample(const ProbabilityVector& p, const Clustering& clustering, const WatermarkCode& code, Rng& rng,
                         std::optional<double> j_override) {
  if (code.cluster_index >= clustering.num_clusters())
    throw InvalidArgument("code selects cluster " + std::to_string(code.cluster_index) + " but h = " +
                          std::to_string(clustering.num_clusters()));
  const auto cd = cluster_probabilities(p, clustering);
  const double h = static_cast<double>(cd.size());
  const double j = j_override ? *j_override : uniform01(rng);
  std::uint32_t chosen = code.cluster_index;
  if (!(j < h * cd[chosen])) {
    double total = 0.0;
    const auto w = overflow_weights(cd, total);
    if (!(total > 0.0)) throw InternalLogicError("rejection with no overflowing cluster");
    chosen = static_cast<std::uint32_t>(sample_weighted(w, total, rng));
  }
  return sample_within(p, clustering.members(chosen), cd[chosen], rng);
}

namespace {

ProbabilityVector mix_cluster_laws(const ProbabilityVector& p, const Clustering& clustering,
                                   const ClusterDistribution& cd, std::uint32_t cluster_index, double accept,
                                   double reject) {
  // Final-cluster law given the code; each cluster then spreads its share in proportion to p.
  std::vector<double> cluster_mass(cd.size(), 0.0);
  cluster_mass[cluster_index] = accept;
  if (reject > 0.0) {
    double total = 0.0;
    const auto w = overflow_weights(cd, total);
    if (!(total > 0.0)) throw InternalLogicError("rejection with no overflowing cluster");
    for (std::size_t c = 0; c < cd.size(); ++c) cluster_mass[c] += reject * w[c] / total;
  }
  std::vector<double> out(p.size(), 0.0);
  const auto& assignment = clustering.assignment();
  for (std::size_t t = 0; t < p.size(); ++t) {
    const auto c = assignment[t];
    if (cluster_mass[c] > 0.0) {
      if (!(cd[c] > 0.0)) throw InternalLogicError("positive selection mass on a zero-mass cluster");
      out[t] = cluster_mass[c] * p[t] / cd[c];
    }
  }
  return ProbabilityVector::unchecked(std::move(out));
}

}  // namespace

ProbabilityVector creweight_distribution(const ProbabilityVector& p, const Clustering& clustering,
                                         std::uint32_t cluster_index) {
  if (cluster_index >= clustering.num_clusters())
    throw InvalidArgument("cluster index " + std::to_string(cluster_index) + " out of range");
  const auto cd = cluster_probabilities(p, clustering);
  const double h = static_cast<double>(cd.size());
  return mix_cluster_laws(p, clustering, cd, cluster_index, std::min(1.0, h * cd[cluster_index]),
                          std::max(0.0, 1.0 - h * cd[cluster_index]));
}

ProbabilityVector creweight_distribution_given_j(const ProbabilityVector& p, const Clustering& clustering,
                                                 std::uint32_t cluster_index, double j) {
  if (cluster_index >= clustering.num_clusters())
    throw InvalidArgument("cluster index " + std::to_string(cluster_index) + " out of range");
  const auto cd = cluster_probabilities(p, clustering);
  const bool accepted = j < static_cast<double>(cd.size()) * cd[cluster_index];
  return mix_cluster_laws(p, clustering, cd, cluster_index, accepted ? 1.0 : 0.0, accepted ? 0.0 : 1.0);
}

SelectionBreakdown selection_breakdown(const ClusterDistribution& cd) {
  const double h = static_cast<double>(cd.size());
  SelectionBreakdown b;
  b.accepted.resize(cd.size());
  b.inflow.assign(cd.size(), 0.0);
  for (std::size_t c = 0; c < cd.size(); ++c) {
    b.accepted[c] = std::min(1.0, h * cd[c]) / h;
    b.rejected += std::max(0.0, 1.0 - h * cd[c]) / h;
  }
  double total = 0.0;
  const auto w = overflow_weights(cd, total);
  if (b.rejected > 0.0) {
    if (!(total > 0.0)) throw InternalLogicError("rejected mass with no overflowing cluster");
    for (std::size_t c = 0; c < cd.size(); ++c) b.inflow[c] = b.rejected * w[c] / total;
  }
  return b;
}

TokenId sample_token(const ProbabilityVector& p, Rng& rng) {
  double total = 0.0;
  for (double v : p.probs()) total += v;
  return static_cast<TokenId>(sample_weighted(p.probs(), total, rng));
}

}  // namespace creweight
