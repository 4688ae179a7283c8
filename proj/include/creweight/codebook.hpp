#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "creweight/types.hpp"

namespace creweight {

/// Token id -> embedding vector. Rows are stored as 32-bit floats so the
/// on-disk container round-trips bit-exactly; distances are computed in double.
class TokenEmbeddingTable {
 public:
  TokenEmbeddingTable() = default;
  /// `values` is row-major, vocab_size * dim entries. Throws InvalidArgument on
  /// shape errors and InvalidInput on non-finite entries.
  TokenEmbeddingTable(std::size_t vocab_size, std::size_t dim, std::vector<float> values);

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> row(TokenId t) const { return {values_.data() + std::size_t{t} * dim_, dim_}; }
  std::span<const float> values() const noexcept { return values_; }

  friend bool operator==(const TokenEmbeddingTable&, const TokenEmbeddingTable&) = default;

 private:
  std::size_t vocab_size_ = 0;
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

/// Partition of [0, N) into h non-empty clusters, with both lookup directions.
class Clustering {
 public:
  Clustering() = default;
  /// Builds member lists from `assignment`. Throws IntegrityError when an id is
  /// out of range or a cluster ends up empty.
  Clustering(std::uint32_t num_clusters, std::vector<std::uint32_t> assignment);

  std::uint32_t num_clusters() const noexcept { return h_; }
  std::size_t vocab_size() const noexcept { return assignment_.size(); }
  std::uint32_t cluster_of(TokenId t) const { return assignment_[t]; }
  std::span<const TokenId> members(std::uint32_t c) const { return members_[c]; }
  const std::vector<std::uint32_t>& assignment() const noexcept { return assignment_; }
  std::vector<std::size_t> cluster_sizes() const;

  friend bool operator==(const Clustering& a, const Clustering& b) {
    return a.h_ == b.h_ && a.assignment_ == b.assignment_;
  }

 private:
  std::uint32_t h_ = 0;
  std::vector<std::uint32_t> assignment_;
  std::vector<std::vector<TokenId>> members_;
};

struct KMeansOptions {
  std::uint32_t num_clusters = 16;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;
  int n_init = 8;  // k-means++ restarts
};

struct KMeansResult {
  Clustering clustering;
  std::vector<double> centroids;  // h * d, row-major
  std::vector<double> inertia;    // within-cluster sum of squares after each iteration
  int iterations = 0;
  bool converged = false;
};

/// Lloyd's k-means with k-means++ seeding. The assignment step runs under
/// OpenMP; the result does not depend on the thread count.
KMeansResult kmeans_fit(const TokenEmbeddingTable& table, const KMeansOptions& opts);
/// Same algorithm with a single-threaded assignment step. Reference for tests
/// and the benchmark.
KMeansResult kmeans_fit_serial(const TokenEmbeddingTable& table, const KMeansOptions& opts);

Clustering kmeans_cluster(const TokenEmbeddingTable& table, std::uint32_t h, std::uint64_t seed,
                          int max_iters = 100, double tol = 1e-6);

/// Within-cluster sum of squared distances to the cluster means.
double within_cluster_ss(const TokenEmbeddingTable& table, const Clustering& clustering);

/// Token minimizing Euclidean distance to `query`; ties go to the lowest id.
TokenId nearest_token(const TokenEmbeddingTable& table, std::span<const double> query);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

// Binary container, little-endian:
//   magic "CRWBOOK\0" | u32 version | u32 flags | u64 N | u32 d | u32 h
//   [flags & 1] N*d float32 embeddings, row-major
//   [flags & 2] N uint32 cluster ids
// Layout details in docs/formats.md.
inline constexpr std::uint32_t kCodebookVersion = 1;

void save_embeddings(const std::filesystem::path& path, const TokenEmbeddingTable& table);
TokenEmbeddingTable load_embeddings(const std::filesystem::path& path);
void save_clustering(const std::filesystem::path& path, const Clustering& clustering);
Clustering load_clustering(const std::filesystem::path& path);
/// Writes both sections into one container.
void save_codebook(const std::filesystem::path& path, const TokenEmbeddingTable& table,
                   const Clustering& clustering);
/// True when the container at `path` has an embedding section.
bool has_embeddings(const std::filesystem::path& path);

/// Loads embeddings from a container or, for *.csv, one row of floats per line.
TokenEmbeddingTable load_embeddings_any(const std::filesystem::path& path);

/// JSON export for inspection: {"version","N","d","h","sizes","assignment"[,"embeddings"]}.
std::string clustering_to_json(const Clustering& clustering, const TokenEmbeddingTable* table = nullptr);

}  // namespace creweight
