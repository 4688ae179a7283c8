#include "creweight/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "creweight/random.hpp"

namespace creweight {

TokenEmbeddingTable::TokenEmbeddingTable(std::size_t vocab_size, std::size_t dim, std::vector<float> values)
    : vocab_size_(vocab_size), dim_(dim), values_(std::move(values)) {
  if (vocab_size_ == 0 || dim_ == 0) throw InvalidArgument("embedding table needs N >= 1 and d >= 1");
  if (values_.size() != vocab_size_ * dim_)
    throw InvalidArgument("embedding table has " + std::to_string(values_.size()) + " values, expected N*d = " +
                          std::to_string(vocab_size_ * dim_));
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i]))
      throw InvalidInput("non-finite embedding at token " + std::to_string(i / dim_));
}

Clustering::Clustering(std::uint32_t num_clusters, std::vector<std::uint32_t> assignment)
    : h_(num_clusters), assignment_(std::move(assignment)) {
  if (h_ == 0) throw IntegrityError("clustering needs h >= 1");
  if (assignment_.empty()) throw IntegrityError("clustering covers no tokens");
  if (h_ > assignment_.size())
    throw IntegrityError("h = " + std::to_string(h_) + " exceeds vocabulary size " +
                         std::to_string(assignment_.size()));
  members_.assign(h_, {});
  for (std::size_t t = 0; t < assignment_.size(); ++t) {
    if (assignment_[t] >= h_)
      throw IntegrityError("token " + std::to_string(t) + " assigned to cluster " + std::to_string(assignment_[t]) +
                           " outside [0," + std::to_string(h_) + ")");
    members_[assignment_[t]].push_back(static_cast<TokenId>(t));
  }
  for (std::uint32_t c = 0; c < h_; ++c)
    if (members_[c].empty()) throw IntegrityError("cluster " + std::to_string(c) + " is empty");
}

std::vector<std::size_t> Clustering::cluster_sizes() const {
  std::vector<std::size_t> out(h_);
  for (std::uint32_t c = 0; c < h_; ++c) out[c] = members_[c].size();
  return out;
}

namespace {

double sq_dist(std::span<const float> x, const double* c, std::size_t d) {
  double s = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = static_cast<double>(x[k]) - c[k];
    s += diff * diff;
  }
  return s;
}

// Nearest centroid for every row; ties to the lowest cluster id.
template <bool Parallel>
void assign_points(const TokenEmbeddingTable& table, const std::vector<double>& centroids, std::uint32_t h,
                   std::vector<std::uint32_t>& labels, std::vector<double>& dist) {
  const std::size_t n = table.vocab_size();
  const std::size_t d = table.dim();
  const auto body = [&](std::int64_t i) {
    const auto row = table.row(static_cast<TokenId>(i));
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t arg = 0;
    for (std::uint32_t c = 0; c < h; ++c) {
      const double dd = sq_dist(row, centroids.data() + std::size_t{c} * d, d);
      if (dd < best) {
        best = dd;
        arg = c;
      }
    }
    labels[i] = arg;
    dist[i] = best;
  };
  if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) body(i);
  } else {
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) body(i);
  }
}

std::vector<double> kmeanspp_init(const TokenEmbeddingTable& table, std::uint32_t h, Rng& rng) {
  const std::size_t n = table.vocab_size();
  const std::size_t d = table.dim();
  std::vector<double> centroids(std::size_t{h} * d);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<char> chosen(n, 0);
  const auto local_trials = 2 + static_cast<std::uint32_t>(std::log(static_cast<double>(h)));

  auto place = [&](std::uint32_t c, std::size_t idx) {
    chosen[idx] = 1;
    const auto row = table.row(static_cast<TokenId>(idx));
    for (std::size_t k = 0; k < d; ++k) centroids[c * d + k] = row[k];
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], sq_dist(table.row(static_cast<TokenId>(i)), &centroids[c * d], d));
  };

  place(0, uniform_below(rng, n));
  for (std::uint32_t c = 1; c < h; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t idx;
    if (total > 0.0) {
      // Greedy seeding: several D^2 draws, keep the one that lowers the potential most.
      idx = n;
      double best = std::numeric_limits<double>::infinity();
      for (std::uint32_t trial = 0; trial < local_trials; ++trial) {
        const std::size_t cand = sample_weighted(d2, total, rng);
        const auto crow = table.row(static_cast<TokenId>(cand));
        double potential = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto row = table.row(static_cast<TokenId>(i));
          double s = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double diff = static_cast<double>(row[k]) - crow[k];
            s += diff * diff;
          }
          potential += std::min(d2[i], s);
        }
        if (potential < best) best = potential, idx = cand;
      }
    } else {
      // Remaining points coincide with chosen centroids; pick an unused index.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i)
        if (!chosen[i]) free.push_back(i);
      idx = free[uniform_below(rng, free.size())];
    }
    place(c, idx);
  }
  return centroids;
}

template <bool Parallel>
KMeansResult kmeans_single(const TokenEmbeddingTable& table, const KMeansOptions& opts, std::uint64_t seed) {
  const std::size_t n = table.vocab_size();
  const std::size_t d = table.dim();
  const std::uint32_t h = opts.num_clusters;
  if (n == 0) throw InvalidArgument("kmeans: empty embedding table");
  if (h == 0) throw InvalidArgument("kmeans: h must be >= 1");
  if (h > n)
    throw InvalidArgument("kmeans: h = " + std::to_string(h) + " exceeds vocabulary size N = " + std::to_string(n));
  if (opts.max_iters < 1) throw InvalidArgument("kmeans: max_iters must be >= 1");
  if (!(opts.tol >= 0.0)) throw InvalidArgument("kmeans: tol must be nonnegative");
  if (opts.n_init < 1) throw InvalidArgument("kmeans: n_init must be >= 1");

  Rng rng(seed);
  KMeansResult res;
  res.centroids = kmeanspp_init(table, h, rng);

  std::vector<std::uint32_t> labels(n);
  std::vector<double> dist(n);
  std::vector<std::size_t> counts(h);
  std::vector<double> sums(std::size_t{h} * d);

  for (int it = 0; it < opts.max_iters; ++it) {
    assign_points<Parallel>(table, res.centroids, h, labels, dist);

    // Repair empty clusters with the point farthest from its centroid, taken
    // from a cluster that can spare it.
    std::fill(counts.begin(), counts.end(), 0);
    for (auto l : labels) ++counts[l];
    for (std::uint32_t c = 0; c < h; ++c) {
      if (counts[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[labels[i]] <= 1) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      --counts[labels[far]];
      labels[far] = c;
      dist[far] = 0.0;
      counts[c] = 1;
      const auto row = table.row(static_cast<TokenId>(far));
      for (std::size_t k = 0; k < d; ++k) res.centroids[c * d + k] = row[k];
    }

    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = table.row(static_cast<TokenId>(i));
      for (std::size_t k = 0; k < d; ++k) sums[labels[i] * d + k] += row[k];
    }
    double max_shift = 0.0;
    for (std::uint32_t c = 0; c < h; ++c) {
      double shift = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double next = sums[c * d + k] / static_cast<double>(counts[c]);
        const double diff = next - res.centroids[c * d + k];
        shift += diff * diff;
        res.centroids[c * d + k] = next;
      }
      max_shift = std::max(max_shift, std::sqrt(shift));
    }

    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      inertia += sq_dist(table.row(static_cast<TokenId>(i)), &res.centroids[labels[i] * d], d);
    res.inertia.push_back(inertia);
    res.iterations = it + 1;
    if (max_shift < opts.tol) {
      res.converged = true;
      break;
    }
  }
  res.clustering = Clustering(h, std::move(labels));
  return res;
}

// Independent k-means++ restarts; the lowest final inertia wins, earliest on ties.
template <bool Parallel>
KMeansResult kmeans_impl(const TokenEmbeddingTable& table, const KMeansOptions& opts) {
  KMeansResult best = kmeans_single<Parallel>(table, opts, derive_seed(opts.seed, 0));
  for (int r = 1; r < opts.n_init; ++r) {
    auto next = kmeans_single<Parallel>(table, opts, derive_seed(opts.seed, static_cast<std::uint64_t>(r)));
    if (next.inertia.back() < best.inertia.back()) best = std::move(next);
  }
  return best;
}

}  // namespace

KMeansResult kmeans_fit(const TokenEmbeddingTable& table, const KMeansOptions& opts) {
  return kmeans_impl<true>(table, opts);
}

KMeansResult kmeans_fit_serial(const TokenEmbeddingTable& table, const KMeansOptions& opts) {
  return kmeans_impl<false>(table, opts);
}

Clustering kmeans_cluster(const TokenEmbeddingTable& table, std::uint32_t h, std::uint64_t seed, int max_iters,
                          double tol) {
  return kmeans_fit(table, {h, seed, max_iters, tol}).clustering;
}

double within_cluster_ss(const TokenEmbeddingTable& table, const Clustering& clustering) {
  const std::size_t d = table.dim();
  double total = 0.0;
  std::vector<double> mean(d);
  for (std::uint32_t c = 0; c < clustering.num_clusters(); ++c) {
    const auto members = clustering.members(c);
    std::fill(mean.begin(), mean.end(), 0.0);
    for (auto t : members)
      for (std::size_t k = 0; k < d; ++k) mean[k] += table.row(t)[k];
    for (auto& m : mean) m /= static_cast<double>(members.size());
    for (auto t : members) total += sq_dist(table.row(t), mean.data(), d);
  }
  return total;
}

TokenId nearest_token(const TokenEmbeddingTable& table, std::span<const double> query) {
  if (query.size() != table.dim())
    throw InvalidArgument("nearest_token: query has dimension " + std::to_string(query.size()) + ", table has " +
                          std::to_string(table.dim()));
  double best = std::numeric_limits<double>::infinity();
  TokenId arg = 0;
  for (std::size_t t = 0; t < table.vocab_size(); ++t) {
    const double dd = sq_dist(table.row(static_cast<TokenId>(t)), query.data(), query.size());
    if (dd < best) {
      best = dd;
      arg = static_cast<TokenId>(t);
    }
  }
  return arg;
}

double adjusted_rand_index(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw InvalidArgument("adjusted_rand_index: labelings differ in length");
  const double n = static_cast<double>(a.size());
  auto comb2 = [](double x) { return x * (x - 1.0) / 2.0; };
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  std::map<std::uint32_t, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  double index = 0, sa = 0, sb = 0;
  for (const auto& [k, v] : joint) index += comb2(v);
  for (const auto& [k, v] : ra) sa += comb2(v);
  for (const auto& [k, v] : rb) sb += comb2(v);
  const double expected = sa * sb / comb2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace creweight
