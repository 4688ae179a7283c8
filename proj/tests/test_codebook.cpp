#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "creweight/channel.hpp"
#include "creweight/codebook.hpp"
#include "doctest.h"

using namespace creweight;
namespace fs = std::filesystem;

namespace {

TokenEmbeddingTable four_points() {
  return TokenEmbeddingTable(4, 2, {0.0f, 0.0f, 0.1f, 0.0f, 10.0f, 10.0f, 10.1f, 10.0f});
}

// Exhaustive search over all 2-partitions for the minimum within-cluster sum of squares.
std::vector<std::uint32_t> brute_force_two_partition(const TokenEmbeddingTable& t) {
  const std::size_t n = t.vocab_size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint32_t> best_assign;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    std::vector<std::uint32_t> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = (mask >> i) & 1u;
    const double ss = within_cluster_ss(t, Clustering(2, a));
    if (ss < best - 1e-12) {
      best = ss;
      best_assign = a;
    }
  }
  return best_assign;
}

bool same_partition(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return adjusted_rand_index(a, b) == doctest::Approx(1.0);
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("creweight_test_" + name); }

void write_raw_container(const fs::path& p, std::uint32_t h, const std::vector<std::uint32_t>& assign) {
  std::ofstream out(p, std::ios::binary);
  out.write("CRWBOOK\0", 8);
  auto put32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  const std::uint64_t n = assign.size();
  put32(1);
  put32(2);
  out.write(reinterpret_cast<const char*>(&n), 8);
  put32(0);
  put32(h);
  for (auto a : assign) put32(a);
}

}  // namespace

TEST_CASE("table validation") {
  CHECK_THROWS_AS(TokenEmbeddingTable(2, 2, {1.0f, 2.0f, 3.0f}), InvalidArgument);
  CHECK_THROWS_AS(TokenEmbeddingTable(1, 2, {1.0f, std::numeric_limits<float>::quiet_NaN()}), InvalidInput);
}

TEST_CASE("clustering invariants") {
  const Clustering c(2, {0, 1, 1, 0});
  CHECK(c.members(0).size() == 2);
  CHECK(c.members(0)[0] == 0);
  CHECK(c.members(0)[1] == 3);
  CHECK_THROWS_AS(Clustering(2, {0, 2}), IntegrityError);
  CHECK_THROWS_AS(Clustering(3, {0, 1, 1}), IntegrityError);
}

TEST_CASE("kmeans: h=1 puts everything in cluster 0") {
  const auto cb = synthesize_codebook(5, 50, 3, 4, 10.0, 1.0);
  const auto c = kmeans_cluster(cb.table, 1, 0);
  for (auto a : c.assignment()) CHECK(a == 0);
}

TEST_CASE("kmeans: four points split into the brute-force optimum") {
  const auto t = four_points();
  const auto oracle = brute_force_two_partition(t);
  const auto c = kmeans_cluster(t, 2, 0);
  CHECK(same_partition(c.assignment(), oracle));
  CHECK(c.cluster_of(0) == c.cluster_of(1));
  CHECK(c.cluster_of(2) == c.cluster_of(3));
  CHECK(c.cluster_of(0) != c.cluster_of(2));
}

TEST_CASE("kmeans: h=N gives singletons") {
  const auto cb = synthesize_codebook(9, 12, 2, 3, 5.0, 1.0);
  const auto c = kmeans_cluster(cb.table, 12, 1);
  for (auto s : c.cluster_sizes()) CHECK(s == 1);
}

TEST_CASE("kmeans: h > N is rejected") {
  CHECK_THROWS_AS(kmeans_cluster(four_points(), 5, 0), InvalidArgument);
  CHECK_THROWS_AS(kmeans_cluster(four_points(), 0, 0), InvalidArgument);
}

TEST_CASE("kmeans: duplicate rows still yield non-empty clusters") {
  const TokenEmbeddingTable t(6, 1, {1, 1, 1, 1, 1, 1});
  const auto c = kmeans_cluster(t, 3, 0);
  for (auto s : c.cluster_sizes()) CHECK(s >= 1);
}

TEST_CASE("kmeans: parallel matches serial reference") {
  const auto cb = synthesize_codebook(3, 600, 6, 12, 4.0, 1.0);
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const KMeansOptions opts{12, seed, 50, 1e-8};
    const auto a = kmeans_fit(cb.table, opts);
    const auto b = kmeans_fit_serial(cb.table, opts);
    CHECK(a.clustering == b.clustering);
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("kmeans: inertia is non-increasing") {
  const auto cb = synthesize_codebook(4, 400, 4, 8, 3.0, 1.0);
  const auto r = kmeans_fit(cb.table, {8, 7, 100, 0.0});
  for (std::size_t i = 1; i < r.inertia.size(); ++i) CHECK(r.inertia[i] <= r.inertia[i - 1] + 1e-9);
}

TEST_CASE("nearest_token") {
  const auto t = four_points();
  const std::vector<double> q2{10.0, 10.0};
  CHECK(nearest_token(t, q2) == 2);
  const TokenEmbeddingTable tie(8, 1, {9, 9, 9, 4, 9, 9, 9, 6});
  const std::vector<double> q5{5.0};
  CHECK(nearest_token(tie, q5) == 3);

  // Exhaustive scan oracle for the (5,5) query.
  const std::vector<double> q{5.0, 5.0};
  double best = std::numeric_limits<double>::infinity();
  TokenId arg = 0;
  for (TokenId i = 0; i < 4; ++i) {
    double d = 0;
    for (int k = 0; k < 2; ++k) d += (t.row(i)[k] - q[k]) * (t.row(i)[k] - q[k]);
    if (d < best) best = d, arg = i;
  }
  CHECK(nearest_token(t, q) == arg);
  CHECK(arg == 1);  // (0.1,0) is at squared distance 49.01, the rest at 50 or more

  const std::vector<double> bad{1.0};
  CHECK_THROWS_AS(nearest_token(t, bad), InvalidArgument);
}

TEST_CASE("adjusted rand index") {
  const std::vector<std::uint32_t> a{0, 0, 1, 1, 2, 2};
  const std::vector<std::uint32_t> relabeled{2, 2, 0, 0, 1, 1};
  CHECK(adjusted_rand_index(a, relabeled) == doctest::Approx(1.0));
  // Hand-computed contingency: ARI of {0,0,1,1} vs {0,1,0,1} is -0.5.
  const std::vector<std::uint32_t> x{0, 0, 1, 1}, y{0, 1, 0, 1};
  CHECK(adjusted_rand_index(x, y) == doctest::Approx(-0.5));
}

TEST_CASE("codebook io round trip") {
  const auto t = four_points();
  const auto c = kmeans_cluster(t, 2, 0);
  const auto p = temp_path("rt.crwb");
  save_codebook(p, t, c);
  CHECK(load_clustering(p) == c);
  CHECK(load_embeddings(p) == t);
  CHECK(has_embeddings(p));
  save_clustering(p, c);
  CHECK(load_clustering(p) == c);
  CHECK_FALSE(has_embeddings(p));
  CHECK_THROWS_AS(load_embeddings(p), ParseError);
  fs::remove(p);
}

TEST_CASE("codebook io integrity failures") {
  const auto p = temp_path("bad.crwb");
  write_raw_container(p, 2, {0, 2, 1});
  CHECK_THROWS_AS(load_clustering(p), IntegrityError);
  write_raw_container(p, 3, {0, 0, 1});
  CHECK_THROWS_AS(load_clustering(p), IntegrityError);
  {
    std::ofstream out(p, std::ios::binary);
    out << "NOTABOOK";
  }
  try {
    load_clustering(p);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("magic") != std::string::npos);
  }
  write_raw_container(p, 2, {0, 1});
  {
    std::ofstream out(p, std::ios::binary | std::ios::app);
    out << 'x';
  }
  CHECK_THROWS_AS(load_clustering(p), ParseError);
  fs::resize_file(p, 30);
  try {
    load_clustering(p);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("h") != std::string::npos);
  }
  CHECK_THROWS_AS(load_clustering(temp_path("does_not_exist")), IoError);
  fs::remove(p);
}

TEST_CASE("csv embeddings") {
  const auto p = temp_path("emb.csv");
  {
    std::ofstream out(p);
    out << "0,0\n0.1,0\n10,10\n10.1,10\n";
  }
  CHECK(load_embeddings_any(p) == four_points());
  {
    std::ofstream out(p);
    out << "0,0\n0.1\n";
  }
  CHECK_THROWS_AS(load_embeddings_any(p), ParseError);
  fs::remove(p);
}
