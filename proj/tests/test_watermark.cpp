#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <set>

#include "creweight/channel.hpp"
#include "creweight/watermark.hpp"
#include "doctest.h"

using namespace creweight;

namespace {

const Clustering& two_pairs() {
  static const Clustering c(2, {0, 0, 1, 1});
  return c;
}

const ProbabilityVector& p4() {
  static const ProbabilityVector p({0.4, 0.2, 0.3, 0.1});
  return p;
}

void check_close(const ProbabilityVector& got, const std::vector<double>& want, double tol = 1e-12) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got[i] - want[i]) <= tol);
}


SecretKey key_a() { return SecretKey::from_seed(1); }

}  // namespace

TEST_CASE("secret key") {
  CHECK_THROWS_AS(SecretKey(std::vector<std::uint8_t>{}), InvalidArgument);
  CHECK_THROWS_AS(SecretKey(std::vector<std::uint8_t>(15, 1)), InvalidArgument);
  const auto k = SecretKey::random();
  CHECK(SecretKey::from_hex(k.to_hex()).to_hex() == k.to_hex());
  CHECK_THROWS(SecretKey::from_hex("zz"));
  CHECK(SecretKey::from_seed(3).to_hex() == SecretKey::from_seed(3).to_hex());
  CHECK(SecretKey::from_seed(3).to_hex() != SecretKey::from_seed(4).to_hex());
  const SecretKey longkey(std::vector<std::uint8_t>(100, 7));
  const std::vector<TokenId> ctx{1};
  CHECK(derive_code(longkey, ctx, 8).cluster_index < 8);
}

TEST_CASE("derive_code determinism and degenerate h") {
  const auto k = key_a();
  const std::vector<TokenId> ctx{5, 9};
  CHECK(derive_code(k, ctx, 16) == derive_code(k, ctx, 16));
  const std::vector<TokenId> other{9, 5};
  CHECK(derive_code(k, ctx, 16).code_id != derive_code(k, other, 16).code_id);
  CHECK(derive_code(k, ctx, 16).code_id == derive_code(k, ctx, 7).code_id);
  for (TokenId t = 0; t < 200; ++t) {
    const std::vector<TokenId> c{t};
    CHECK(derive_code(k, c, 1).cluster_index == 0);
  }
  CHECK(derive_code(k, ctx, 16).code_id != derive_code(SecretKey::from_seed(2), ctx, 16).code_id);
  const double u = derive_uniform(k, ctx);
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
}

TEST_CASE("derive_code cluster index is uniform (chi-square, 1e5 contexts)") {
  const auto k = key_a();
  std::vector<double> counts(16, 0.0);
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const std::vector<TokenId> ctx{static_cast<TokenId>(i), static_cast<TokenId>(i >> 7)};
    counts[derive_code(k, ctx, 16).cluster_index] += 1;
  }
  double chi2 = 0;
  for (double c : counts) chi2 += (c - trials / 16.0) * (c - trials / 16.0) / (trials / 16.0);
  const boost::math::chi_squared dist(15);
  CHECK(chi2 >= boost::math::quantile(dist, 0.005));
  CHECK(chi2 <= boost::math::quantile(dist, 0.995));
}

TEST_CASE("cluster_probabilities") {
  check_close(ProbabilityVector::unchecked(cluster_probabilities(p4(), two_pairs()).vec()), {0.6, 0.4});
  const ProbabilityVector uni(std::vector<double>(6, 1.0 / 6));
  const auto cd = cluster_probabilities(uni, Clustering(3, {0, 1, 2, 0, 1, 2}));
  for (std::size_t i = 0; i < 3; ++i) CHECK(cd[i] == doctest::Approx(1.0 / 3));
  const ProbabilityVector hot({0, 0, 1, 0});
  const auto ch = cluster_probabilities(hot, two_pairs());
  CHECK(ch[0] == 0.0);
  CHECK(ch[1] == 1.0);
  CHECK_THROWS_AS(cluster_probabilities(ProbabilityVector({0.5, 0.5}), two_pairs()), InvalidArgument);
}

TEST_CASE("overflow distribution") {
  const auto a = overflow_distribution(ClusterDistribution({0.6, 0.4}));
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == 0.0);
  const auto b = overflow_distribution(ClusterDistribution({0.5, 0.3, 0.2}));
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 0.0);
  // Two overflowing clusters: weights (0.6, 0.2, 0) after h*Pr - 1 with h = 4.
  const auto c = overflow_distribution(ClusterDistribution({0.4, 0.3, 0.2, 0.1}));
  CHECK(c[0] == doctest::Approx(0.75));
  CHECK(c[1] == doctest::Approx(0.25));
  CHECK(c[2] == 0.0);
  CHECK_THROWS_AS(overflow_distribution(ClusterDistribution({0.5, 0.5})), InternalLogicError);
}

TEST_CASE("acceptance probability") {
  const ClusterDistribution cd({0.6, 0.4});
  CHECK(acceptance_probability(cd, 0) == 1.0);
  CHECK(acceptance_probability(cd, 1) == doctest::Approx(0.8));
}

TEST_CASE("creweight_distribution matches hand-derived laws") {
  check_close(creweight_distribution(p4(), two_pairs(), 0), {2.0 / 3, 1.0 / 3, 0, 0});
  check_close(creweight_distribution(p4(), two_pairs(), 1), {0.4 / 3, 0.2 / 3, 0.6, 0.2});
  const auto a = creweight_distribution(p4(), two_pairs(), 0);
  const auto b = creweight_distribution(p4(), two_pairs(), 1);
  for (std::size_t i = 0; i < 4; ++i) CHECK(0.5 * (a[i] + b[i]) == doctest::Approx(p4()[i]).epsilon(1e-14));
}

TEST_CASE("creweight_distribution_given_j splits at h*Pr") {
  check_close(creweight_distribution_given_j(p4(), two_pairs(), 1, 0.79), {0, 0, 0.75, 0.25});
  check_close(creweight_distribution_given_j(p4(), two_pairs(), 1, 0.81), {2.0 / 3, 1.0 / 3, 0, 0});
}

TEST_CASE("creweight_sample: h=1 reproduces p") {
  const Clustering one(1, {0, 0, 0, 0});
  Rng rng(11);
  std::vector<double> freq(4, 0);
  const int draws = 200000;
  const WatermarkCode code{};
  for (int i = 0; i < draws; ++i) freq[creweight_sample(p4(), one, code, rng)] += 1.0 / draws;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(p4()[i] * (1 - p4()[i]) / draws);
    CHECK(std::abs(freq[i] - p4()[i]) <= 3 * sigma);
  }
}

TEST_CASE("creweight_sample: empirical law for the c_2 code over 1e6 draws") {
  Rng rng(12);
  WatermarkCode code{};
  code.cluster_index = 1;
  const std::vector<double> want{0.4 / 3, 0.2 / 3, 0.6, 0.2};
  std::vector<double> freq(4, 0);
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) freq[creweight_sample(p4(), two_pairs(), code, rng)] += 1.0 / draws;
  for (std::size_t i = 0; i < 4; ++i) {
    const double sigma = std::sqrt(want[i] * (1 - want[i]) / draws);
    CHECK(std::abs(freq[i] - want[i]) <= 3 * sigma);
  }
}

TEST_CASE("creweight_sample never returns a zero-probability token") {
  Rng rng(13);
  const ProbabilityVector p({0.0, 0.5, 0.0, 0.5, 0.0, 0.0});
  const Clustering c(3, {0, 0, 1, 1, 2, 2});
  for (std::uint32_t idx = 0; idx < 3; ++idx) {
    WatermarkCode code{};
    code.cluster_index = idx;
    for (int i = 0; i < 2000; ++i) CHECK(p[creweight_sample(p, c, code, rng)] > 0.0);
  }
}

TEST_CASE("selection breakdown closes the case algebra") {
  Rng rng(14);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t h = 2 + rep % 7;
    const ClusterDistribution cd(sample_dirichlet(h, 0.7, rng));
    const auto s = selection_breakdown(cd);
    double rej = 0;
    for (std::size_t i = 0; i < h; ++i) {
      CHECK(s.accepted[i] == doctest::Approx(std::min(1.0, h * cd[i]) / h).epsilon(1e-14));
      CHECK(s.accepted[i] + s.inflow[i] == doctest::Approx(cd[i]).epsilon(1e-12));
      rej += std::max(0.0, 1.0 - h * cd[i]) / h;
    }
    CHECK(s.rejected == doctest::Approx(rej).epsilon(1e-13));
  }
}

TEST_CASE("dip_reweight") {
  const ProbabilityVector p({0.6, 0.4});
  const std::vector<TokenId> order{0, 1};
  CHECK(dip_reweight(p, order, 0.0) == p);
  check_close(dip_reweight(p, order, 0.3), {0.3, 0.7}, 1e-15);
  check_close(dip_reweight(p, order, 0.5), {0.2, 0.8}, 1e-15);
  const std::vector<TokenId> rev{1, 0};
  // Reversed order: t1 occupies [0,0.4], t0 [0.4,1]; alpha=0.3 keeps [0.3,0.7] and doubles [0.7,1].
  check_close(dip_reweight(p, rev, 0.3), {0.3 + 2 * 0.3, 0.1}, 1e-15);
  const std::vector<TokenId> dup{0, 0};
  CHECK_THROWS_AS(dip_reweight(p, dup, 0.3), InvalidArgument);
  CHECK_THROWS_AS(dip_reweight(p, order, 0.6), InvalidArgument);
}

TEST_CASE("dip_reweight averages to p over both orders at alpha=0.5") {
  const ProbabilityVector p({0.6, 0.4});
  const std::vector<TokenId> o1{0, 1}, o2{1, 0};
  const auto a = dip_reweight(p, o1, 0.5), b = dip_reweight(p, o2, 0.5);
  CHECK(0.5 * (a[0] + b[0]) == doctest::Approx(0.6));
}

TEST_CASE("kgw_reweight") {
  const ProbabilityVector p({0.5, 0.5});
  const std::vector<TokenId> g1{1};
  CHECK(kgw_reweight(p, g1, 0.0)[1] == doctest::Approx(0.5));
  check_close(kgw_reweight(p, g1, std::log(3.0)), {0.25, 0.75}, 1e-15);
  const std::vector<TokenId> all{0, 1};
  check_close(kgw_reweight(p4(), std::vector<TokenId>{0, 1, 2, 3}, 2.0), p4().vec(), 1e-15);
  check_close(kgw_reweight(p, all, 5.0), {0.5, 0.5}, 1e-15);
}

TEST_CASE("keyed permutation") {
  const auto k = key_a();
  const std::vector<TokenId> ctx{3};
  const auto perm = keyed_permutation(k, ctx, 50);
  CHECK(perm == keyed_permutation(k, ctx, 50));
  CHECK(std::set<TokenId>(perm.begin(), perm.end()).size() == 50);
  const std::vector<TokenId> ctx2{4};
  CHECK(perm != keyed_permutation(k, ctx2, 50));
}
