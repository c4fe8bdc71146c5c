#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "psimf/cluster.hpp"

using namespace psimf;

namespace {

MatrixXd column(std::initializer_list<double> v) {
  MatrixXd x(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double d : v) x(i++, 0) = d;
  return x;
}

MatrixXd two_blobs(Index n, Index d, double gap, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd x(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) x(i, k) = normal(rng) + (i % 3 == 0 ? gap : 0.0);
  return x;
}

}  // namespace

TEST_CASE("partition equality is unordered") {
  const Partition a{{0, 1}, {2}}, b{{2}, {0, 1}}, c{{0, 2}, {1}};
  CHECK(partition_equal(a, b));
  CHECK_FALSE(partition_equal(a, c));
  CHECK(partition_equal(Partition{{0}, {1, 2}}, Partition{{0}, {1, 2}}));
  CHECK_THROWS_AS(partition_equal(a, Partition{{0}, {1}}), Error);

  const Partition p = Partition::from_labels({1, 1, 0, 1});
  CHECK(p.c1 == std::vector<Index>{0, 1, 3});
  CHECK(p.c2 == std::vector<Index>{2});
  CHECK(p.labels() == std::vector<int>{0, 0, 1, 0});
  CHECK_THROWS_AS(Partition::from_labels({1, 1}), Error);
}

TEST_CASE("k-means on the textbook example") {
  const MatrixXd x = column({0.0, 0.1, 10.0, 10.1});
  CHECK(kmeans2(x) == Partition{{0, 1}, {2, 3}});
  CHECK(kmeans2(x, 100, 0) == Partition{{0, 1}, {2, 3}});
  CHECK(kmeans2(column({3.0, -1.0})) == Partition{{0}, {1}});
  CHECK_THROWS_AS(kmeans2(column({1.0})), Error);
}

TEST_CASE("k-means finds the exhaustive optimum on small inputs") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MatrixXd x = two_blobs(10, 2, 3.0, seed);
    const Partition got = kmeans2(x);
    const std::vector<int> best = oracle::best_two_means(x);
    CHECK(within_cluster_ss(x, got) == doctest::Approx(oracle::wcss(x, best)).epsilon(1e-12));
  }
}

TEST_CASE("k-means is deterministic and its restarts never hurt") {
  const MatrixXd x = two_blobs(60, 3, 1.0, 42);
  CHECK(kmeans2(x) == kmeans2(x));
  CHECK(within_cluster_ss(x, kmeans2(x, 100, 10)) <= within_cluster_ss(x, kmeans2(x, 100, 0)));
}

TEST_CASE("hierarchical clustering on the textbook example") {
  const MatrixXd x = column({0.0, 0.1, 10.0, 10.1});
  for (Linkage l : {Linkage::Ward, Linkage::Complete, Linkage::Average})
    CHECK(hclust2(x, l) == Partition{{0, 1}, {2, 3}});
  CHECK(hclust2(column({1.0, 2.0})) == Partition{{0}, {1}});
}

TEST_CASE("hierarchical clustering matches a naive agglomeration") {
  const Linkage kinds[] = {Linkage::Ward, Linkage::Complete, Linkage::Average};
  for (int l = 0; l < 3; ++l)
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const MatrixXd x = two_blobs(25, 2, 1.5, seed * 31 + static_cast<std::uint64_t>(l));
      CHECK(hclust2(x, kinds[l]).labels() == oracle::naive_agglomerative(x, l));
    }
}

TEST_CASE("permuting subjects permutes the partition") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const MatrixXd x = two_blobs(30, 2, 12.0, seed);
    std::vector<Index> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    MatrixXd y(30, 2);
    for (Index i = 0; i < 30; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    for (bool hier : {false, true}) {
      const Partition px = hier ? hclust2(x) : kmeans2(x);
      const Partition py = hier ? hclust2(y) : kmeans2(y);
      std::vector<int> back(30);
      const std::vector<int> ly = py.labels();
      for (Index i = 0; i < 30; ++i) back[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = ly[static_cast<std::size_t>(i)];
      CHECK(partition_equal(px, Partition::from_labels(back)));
    }
  }
}

TEST_CASE("clusterer factory and linkage names") {
  CHECK(parse_linkage("average") == Linkage::Average);
  CHECK(to_string(Linkage::Complete) == "complete");
  try {
    parse_linkage("single");
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigError);
  }
  const MatrixXd x = two_blobs(20, 2, 8.0, 5);
  ClustererSpec spec;
  CHECK(make_clusterer(spec)(x) == kmeans2(x));
  spec.kind = ClustererSpec::Kind::Hierarchical;
  spec.linkage = Linkage::Average;
  CHECK(make_clusterer(spec)(x) == hclust2(x, Linkage::Average));
}
