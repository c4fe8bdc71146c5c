#pragma once

#include <functional>
#include <string>
#include <vector>

#include "psimf/core.hpp"

namespace psimf {

/// Unordered split {c1, c2} of 0-based subject indices.
/// Canonical form: both parts sorted, c1 holds subject 0.
struct Partition {
  std::vector<Index> c1;
  std::vector<Index> c2;

  Index n() const noexcept { return static_cast<Index>(c1.size() + c2.size()); }

  /// Builds the canonical partition from 0/1 labels. Throws if a part would be empty.
  static Partition from_labels(const std::vector<int>& labels);
  /// Label 0 for c1, 1 for c2.
  std::vector<int> labels() const;

  friend bool operator==(const Partition&, const Partition&) = default;
};

/// True iff the two partitions split [n] into the same unordered pair of sets.
bool partition_equal(const Partition& a, const Partition& b);

/// Lloyd's algorithm with k = 2 on the rows of `points`.
///
/// The first run starts from the lexicographically smallest row and the row farthest from it.
/// `restarts` further runs are seeded k-means++ style from a fixed-seed stream, and the run with
/// the lowest within-cluster sum of squares wins (earliest run on ties). The result is a pure
/// function of `points`. Assignment ties go to the first centroid; an empty cluster receives
/// the point farthest from its centroid.
Partition kmeans2(const Eigen::Ref<const MatrixXd>& points, int max_iters = 100, int restarts = 10);

/// Within-cluster sum of squared distances to the cluster means.
double within_cluster_ss(const Eigen::Ref<const MatrixXd>& points, const Partition& partition);

enum class Linkage { Ward, Complete, Average };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage linkage);

/// Agglomerative clustering on squared Euclidean distances, stopped at two clusters.
/// Equal merge costs are resolved toward the smallest (lower, higher) pair of cluster slots.
Partition hclust2(const Eigen::Ref<const MatrixXd>& points, Linkage linkage = Linkage::Ward);

/// A deterministic clustering map C(.) from slice rows to a two-part split.
using ClusterFn = std::function<Partition(const MatrixXd&)>;

struct ClustererSpec {
  enum class Kind { KMeans, Hierarchical };
  Kind kind = Kind::KMeans;
  Linkage linkage = Linkage::Ward;
  int max_iters = 100;
  int restarts = 10;
};

ClusterFn make_clusterer(const ClustererSpec& spec);

}  // namespace psimf
