#include "psimf/cluster.hpp"

#include <algorithm>
#include <limits>

namespace psimf {

Partition Partition::from_labels(const std::vector<int>& labels) {
  if (labels.empty()) throw Error(ErrorKind::InvalidArgument, "empty label vector");
  Partition p;
  const int first = labels.front();
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] == first ? p.c1 : p.c2).push_back(static_cast<Index>(i));
  if (p.c2.empty()) throw Error(ErrorKind::InvalidArgument, "partition has an empty part");
  return p;
}

std::vector<int> Partition::labels() const {
  std::vector<int> out(static_cast<std::size_t>(n()), 0);
  for (Index i : c2) out.at(static_cast<std::size_t>(i)) = 1;
  return out;
}

bool partition_equal(const Partition& a, const Partition& b) {
  if (a.n() != b.n()) throw Error(ErrorKind::DimensionMismatch, "partitions cover different n");
  // Canonical orientation (subject 0 in c1) reduces unordered equality to plain comparison.
  auto canonical = [](const Partition& p) {
    if (!p.c1.empty() && !p.c2.empty() && p.c2.front() < p.c1.front()) return Partition{p.c2, p.c1};
    return p;
  };
  return canonical(a) == canonical(b);
}

namespace {

// Fixed stream for the k-means++ restarts; part of the definition of kmeans2.
constexpr std::uint64_t kRestartSeed = 0x6B6D'6561'6E73'3221ULL;

struct LloydResult {
  std::vector<int> labels;
  double objective = 0.0;
};

// cols holds one point per column.
LloydResult lloyd(const MatrixXd& cols, VectorXd c0, VectorXd c1, int max_iters) {
  const Index n = cols.cols();
  VectorXd centroid[2] = {std::move(c0), std::move(c1)};
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<int> previous;
  Index count[2] = {0, 0};
  for (int iter = 0; iter < std::max(1, max_iters); ++iter) {
    count[0] = count[1] = 0;
    for (Index i = 0; i < n; ++i) {
      const int label =
          (cols.col(i) - centroid[0]).squaredNorm() <= (cols.col(i) - centroid[1]).squaredNorm() ? 0 : 1;
      labels[static_cast<std::size_t>(i)] = label;
      ++count[label];
    }
    for (int empty = 0; empty < 2; ++empty) {
      if (count[empty] != 0) continue;
      const int full = 1 - empty;
      Index worst = 0;
      double worst_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double d = (cols.col(i) - centroid[full]).squaredNorm();
        if (d > worst_d) {
          worst_d = d;
          worst = i;
        }
      }
      labels[static_cast<std::size_t>(worst)] = empty;
      --count[full];
      ++count[empty];
    }
    if (labels == previous) break;
    previous = labels;
    for (int c = 0; c < 2; ++c) centroid[c].setZero(cols.rows());
    for (Index i = 0; i < n; ++i) centroid[labels[static_cast<std::size_t>(i)]] += cols.col(i);
    for (int c = 0; c < 2; ++c) centroid[c] /= static_cast<double>(count[c]);
  }
  LloydResult out{std::move(labels), 0.0};
  VectorXd mean[2] = {VectorXd::Zero(cols.rows()), VectorXd::Zero(cols.rows())};
  count[0] = count[1] = 0;
  for (Index i = 0; i < n; ++i) {
    const int l = out.labels[static_cast<std::size_t>(i)];
    mean[l] += cols.col(i);
    ++count[l];
  }
  for (int c = 0; c < 2; ++c) mean[c] /= static_cast<double>(count[c]);
  for (Index i = 0; i < n; ++i) out.objective += (cols.col(i) - mean[out.labels[static_cast<std::size_t>(i)]]).squaredNorm();
  return out;
}

Index weighted_pick(const VectorXd& weights, double u) {
  const double total = weights.sum();
  if (!(total > 0.0)) return static_cast<Index>(u * static_cast<double>(weights.size())) % weights.size();
  double acc = 0.0;
  const double target = u * total;
  for (Index i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return i;
  }
  return weights.size() - 1;
}

}  // namespace

double within_cluster_ss(const Eigen::Ref<const MatrixXd>& points, const Partition& partition) {
  double total = 0.0;
  for (const std::vector<Index>* part : {&partition.c1, &partition.c2}) {
    if (part->empty()) continue;
    RowVectorXd mean = RowVectorXd::Zero(points.cols());
    for (Index i : *part) mean += points.row(i);
    mean /= static_cast<double>(part->size());
    for (Index i : *part) total += (points.row(i) - mean).squaredNorm();
  }
  return total;
}

Partition kmeans2(const Eigen::Ref<const MatrixXd>& points, int max_iters, int restarts) {
  const Index n = points.rows();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "kmeans2 needs at least two points");
  const MatrixXd cols = points.transpose();

  Index first = 0;
  for (Index i = 1; i < n; ++i) {
    const auto a = cols.col(i);
    const auto b = cols.col(first);
    if (std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size())) first = i;
  }
  Index second = first;
  double far = -1.0;
  for (Index i = 0; i < n; ++i) {
    const double d = (cols.col(i) - cols.col(first)).squaredNorm();
    if (d > far) {
      far = d;
      second = i;
    }
  }
  LloydResult best = lloyd(cols, cols.col(first), cols.col(second), max_iters);

  Rng rng(kRestartSeed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd d2(n);
  for (int r = 0; r < restarts; ++r) {
    const Index a = std::min<Index>(static_cast<Index>(unif(rng) * static_cast<double>(n)), n - 1);
    for (Index i = 0; i < n; ++i) d2[i] = (cols.col(i) - cols.col(a)).squaredNorm();
    const Index b = weighted_pick(d2, unif(rng));
    LloydResult run = lloyd(cols, cols.col(a), cols.col(b), max_iters);
    if (run.objective < best.objective) best = std::move(run);
  }
  return Partition::from_labels(best.labels);
}

Linkage parse_linkage(const std::string& name) {
  if (name == "ward") return Linkage::Ward;
  if (name == "complete") return Linkage::Complete;
  if (name == "average") return Linkage::Average;
  throw Error(ErrorKind::ConfigError, "unknown linkage '" + name + "'");
}

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::Ward: return "ward";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
  }
  return "ward";
}

Partition hclust2(const Eigen::Ref<const MatrixXd>& points, Linkage linkage) {
  const Index n = points.rows();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "hclust2 needs at least two points");
  const MatrixXd cols = points.transpose();

  MatrixXd dist(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) dist(i, j) = (cols.col(i) - cols.col(j)).squaredNorm();

  std::vector<Index> size(static_cast<std::size_t>(n), 1);
  std::vector<Index> owner(static_cast<std::size_t>(n));  // slot of each point
  std::vector<char> active(static_cast<std::size_t>(n), 1);
  std::vector<Index> nearest(static_cast<std::size_t>(n), -1);
  std::vector<double> nearest_d(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  for (Index i = 0; i < n; ++i) owner[static_cast<std::size_t>(i)] = i;

  // Nearest active neighbour of slot i; equal distances keep the smallest slot.
  auto refresh = [&](Index i) {
    Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < n; ++k) {
      if (k == i || !active[static_cast<std::size_t>(k)]) continue;
      if (dist(i, k) < best_d) {
        best_d = dist(i, k);
        best = k;
      }
    }
    nearest[static_cast<std::size_t>(i)] = best;
    nearest_d[static_cast<std::size_t>(i)] = best_d;
  };
  for (Index i = 0; i < n; ++i) refresh(i);

  for (Index clusters = n; clusters > 2; --clusters) {
    Index a = -1, b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (!active[static_cast<std::size_t>(i)]) continue;
      const Index j = nearest[static_cast<std::size_t>(i)];
      const double d = nearest_d[static_cast<std::size_t>(i)];
      const Index lo = std::min(i, j), hi = std::max(i, j);
      if (d < best || (d == best && (lo < a || (lo == a && hi < b)))) {
        best = d;
        a = lo;
        b = hi;
      }
    }

    const double na = static_cast<double>(size[static_cast<std::size_t>(a)]);
    const double nb = static_cast<double>(size[static_cast<std::size_t>(b)]);
    const double dab = dist(a, b);
    for (Index k = 0; k < n; ++k) {
      if (k == a || k == b || !active[static_cast<std::size_t>(k)]) continue;
      const double nk = static_cast<double>(size[static_cast<std::size_t>(k)]);
      const double dka = dist(k, a), dkb = dist(k, b);
      double merged = 0.0;
      switch (linkage) {
        case Linkage::Ward:
          merged = ((nk + na) * dka + (nk + nb) * dkb - nk * dab) / (nk + na + nb);
          break;
        case Linkage::Complete:
          merged = std::max(dka, dkb);
          break;
        case Linkage::Average:
          merged = (na * dka + nb * dkb) / (na + nb);
          break;
      }
      dist(k, a) = dist(a, k) = merged;
    }
    active[static_cast<std::size_t>(b)] = 0;
    size[static_cast<std::size_t>(a)] += size[static_cast<std::size_t>(b)];
    for (Index& o : owner)
      if (o == b) o = a;

    refresh(a);
    for (Index k = 0; k < n; ++k) {
      if (k == a || !active[static_cast<std::size_t>(k)]) continue;
      const Index nk = nearest[static_cast<std::size_t>(k)];
      if (nk == a || nk == b) {
        refresh(k);
      } else if (dist(k, a) < nearest_d[static_cast<std::size_t>(k)] ||
                 (dist(k, a) == nearest_d[static_cast<std::size_t>(k)] && a < nk)) {
        nearest[static_cast<std::size_t>(k)] = a;
        nearest_d[static_cast<std::size_t>(k)] = dist(k, a);
      }
    }
  }

  std::vector<int> labels(static_cast<std::size_t>(n));
  const Index root = owner[0];
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = owner[static_cast<std::size_t>(i)] == root ? 0 : 1;
  return Partition::from_labels(labels);
}

ClusterFn make_clusterer(const ClustererSpec& spec) {
  if (spec.kind == ClustererSpec::Kind::KMeans) {
    const int iters = spec.max_iters;
    const int restarts = spec.restarts;
    return [iters, restarts](const MatrixXd& rows) { return kmeans2(rows, iters, restarts); };
  }
  const Linkage linkage = spec.linkage;
  return [linkage](const MatrixXd& rows) { return hclust2(rows, linkage); };
}

}  // namespace psimf
