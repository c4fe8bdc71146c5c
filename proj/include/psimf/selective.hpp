#pragma once

#include <cstdint>

#include "psimf/cluster.hpp"
#include "psimf/core.hpp"
#include "psimf/dataset.hpp"
#include "psimf/embed.hpp"
#include "psimf/whiten.hpp"

namespace psimf {

/// nu_i = 1/|C1| on C1 and -1/|C2| on C2; ||nu||^2 = 1/|C1| + 1/|C2|.
VectorXd indicator_vector(const Partition& partition, Index n);

/// Cluster-mean difference mean(C1) - mean(C2) of the rows of `rows`, i.e. nu^T rows.
template <typename Derived>
RowVectorX<typename Derived::Scalar> cluster_mean_difference(const Eigen::MatrixBase<Derived>& rows,
                                                             const Partition& partition) {
  return indicator_vector(partition, rows.rows()).transpose().template cast<typename Derived::Scalar>() * rows;
}

/// A = projected + (magnitude / ||nu||^2) nu direction^T, with projected = (I - nu nu^T/||nu||^2) A.
struct Decomposition {
  MatrixXd projected;
  double magnitude = 0.0;   // ||mean(C1) - mean(C2)||_F
  RowVectorXd direction;    // unit vec of the difference, or zero when it vanishes
  VectorXd nu;
};

Decomposition orthogonal_decompose(const Eigen::Ref<const MatrixXd>& rows, const Partition& partition);

/// F(phi) = projected + (phi / ||nu||^2) nu direction^T.
MatrixXd perturb(const Decomposition& decomposition, double phi);

struct TestConfig {
  Index mc_samples = 1000;
  std::uint64_t seed = 0;
  ClustererSpec clusterer;
  /// Lower bound on the in-set weight sum after rescaling the largest in-set weight to 1.
  double min_effective_denominator = 1e-8;

  void validate() const;
};

struct SelectiveTestReport {
  double p_selective = 1.0;
  double p_wald = 1.0;
  double statistic = 0.0;
  double c_norm = 0.0;
  Index dof = 0;
  Index mc_samples = 0;
  Index n_in_truncation = 0;
  Index n_negative = 0;
  double denominator_weight = 0.0;
  double log_mean_in_set_weight = 0.0;
  double effective_sample_size = 0.0;
  /// Delta-method standard error of the self-normalised estimate.
  double standard_error = 0.0;
  bool degenerate_direction = false;
  Partition partition;
};

/// Truncated-chi p-value by importance sampling. Proposal draws are
/// gamma_s ~ N(statistic, ||nu||^2) from stream (seed, s); draws below zero get weight zero.
/// Throws PartitionMismatch when `partition` is not cluster(whitened), EmptyTruncation when
/// no probe lands in the truncation set.
SelectiveTestReport selective_p_value(const SliceTensor& whitened, const Partition& partition,
                                      const TestConfig& config, const ClusterFn& cluster);
SelectiveTestReport selective_p_value(const SliceTensor& whitened, const Partition& partition,
                                      const TestConfig& config);

/// Naive chi survival at the observed cluster-mean distance, ignoring selection.
double wald_p_value(const SliceTensor& whitened, const Partition& partition);

/// Embed, estimate covariance, whiten, cluster, then test.
SelectiveTestReport run_psimf(const LongitudinalDataset& data, const BasisSpec& basis,
                              const TestConfig& config);

}  // namespace psimf
