#include "psimf/selective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "psimf/chi.hpp"

namespace psimf {

VectorXd indicator_vector(const Partition& partition, Index n) {
  if (partition.n() != n) throw Error(ErrorKind::DimensionMismatch, "partition does not cover n subjects");
  if (partition.c1.empty() || partition.c2.empty())
    throw Error(ErrorKind::InvalidArgument, "partition has an empty part");
  VectorXd nu = VectorXd::Zero(n);
  const double w1 = 1.0 / static_cast<double>(partition.c1.size());
  const double w2 = -1.0 / static_cast<double>(partition.c2.size());
  for (Index i : partition.c1) nu[i] = w1;
  for (Index i : partition.c2) nu[i] = w2;
  return nu;
}

Decomposition orthogonal_decompose(const Eigen::Ref<const MatrixXd>& rows, const Partition& partition) {
  Decomposition out;
  out.nu = indicator_vector(partition, rows.rows());
  const double nu_sq = out.nu.squaredNorm();
  const RowVectorXd diff = out.nu.transpose() * rows;
  out.projected = rows - out.nu * diff / nu_sq;
  out.magnitude = diff.norm();
  // Identical cluster means up to rounding count as an exact zero.
  const double scale = rows.size() > 0 ? rows.cwiseAbs().maxCoeff() : 0.0;
  if (out.magnitude <= 16.0 * std::numeric_limits<double>::epsilon() * scale * std::sqrt(static_cast<double>(rows.cols())))
    out.magnitude = 0.0;
  out.direction = out.magnitude > 0.0 ? RowVectorXd(diff / out.magnitude) : RowVectorXd::Zero(rows.cols());
  return out;
}

MatrixXd perturb(const Decomposition& d, double phi) {
  return d.projected + (phi / d.nu.squaredNorm()) * d.nu * d.direction;
}

void TestConfig::validate() const {
  if (mc_samples < 100) throw Error(ErrorKind::InvalidArgument, "mc_samples must be >= 100");
  if (!(min_effective_denominator > 0.0))
    throw Error(ErrorKind::InvalidArgument, "min_effective_denominator must be > 0");
}

double wald_p_value(const SliceTensor& whitened, const Partition& partition) {
  const VectorXd nu = indicator_vector(partition, whitened.n());
  const double stat = (nu.transpose() * whitened.data).norm();
  return chi_survival(stat, static_cast<int>(whitened.dim()), nu.norm());
}

SelectiveTestReport selective_p_value(const SliceTensor& whitened, const Partition& partition,
                                      const TestConfig& config, const ClusterFn& cluster) {
  config.validate();
  if (!partition_equal(cluster(whitened.data), partition))
    throw Error(ErrorKind::PartitionMismatch, "partition is not the clustering of the supplied tensor");

  const Decomposition dec = orthogonal_decompose(whitened.data, partition);
  const int dof = static_cast<int>(whitened.dim());
  const double c = dec.nu.norm();

  SelectiveTestReport report;
  report.statistic = dec.magnitude;
  report.c_norm = c;
  report.dof = dof;
  report.mc_samples = config.mc_samples;
  report.partition = partition;
  report.p_wald = chi_survival(dec.magnitude, dof, c);
  if (dec.magnitude == 0.0) {
    // F(phi) no longer depends on phi.
    report.degenerate_direction = true;
    report.p_selective = 1.0;
    return report;
  }

  struct Probe {
    double gamma;
    double log_weight;
    bool in_set;
  };
  std::vector<Probe> probes(static_cast<std::size_t>(config.mc_samples));
  for (Index s = 0; s < config.mc_samples; ++s) {
    Rng rng = make_stream(config.seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal(0.0, 1.0);
    Probe& p = probes[static_cast<std::size_t>(s)];
    p.gamma = dec.magnitude + c * normal(rng);
    if (p.gamma < 0.0) {
      p.log_weight = -std::numeric_limits<double>::infinity();
      p.in_set = false;
      ++report.n_negative;
      continue;
    }
    p.log_weight = chi_log_density(p.gamma, dof, c) - normal_log_density(p.gamma, dec.magnitude, c);
    p.in_set = partition_equal(cluster(perturb(dec, p.gamma)), partition);
  }

  double top = -std::numeric_limits<double>::infinity();
  for (const Probe& p : probes)
    if (p.in_set) top = std::max(top, p.log_weight);
  for (const Probe& p : probes) report.n_in_truncation += p.in_set ? 1 : 0;
  if (!std::isfinite(top))
    throw Error(ErrorKind::EmptyTruncation, "no Monte-Carlo probe fell inside the truncation set");

  // Weights are rescaled so the largest in-set weight is 1; the ratio is scale free.
  double num = 0.0, den = 0.0, den_sq = 0.0;
  for (const Probe& p : probes) {
    if (!p.in_set) continue;
    const double w = std::exp(p.log_weight - top);
    den += w;
    den_sq += w * w;
    if (p.gamma >= dec.magnitude) num += w;
  }
  report.denominator_weight = den;
  report.log_mean_in_set_weight = top + std::log(den) - std::log(static_cast<double>(config.mc_samples));
  if (den < config.min_effective_denominator)
    throw Error(ErrorKind::EmptyTruncation, "in-set importance weight below the configured minimum");

  report.p_selective = std::clamp(num / den, 0.0, 1.0);
  report.effective_sample_size = den * den / den_sq;
  double var = 0.0;
  for (const Probe& p : probes) {
    if (!p.in_set) continue;
    const double w = std::exp(p.log_weight - top);
    const double h = (p.gamma >= dec.magnitude ? 1.0 : 0.0) - report.p_selective;
    var += w * w * h * h;
  }
  report.standard_error = std::sqrt(var) / den;
  return report;
}

SelectiveTestReport selective_p_value(const SliceTensor& whitened, const Partition& partition,
                                      const TestConfig& config) {
  return selective_p_value(whitened, partition, config, make_clusterer(config.clusterer));
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.detail());
  }
}

}  // namespace

SelectiveTestReport run_psimf(const LongitudinalDataset& data, const BasisSpec& basis,
                              const TestConfig& config) {
  if (data.n() < 4) throw Error(ErrorKind::InvalidArgument, "run_psimf needs n >= 4");
  config.validate();
  const EmbeddedTensor embedded = stage("embedding", [&] {
    data.validate();
    return embed_dataset(basis, data);
  });
  auto cov = stage("covariance", [&] { return std::make_shared<const CovarianceEstimate>(sample_covariance(embedded)); });
  const WhitenedTensor whitened = stage("whitening", [&] { return whiten_dataset(embedded, cov); });
  const ClusterFn cluster = make_clusterer(config.clusterer);
  const Partition partition = stage("clustering", [&] { return cluster(whitened.data); });
  return stage("selective p-value", [&] { return selective_p_value(whitened, partition, config, cluster); });
}

}  // namespace psimf
