#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "psimf/core.hpp"
#include "psimf/dataset.hpp"

namespace psimf {

// ---------------------------------------------------------------------------
// Covariance kernels on [0,1]^2.

struct RationalQuadratic {
  double length_scale = 1.0;
};
struct Periodic {};
struct TruncatedLocalPeriodic {};
/// exp(-rho/(1-rho^2) (x-y)^2), the kernel whose Mercer eigenfunctions form the embedding basis.
struct Rbf {
  double rho = 0.99;
};
/// Values on a uniform (g x g) grid over [0,1]^2, bilinearly interpolated.
struct Tabulated {
  MatrixXd values;
};

using Kernel = std::variant<RationalQuadratic, Periodic, TruncatedLocalPeriodic, Rbf, Tabulated>;

/// A tabulated kernel that is identically zero.
Kernel zero_kernel();

double evaluate(const Kernel& kernel, double x, double y);

/// Entry (k1, k2) is kernel(times_a[k1], times_b[k2]).
MatrixXd covariance_matrix(const Kernel& kernel, const VectorXd& times_a, const VectorXd& times_b);

/// Joint covariance of all features of one subject over its pooled time points.
/// Feature blocks are stacked feature-major; off-diagonal blocks use `cross` or zero.
MatrixXd pooled_covariance(const Kernel& kernel, const std::vector<VectorXd>& times,
                           const std::optional<Kernel>& cross = std::nullopt);

// ---------------------------------------------------------------------------
// Mean functions.

struct ConstantMeans {
  std::vector<double> values;  // one per subject
};
/// mu_i = first for i < split, second otherwise.
struct TwoGroupMeans {
  double first = 0.0;
  double second = 0.0;
  Index split = 0;
};

struct MeanSpec {
  std::variant<ConstantMeans, TwoGroupMeans> form = ConstantMeans{};

  /// Mean of subject i at time t; a ConstantMeans with no values is the zero mean.
  double value(Index subject, double t) const;

  static MeanSpec zero() { return {}; }
  static MeanSpec two_groups(double first, double second, Index split) {
    return {TwoGroupMeans{first, second, split}};
  }
};

// ---------------------------------------------------------------------------

struct SamplingPlan {
  Index n = 2;
  Index m = 1;
  Index r = 15;
  /// Optional per-record lengths (subject-major, size n*m); overrides r.
  std::vector<Index> r_per_record;
  /// sigma_j^2, one per feature (a single entry is broadcast).
  std::vector<double> noise_var{0.1};
  /// Draw one time grid per feature and share it across subjects.
  bool shared_times = false;
  std::uint64_t seed = 0;

  Index record_length(Index i, Index j) const;
  double noise(Index j) const;
  void validate() const;
};

/// Symmetric factor F with F F^T equal to the repaired covariance: negative eigenvalues are
/// clipped to zero and 1e-10 * trace / dim is added to the diagonal.
struct PsdFactor {
  MatrixXd factor;
  double min_eigenvalue = 0.0;  // before clipping
  double max_eigenvalue = 0.0;
  bool clipped = false;
};
PsdFactor psd_factor(const MatrixXd& covariance);

/// One subject's noisy values W_ij(t) = mu_i(t) + Z_ij(t) + eps, one vector per feature.
std::vector<VectorXd> sample_mgp_subject(const Kernel& kernel, const MeanSpec& mean, Index subject,
                                         const std::vector<VectorXd>& times,
                                         const std::vector<double>& noise_var, Rng& rng,
                                         const std::optional<Kernel>& cross = std::nullopt);

/// Sorted iid U[0,1] times.
VectorXd draw_times(Index r, Rng& rng);

/// Subject i's data depends only on (plan.seed, i), never on n.
LongitudinalDataset generate_dataset(const Kernel& kernel, const MeanSpec& mean,
                                     const SamplingPlan& plan,
                                     const std::optional<Kernel>& cross = std::nullopt);

// ---------------------------------------------------------------------------
// Misspecified processes used by the robustness study.

struct Wiener {};
struct ExponentialBrownian {
  double drift = 0.0;
  double vol = 1.0;
};
struct OrnsteinUhlenbeck {
  double theta = 1.0;
  double mean = 0.0;
  double vol = 1.0;
};
using MisspecProcess = std::variant<Wiener, ExponentialBrownian, OrnsteinUhlenbeck>;

VectorXd sample_misspecified_subject(const MisspecProcess& process, const VectorXd& times,
                                     Rng& rng);

/// Same layout and seeding as generate_dataset, values from the misspecified process plus noise.
LongitudinalDataset generate_misspecified_dataset(const MisspecProcess& process,
                                                  const SamplingPlan& plan);

}  // namespace psimf
