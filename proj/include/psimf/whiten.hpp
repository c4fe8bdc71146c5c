#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "psimf/core.hpp"
#include "psimf/embed.hpp"
#include "psimf/simkit.hpp"

namespace psimf {

/// Relative eigenvalue floor used by inv_sqrt_psd.
inline constexpr double kEigenFloorRelative = 1e-10;

template <typename Scalar>
struct InvSqrtResult {
  MatrixX<Scalar> inv_sqrt;
  VectorX<Scalar> eigenvalues;  // ascending, before flooring
  bool floor_applied = false;
};

/// M^{-1/2} = U diag(max(lambda_k, floor))^{-1/2} U^T with floor = max(1e-10 lambda_max, 1e-300).
/// Floored directions are kept, so the result is always full rank.
template <typename Derived>
InvSqrtResult<typename Derived::Scalar> inv_sqrt_psd(const Eigen::MatrixBase<Derived>& matrix) {
  using Scalar = typename Derived::Scalar;
  using Mat = MatrixX<Scalar>;
  if (matrix.rows() != matrix.cols())
    throw Error(ErrorKind::DimensionMismatch, "inv_sqrt_psd needs a square matrix");
  const Mat m = matrix;
  const Scalar scale = std::max<Scalar>(Scalar(1), m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-10) * scale)
    throw Error(ErrorKind::NotSymmetric, "matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> eig(Scalar(0.5) * (m + m.transpose()));
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::FactorizationFailure, "eigendecomposition did not converge");

  InvSqrtResult<Scalar> out;
  out.eigenvalues = eig.eigenvalues();
  const Scalar top = out.eigenvalues.size() > 0 ? out.eigenvalues.maxCoeff() : Scalar(0);
  const Scalar floor = std::max<Scalar>(Scalar(kEigenFloorRelative) * top, Scalar(1e-300));
  VectorX<Scalar> scaled(out.eigenvalues.size());
  for (Index k = 0; k < scaled.size(); ++k) {
    Scalar v = out.eigenvalues[k];
    if (v < floor) {
      v = floor;
      out.floor_applied = true;
    }
    scaled[k] = Scalar(1) / std::sqrt(v);
  }
  out.inv_sqrt = eig.eigenvectors() * scaled.asDiagonal() * eig.eigenvectors().transpose();
  out.inv_sqrt = Scalar(0.5) * (out.inv_sqrt + out.inv_sqrt.transpose()).eval();
  return out;
}

/// Sample covariance of vectorised slices together with its inverse square root.
struct CovarianceEstimate {
  MatrixXd matrix;
  MatrixXd inv_sqrt;
  VectorXd eigenvalues;
  bool eigen_floor_applied = false;
  Index m = 0;
  Index q = 0;
};

/// Unbiased covariance of rows, as a free function over any dense expression.
template <typename Derived>
MatrixX<typename Derived::Scalar> row_covariance(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  const auto centered = (rows.rowwise() - rows.colwise().mean()).eval();
  MatrixX<Scalar> cov = centered.transpose() * centered / Scalar(rows.rows() - 1);
  return Scalar(0.5) * (cov + cov.transpose());
}

/// Throws DegenerateCovariance when every slice is identical (up to rounding).
CovarianceEstimate sample_covariance(const SliceTensor& tensor);

struct WhitenedTensor : SliceTensor {
  std::shared_ptr<const CovarianceEstimate> provenance;

  WhitenedTensor() = default;
  WhitenedTensor(MatrixXd d, Index m_, Index q_, std::shared_ptr<const CovarianceEstimate> cov = {})
      : SliceTensor(std::move(d), m_, q_), provenance(std::move(cov)) {}
};

/// vec(Y_i) = inv_sqrt * vec(X_i) for every slice.
WhitenedTensor whiten_dataset(const SliceTensor& tensor, std::shared_ptr<const CovarianceEstimate> cov);
WhitenedTensor whiten_dataset(const SliceTensor& tensor, const CovarianceEstimate& cov);

/// Test-mode whitening with a known per-subject covariance Lambda_(i).
WhitenedTensor whiten_per_subject(const SliceTensor& tensor, const std::vector<MatrixXd>& covariances);

// ---------------------------------------------------------------------------
// Covariance oracles for a known kernel.

using FeatureMean = std::function<double(Index feature, double t)>;

struct EmbeddingMoments {
  VectorXd mean;        // vec of ((K_j + lambda I)^{-1} Phi_j mu_j) over features
  MatrixXd covariance;  // D (Sigma_1 + Sigma_2) D^T
};

/// Exact finite-sample law of vec(H(W)[i,:,:]) for one subject's time grid.
EmbeddingMoments oracle_embedding_covariance(const Kernel& kernel, const BasisSpec& basis,
                                             const std::vector<VectorXd>& times,
                                             const std::vector<double>& noise_var,
                                             const FeatureMean& mean = {},
                                             const std::optional<Kernel>& cross = std::nullopt);

struct PopulationMoments {
  MatrixXd gram;        // K = (int phi_s1 phi_s2), q x q
  MatrixXd covariance;  // Lambda, (m q) x (m q)
};

/// Trapezoid-rule evaluation of the large-r limit of the embedding covariance.
/// The noise enters as sigma_a^2 times the double integral of phi_s1(t1) phi_s2(t2).
PopulationMoments compute_population_gram_and_asymptotic_cov(
    const Kernel& kernel, const BasisSpec& basis, const std::vector<double>& noise_var,
    Index quadrature_points, const std::optional<Kernel>& cross = std::nullopt);

/// beta_(i) = (K^{-1} int phi_s mu_ij)_j, stacked feature-major.
VectorXd population_mean_coefficients(const BasisSpec& basis, const FeatureMean& mean, Index m,
                                      Index quadrature_points);

}  // namespace psimf
