#pragma once

#include <functional>
#include <vector>

#include "psimf/core.hpp"
#include "psimf/dataset.hpp"

namespace psimf {

/// Largest Hermite order accepted by the three-term recurrence.
inline constexpr int kMaxHermiteOrder = 64;

/// Physicist's Hermite polynomial H_order(x).
double hermite_physicist(int order, double x);

/// Mercer eigenfunction of the Gaussian RBF kernel exp(-rho/(1-rho^2)(x-y)^2):
/// H_i(x) exp(-rho/(1+rho) x^2) / sqrt(2^i i! sqrt((1-rho)/(1+rho))).
/// The normalisation is evaluated in log space.
double eigenfunction(int order, double x, double rho);

/// Basis of q functions on [0,1] plus the ridge penalty used by the embedding.
struct BasisSpec {
  enum class Variant { HermiteRbf, Custom };

  Variant variant = Variant::HermiteRbf;
  int q = 3;
  double rho = 0.99;
  double lambda = 0.01;
  /// Used when variant == Custom. The theory wants Lipschitz functions; nothing checks it.
  std::vector<std::function<double(double)>> functions;
  bool lipschitz = true;

  static BasisSpec hermite(int q, double rho, double lambda) {
    return {Variant::HermiteRbf, q, rho, lambda, {}, true};
  }
  static BasisSpec custom(std::vector<std::function<double(double)>> fns, double lambda) {
    const int q = static_cast<int>(fns.size());
    return {Variant::Custom, q, 0.5, lambda, std::move(fns), true};
  }

  double operator()(int s, double t) const;
  void validate() const;
};

/// q x r matrix with entry (s, k) = phi_s(times[k]).
MatrixXd design_matrix(const BasisSpec& basis, const VectorXd& times);

/// The linear map v -> (Phi Phi^T + lambda I)^{-1} Phi v for one record's times, as a q x r matrix.
/// Throws SingularSystem when the regularised Gram matrix is numerically singular.
MatrixXd embedding_operator(const BasisSpec& basis, const VectorXd& times);

/// Ridge coefficients of one record.
VectorXd embed_record(const BasisSpec& basis, const VectorXd& times, const VectorXd& values);

/// n x m x q array stored as an n x (m q) matrix: row i is vec of slice i,
/// feature-major (column j * q + s holds coefficient s of feature j).
struct SliceTensor {
  MatrixXd data;
  Index m = 0;
  Index q = 0;

  SliceTensor() = default;
  SliceTensor(MatrixXd d, Index m_, Index q_) : data(std::move(d)), m(m_), q(q_) {}

  Index n() const noexcept { return data.rows(); }
  Index dim() const noexcept { return m * q; }

  /// Slice i as an m x q matrix.
  MatrixXd slice(Index i) const {
    MatrixXd out(m, q);
    for (Index j = 0; j < m; ++j) out.row(j) = data.row(i).segment(j * q, q);
    return out;
  }
};

struct EmbeddedTensor : SliceTensor {
  using SliceTensor::SliceTensor;
};

/// H(W): one ridge fit per (subject, feature) record.
EmbeddedTensor embed_dataset(const BasisSpec& basis, const LongitudinalDataset& data);

}  // namespace psimf
