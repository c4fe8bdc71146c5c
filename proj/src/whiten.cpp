#include "psimf/whiten.hpp"

#include <string>

namespace psimf {

CovarianceEstimate sample_covariance(const SliceTensor& tensor) {
  const Index n = tensor.n();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "sample covariance needs n >= 2");
  if (!tensor.data.allFinite())
    throw Error(ErrorKind::InvalidArgument, "tensor has non-finite entries");

  const RowVectorXd mean = tensor.data.colwise().mean();
  const double spread = (tensor.data.rowwise() - mean).cwiseAbs().maxCoeff();
  const double magnitude = std::max(tensor.data.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  // Identical slices leave only rounding noise in the centred data.
  if (spread <= 64.0 * std::numeric_limits<double>::epsilon() * magnitude)
    throw Error(ErrorKind::DegenerateCovariance, "all slices are identical; whitening is impossible");

  CovarianceEstimate out;
  out.m = tensor.m;
  out.q = tensor.q;
  out.matrix = row_covariance(tensor.data);
  auto root = inv_sqrt_psd(out.matrix);
  out.inv_sqrt = std::move(root.inv_sqrt);
  out.eigenvalues = std::move(root.eigenvalues);
  out.eigen_floor_applied = root.floor_applied;
  return out;
}

WhitenedTensor whiten_dataset(const SliceTensor& tensor, std::shared_ptr<const CovarianceEstimate> cov) {
  if (!cov) throw Error(ErrorKind::InvalidArgument, "missing covariance estimate");
  if (cov->inv_sqrt.rows() != tensor.dim() || cov->m != tensor.m || cov->q != tensor.q)
    throw Error(ErrorKind::DimensionMismatch,
                "covariance is " + std::to_string(cov->inv_sqrt.rows()) + "-dimensional, slices are " +
                    std::to_string(tensor.dim()) + "-dimensional");
  // Rows are vec(X_i)^T, so Y = X * inv_sqrt^T = X * inv_sqrt.
  MatrixXd data = tensor.data * cov->inv_sqrt;
  return WhitenedTensor(std::move(data), tensor.m, tensor.q, std::move(cov));
}

WhitenedTensor whiten_dataset(const SliceTensor& tensor, const CovarianceEstimate& cov) {
  return whiten_dataset(tensor, std::make_shared<const CovarianceEstimate>(cov));
}

WhitenedTensor whiten_per_subject(const SliceTensor& tensor, const std::vector<MatrixXd>& covariances) {
  if (static_cast<Index>(covariances.size()) != tensor.n())
    throw Error(ErrorKind::DimensionMismatch, "need one covariance per subject");
  MatrixXd data(tensor.n(), tensor.dim());
  for (Index i = 0; i < tensor.n(); ++i) {
    const MatrixXd& c = covariances[static_cast<std::size_t>(i)];
    if (c.rows() != tensor.dim())
      throw Error(ErrorKind::DimensionMismatch, "subject covariance has the wrong size");
    data.row(i) = (inv_sqrt_psd(c).inv_sqrt * tensor.data.row(i).transpose()).transpose();
  }
  return WhitenedTensor(std::move(data), tensor.m, tensor.q);
}

EmbeddingMoments oracle_embedding_covariance(const Kernel& kernel, const BasisSpec& basis,
                                             const std::vector<VectorXd>& times,
                                             const std::vector<double>& noise_var,
                                             const FeatureMean& mean, const std::optional<Kernel>& cross) {
  basis.validate();
  if (times.size() != noise_var.size())
    throw Error(ErrorKind::DimensionMismatch, "one noise variance per feature is required");
  const Index m = static_cast<Index>(times.size());
  const Index q = basis.q;

  Index total = 0;
  for (const VectorXd& t : times) total += t.size();
  MatrixXd d = MatrixXd::Zero(m * q, total);
  MatrixXd noise = MatrixXd::Zero(total, total);
  VectorXd mu = VectorXd::Zero(total);
  Index offset = 0;
  for (Index j = 0; j < m; ++j) {
    const VectorXd& t = times[static_cast<std::size_t>(j)];
    d.block(j * q, offset, q, t.size()) = embedding_operator(basis, t);
    noise.diagonal().segment(offset, t.size()).setConstant(noise_var[static_cast<std::size_t>(j)]);
    if (mean)
      for (Index k = 0; k < t.size(); ++k) mu[offset + k] = mean(j, t[k]);
    offset += t.size();
  }
  EmbeddingMoments out;
  out.mean = d * mu;
  out.covariance = d * (pooled_covariance(kernel, times, cross) + noise) * d.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

namespace {

struct Quadrature {
  VectorXd nodes;
  VectorXd weights;
};

Quadrature trapezoid(Index points) {
  if (points < 64) throw Error(ErrorKind::InvalidArgument, "quadrature needs at least 64 points");
  Quadrature out{VectorXd::LinSpaced(points, 0.0, 1.0),
                 VectorXd::Constant(points, 1.0 / static_cast<double>(points - 1))};
  out.weights[0] *= 0.5;
  out.weights[points - 1] *= 0.5;
  return out;
}

MatrixXd inverse_gram(const MatrixXd& gram) {
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13))
    throw Error(ErrorKind::SingularGram, "population Gram matrix K is numerically singular");
  return llt.solve(MatrixXd::Identity(gram.rows(), gram.cols()));
}

}  // namespace

PopulationMoments compute_population_gram_and_asymptotic_cov(const Kernel& kernel,
                                                             const BasisSpec& basis,
                                                             const std::vector<double>& noise_var,
                                                             Index quadrature_points,
                                                             const std::optional<Kernel>& cross) {
  basis.validate();
  const Quadrature quad = trapezoid(quadrature_points);
  const Index m = static_cast<Index>(noise_var.size());
  const Index q = basis.q;
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "need at least one feature");

  const MatrixXd phi = design_matrix(basis, quad.nodes);  // q x P
  const MatrixXd weighted = phi * quad.weights.asDiagonal();
  PopulationMoments out;
  out.gram = weighted * phi.transpose();
  const MatrixXd k_inv = inverse_gram(out.gram);

  const VectorXd phi_integral = weighted.rowwise().sum();
  const MatrixXd auto_part = weighted * covariance_matrix(kernel, quad.nodes, quad.nodes) * weighted.transpose();
  MatrixXd cross_part = MatrixXd::Zero(q, q);
  if (cross) cross_part = weighted * covariance_matrix(*cross, quad.nodes, quad.nodes) * weighted.transpose();

  out.covariance = MatrixXd::Zero(m * q, m * q);
  for (Index a = 0; a < m; ++a) {
    for (Index b = 0; b < m; ++b) {
      MatrixXd inner = (a == b) ? auto_part : cross_part;
      if (a == b) inner += noise_var[static_cast<std::size_t>(a)] * phi_integral * phi_integral.transpose();
      out.covariance.block(a * q, b * q, q, q) = k_inv * inner * k_inv;
    }
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

VectorXd population_mean_coefficients(const BasisSpec& basis, const FeatureMean& mean, Index m,
                                      Index quadrature_points) {
  basis.validate();
  const Quadrature quad = trapezoid(quadrature_points);
  const Index q = basis.q;
  const MatrixXd phi = design_matrix(basis, quad.nodes);
  const MatrixXd weighted = phi * quad.weights.asDiagonal();
  const MatrixXd k_inv = inverse_gram(weighted * phi.transpose());
  VectorXd beta(m * q);
  for (Index j = 0; j < m; ++j) {
    VectorXd mu(quad.nodes.size());
    for (Index k = 0; k < mu.size(); ++k) mu[k] = mean ? mean(j, quad.nodes[k]) : 0.0;
    beta.segment(j * q, q) = k_inv * (weighted * mu);
  }
  return beta;
}

}  // namespace psimf
