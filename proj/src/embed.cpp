#include "psimf/embed.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace psimf {

double hermite_physicist(int order, double x) {
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "Hermite order must be >= 0");
  if (order > kMaxHermiteOrder)
    throw Error(ErrorKind::OrderTooLarge, "Hermite order " + std::to_string(order) + " exceeds " +
                                              std::to_string(kMaxHermiteOrder));
  double prev = 1.0;
  if (order == 0) return prev;
  double cur = 2.0 * x;
  for (int k = 1; k < order; ++k) {
    const double next = 2.0 * x * cur - 2.0 * k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double eigenfunction(int order, double x, double rho) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must lie in (0,1)");
  const double h = hermite_physicist(order, x);
  // log N_i = i log 2 + log i! + 0.5 log((1-rho)/(1+rho))
  const double log_norm = order * std::numbers::ln2 + std::lgamma(order + 1.0) +
                          0.5 * std::log((1.0 - rho) / (1.0 + rho));
  return h * std::exp(-0.5 * log_norm - rho / (1.0 + rho) * x * x);
}

double BasisSpec::operator()(int s, double t) const {
  if (variant == Variant::Custom) return functions.at(static_cast<std::size_t>(s))(t);
  return eigenfunction(s, t, rho);
}

void BasisSpec::validate() const {
  if (q < 1) throw Error(ErrorKind::InvalidArgument, "basis requires q >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw Error(ErrorKind::InvalidArgument, "ridge lambda must be finite and >= 0");
  if (variant == Variant::HermiteRbf) {
    if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must lie in (0,1)");
    if (q - 1 > kMaxHermiteOrder)
      throw Error(ErrorKind::OrderTooLarge, "q exceeds the Hermite order guard");
  } else if (static_cast<int>(functions.size()) != q) {
    throw Error(ErrorKind::InvalidArgument, "custom basis needs exactly q functions");
  }
}

MatrixXd design_matrix(const BasisSpec& basis, const VectorXd& times) {
  MatrixXd phi(basis.q, times.size());
  for (Index k = 0; k < times.size(); ++k)
    for (int s = 0; s < basis.q; ++s) phi(s, k) = basis(s, times[k]);
  return phi;
}

MatrixXd embedding_operator(const BasisSpec& basis, const VectorXd& times) {
  const MatrixXd phi = design_matrix(basis, times);
  MatrixXd gram = phi * phi.transpose();
  gram.diagonal().array() += basis.lambda;
  Eigen::LLT<MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-13))
    throw Error(ErrorKind::SingularSystem,
                "regularised Gram matrix is singular (r = " + std::to_string(times.size()) +
                    ", q = " + std::to_string(basis.q) + ")");
  return llt.solve(phi);
}

VectorXd embed_record(const BasisSpec& basis, const VectorXd& times, const VectorXd& values) {
  if (times.size() != values.size())
    throw Error(ErrorKind::DimensionMismatch, "times and values differ in length");
  if (times.size() == 0) throw Error(ErrorKind::EmptyRecord, "cannot embed an empty record");
  return embedding_operator(basis, times) * values;
}

EmbeddedTensor embed_dataset(const BasisSpec& basis, const LongitudinalDataset& data) {
  basis.validate();
  const Index q = basis.q;
  EmbeddedTensor out(MatrixXd(data.n(), data.m() * q), data.m(), q);
  for (Index i = 0; i < data.n(); ++i) {
    for (Index j = 0; j < data.m(); ++j) {
      const Record& rec = data.at(i, j);
      try {
        out.data.row(i).segment(j * q, q) = embed_record(basis, rec.times, rec.values).transpose();
      } catch (const Error& e) {
        throw Error(e.kind(), "record (" + std::to_string(i) + ", " + std::to_string(j) + "): " + e.detail());
      }
    }
  }
  return out;
}

}  // namespace psimf
