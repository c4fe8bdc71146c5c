#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "psimf/embed.hpp"

using namespace psimf;

TEST_CASE("physicists' Hermite polynomials") {
  CHECK(hermite_physicist(0, 3.7) == 1.0);
  CHECK(hermite_physicist(2, 0.0) == -2.0);
  CHECK(hermite_physicist(3, 1.0) == -4.0);
  for (int n = 0; n <= 12; ++n)
    for (double x : {-1.3, -0.2, 0.0, 0.45, 0.9, 2.1})
      CHECK(hermite_physicist(n, x) == doctest::Approx(oracle::hermite_explicit(n, x)).epsilon(1e-10));
  CHECK_THROWS_AS(hermite_physicist(kMaxHermiteOrder + 1, 0.5), Error);
  try {
    hermite_physicist(kMaxHermiteOrder + 1, 0.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OrderTooLarge);
  }
}

TEST_CASE("Mercer eigenfunctions") {
  CHECK(eigenfunction(0, 0.0, 0.99) == doctest::Approx(std::pow(1.99 / 0.01, 0.25)).epsilon(1e-12));
  CHECK(eigenfunction(0, 0.0, 0.99) == doctest::Approx(3.7559).epsilon(1e-4));
  CHECK(eigenfunction(1, 0.0, 0.3) == 0.0);
  double prev = eigenfunction(0, 0.0, 0.7);
  for (int k = 1; k <= 20; ++k) {
    const double v = eigenfunction(0, k * 0.1, 0.7);
    CHECK(v < prev);
    CHECK(eigenfunction(0, -k * 0.1, 0.7) == doctest::Approx(v));
    prev = v;
  }
  // Direct formula with the normaliser written out.
  const double rho = 0.6, x = 0.37;
  for (int i = 0; i < 8; ++i) {
    const double norm = std::pow(2.0, i) * std::tgamma(i + 1.0) * std::sqrt((1 - rho) / (1 + rho));
    const double expected = oracle::hermite_explicit(i, x) * std::exp(-rho / (1 + rho) * x * x) / std::sqrt(norm);
    CHECK(eigenfunction(i, x, rho) == doctest::Approx(expected).epsilon(1e-10));
  }
  // Large orders stay finite thanks to log-space normalisation.
  CHECK(std::isfinite(eigenfunction(60, 0.5, 0.99)));
}

TEST_CASE("design matrix") {
  const BasisSpec one = BasisSpec::custom({[](double) { return 1.0; }}, 0.0);
  VectorXd t3(3);
  t3 << 0.1, 0.5, 0.8;
  CHECK(design_matrix(one, t3) == MatrixXd::Ones(1, 3));

  const BasisSpec h = BasisSpec::hermite(3, 0.99, 0.01);
  const VectorXd t15 = VectorXd::LinSpaced(15, 0.0, 1.0);
  const MatrixXd phi = design_matrix(h, t15);
  CHECK(phi.rows() == 3);
  CHECK(phi.cols() == 15);
  CHECK(phi(1, 0) == 0.0);
  for (int s = 0; s < 3; ++s)
    for (int k = 0; k < 15; ++k) CHECK(phi(s, k) == eigenfunction(s, t15[k], 0.99));
}

TEST_CASE("ridge embedding of one record") {
  const BasisSpec zero_penalty = BasisSpec::custom({[](double) { return 1.0; }}, 0.0);
  VectorXd t(2), v(2);
  t << 0.25, 0.75;
  v << 2.0, 4.0;
  CHECK(embed_record(zero_penalty, t, v)[0] == doctest::Approx(3.0));
  const BasisSpec unit_penalty = BasisSpec::custom({[](double) { return 1.0; }}, 1.0);
  CHECK(embed_record(unit_penalty, t, v)[0] == doctest::Approx(2.0));
  const BasisSpec huge = BasisSpec::hermite(3, 0.99, 1e12);
  CHECK(embed_record(huge, t, v).cwiseAbs().maxCoeff() < 1e-9);

  // Normal equations with a generic basis.
  const BasisSpec h = BasisSpec::hermite(3, 0.8, 0.05);
  Rng rng(4);
  std::normal_distribution<double> normal;
  VectorXd times = VectorXd::LinSpaced(9, 0.05, 0.95), values(9);
  for (int k = 0; k < 9; ++k) values[k] = normal(rng);
  const MatrixXd phi = design_matrix(h, times);
  const VectorXd alpha = embed_record(h, times, values);
  CHECK(((phi * phi.transpose() + 0.05 * MatrixXd::Identity(3, 3)) * alpha - phi * values).norm() < 1e-10);

  CHECK_THROWS_AS(embed_record(h, times, VectorXd::Zero(3)), Error);
}

TEST_CASE("unpenalised fit with fewer points than functions is singular") {
  const BasisSpec h = BasisSpec::hermite(3, 0.99, 0.0);
  VectorXd t(2);
  t << 0.2, 0.6;
  try {
    embedding_operator(h, t);
    FAIL("expected SingularSystem");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularSystem);
  }
}

TEST_CASE("dataset embedding") {
  LongitudinalDataset zeros(3, 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) {
      zeros.at(i, j).times = VectorXd::LinSpaced(5, 0.0, 1.0);
      zeros.at(i, j).values = VectorXd::Zero(5);
    }
  const BasisSpec h = BasisSpec::hermite(3, 0.99, 0.01);
  const EmbeddedTensor z = embed_dataset(h, zeros);
  CHECK(z.n() == 3);
  CHECK(z.dim() == 6);
  CHECK(z.data.isZero(0.0));

  LongitudinalDataset single(1, 1);
  single.at(0, 0).times = VectorXd::LinSpaced(6, 0.1, 0.9);
  single.at(0, 0).values = VectorXd::LinSpaced(6, -1.0, 2.0);
  const EmbeddedTensor s = embed_dataset(h, single);
  CHECK(s.data.row(0).transpose().isApprox(embed_record(h, single.at(0, 0).times, single.at(0, 0).values)));
  CHECK(s.slice(0).rows() == 1);

  // Constant basis and constant records: alpha_i = c_i r / (r + lambda).
  const double lambda = 0.5;
  const BasisSpec one = BasisSpec::custom({[](double) { return 1.0; }}, lambda);
  LongitudinalDataset constant(4, 1);
  for (Index i = 0; i < 4; ++i) {
    const Index r = 3 + i;
    constant.at(i, 0).times = VectorXd::LinSpaced(r, 0.0, 1.0);
    constant.at(i, 0).values = VectorXd::Constant(r, 1.5 * i - 2.0);
  }
  const EmbeddedTensor c = embed_dataset(one, constant);
  for (Index i = 0; i < 4; ++i) {
    const double r = 3.0 + i;
    CHECK(c.data(i, 0) == doctest::Approx((1.5 * i - 2.0) * r / (r + lambda)));
  }

  // Feature-major layout.
  LongitudinalDataset two(1, 2);
  two.at(0, 0) = single.at(0, 0);
  two.at(0, 1).times = single.at(0, 0).times;
  two.at(0, 1).values = -single.at(0, 0).values;
  const EmbeddedTensor tw = embed_dataset(h, two);
  CHECK(tw.data.row(0).segment(3, 3).isApprox(-tw.data.row(0).segment(0, 3)));
  CHECK(tw.slice(0).row(1).isApprox(tw.data.row(0).segment(3, 3)));
}

TEST_CASE("basis validation") {
  CHECK_THROWS_AS(BasisSpec::hermite(0, 0.99, 0.01).validate(), Error);
  CHECK_THROWS_AS(BasisSpec::hermite(3, 1.0, 0.01).validate(), Error);
  CHECK_THROWS_AS(BasisSpec::hermite(3, 0.5, -1.0).validate(), Error);
  CHECK_THROWS_AS(BasisSpec::hermite(kMaxHermiteOrder + 2, 0.5, 0.1).validate(), Error);
}
