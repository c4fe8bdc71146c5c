#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "psimf/simkit.hpp"

using namespace psimf;

TEST_CASE("kernels are one on the diagonal and symmetric") {
  const std::vector<Kernel> kernels = {RationalQuadratic{1.0}, RationalQuadratic{0.3}, Periodic{}, Rbf{0.99},
                                       TruncatedLocalPeriodic{}};
  for (const Kernel& k : kernels) {
    for (int a = 0; a <= 20; ++a) {
      const double x = a / 20.0;
      if (!std::holds_alternative<TruncatedLocalPeriodic>(k)) CHECK(evaluate(k, x, x) == doctest::Approx(1.0));
      for (int b = 0; b <= 20; ++b) CHECK(evaluate(k, x, b / 20.0) == evaluate(k, b / 20.0, x));
    }
  }
}

TEST_CASE("kernel values from their formulas") {
  CHECK(covariance_matrix(RationalQuadratic{1.0}, VectorXd::Constant(1, 0.3), VectorXd::Constant(1, 0.3))(0, 0) ==
        1.0);
  CHECK(evaluate(RationalQuadratic{0.5}, 0.1, 0.6) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(evaluate(Periodic{}, 0.0, 0.5) == doctest::Approx(1.0));
  CHECK(evaluate(Periodic{}, 0.0, 0.125) == doctest::Approx(std::exp(-4.0)));
  CHECK(evaluate(TruncatedLocalPeriodic{}, 0.0, 0.1) == doctest::Approx(0.01));
  CHECK(evaluate(TruncatedLocalPeriodic{}, 0.0, 0.5) == doctest::Approx(std::exp(-0.5)));
  CHECK(evaluate(Rbf{0.5}, 0.0, 1.0) == doctest::Approx(std::exp(-0.5 / 0.75)));
  const Kernel zero = zero_kernel();
  CHECK(evaluate(zero, 0.2, 0.7) == 0.0);
}

TEST_CASE("tabulated kernel interpolates bilinearly") {
  MatrixXd grid(2, 2);
  grid << 1.0, 2.0, 3.0, 4.0;
  const Kernel k = Tabulated{grid};
  CHECK(evaluate(k, 0.0, 0.0) == doctest::Approx(1.0));
  CHECK(evaluate(k, 1.0, 1.0) == doctest::Approx(4.0));
  CHECK(evaluate(k, 0.5, 0.5) == doctest::Approx(2.5));
  CHECK(evaluate(k, 0.25, 0.0) == doctest::Approx(1.5));
}

TEST_CASE("covariance matrix shape and pooled blocks") {
  VectorXd a(3), b(2);
  a << 0.1, 0.2, 0.9;
  b << 0.4, 0.5;
  const MatrixXd c = covariance_matrix(RationalQuadratic{1.0}, a, b);
  CHECK(c.rows() == 3);
  CHECK(c.cols() == 2);
  const MatrixXd pooled = pooled_covariance(RationalQuadratic{1.0}, {a, b});
  CHECK(pooled.rows() == 5);
  CHECK(pooled.block(0, 3, 3, 2).isZero());
  CHECK(pooled.block(3, 3, 2, 2).isApprox(covariance_matrix(RationalQuadratic{1.0}, b, b)));
  const MatrixXd crossed = pooled_covariance(RationalQuadratic{1.0}, {a, b}, Kernel{Periodic{}});
  CHECK(crossed.block(0, 3, 3, 2).isApprox(covariance_matrix(Periodic{}, a, b)));
}

TEST_CASE("psd factor reproduces PSD kernels and repairs indefinite ones") {
  Rng rng(7);
  const VectorXd t = draw_times(25, rng);
  for (const Kernel& k : {Kernel{RationalQuadratic{1.0}}, Kernel{Periodic{}}}) {
    const MatrixXd cov = covariance_matrix(k, t, t);
    const PsdFactor f = psd_factor(cov);
    CHECK((f.factor * f.factor.transpose() - cov).cwiseAbs().maxCoeff() < 1e-6);
  }
  const MatrixXd tlp = covariance_matrix(TruncatedLocalPeriodic{}, t, t);
  const PsdFactor f = psd_factor(tlp);
  CHECK(f.clipped);
  CHECK(f.min_eigenvalue < 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(f.factor * f.factor.transpose());
  CHECK(eig.eigenvalues().minCoeff() > 0.0);

  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(psd_factor(bad), Error);
}

TEST_CASE("zero kernel with no noise gives exact zeros") {
  SamplingPlan plan;
  plan.n = 2;
  plan.m = 1;
  plan.r = 3;
  plan.noise_var = {0.0};
  plan.seed = 11;
  const LongitudinalDataset d = generate_dataset(zero_kernel(), MeanSpec::zero(), plan);
  REQUIRE(d.n() == 2);
  for (Index i = 0; i < 2; ++i) {
    CHECK(d.at(i, 0).values.isZero(0.0));
    CHECK(d.at(i, 0).times.minCoeff() >= 0.0);
    CHECK(d.at(i, 0).times.maxCoeff() <= 1.0);
  }
}

TEST_CASE("generated datasets have the planned shape and are reproducible") {
  SamplingPlan plan;
  plan.n = 30;
  plan.m = 2;
  plan.r = 15;
  plan.noise_var = {0.1, 0.2};
  plan.seed = 99;
  const LongitudinalDataset a = generate_dataset(RationalQuadratic{1.0}, MeanSpec::two_groups(1, -1, 15), plan);
  const LongitudinalDataset b = generate_dataset(RationalQuadratic{1.0}, MeanSpec::two_groups(1, -1, 15), plan);
  CHECK(a == b);
  CHECK_NOTHROW(a.validate());
  for (Index i = 0; i < a.n(); ++i)
    for (Index j = 0; j < a.m(); ++j) {
      CHECK(a.length(i, j) == 15);
      CHECK(a.at(i, j).values.size() == 15);
      CHECK(std::is_sorted(a.at(i, j).times.data(), a.at(i, j).times.data() + 15));
    }

  // Subject i depends only on (seed, i).
  SamplingPlan bigger = plan;
  bigger.n = 40;
  const LongitudinalDataset c = generate_dataset(RationalQuadratic{1.0}, MeanSpec::two_groups(1, -1, 15), bigger);
  for (Index i = 0; i < 30; ++i) CHECK(c.at(i, 1).values == a.at(i, 1).values);

  plan.seed = 100;
  CHECK_FALSE(generate_dataset(RationalQuadratic{1.0}, MeanSpec::zero(), plan) == a);
}

TEST_CASE("ragged plans and shared time grids") {
  SamplingPlan plan;
  plan.n = 3;
  plan.m = 2;
  plan.r_per_record = {1, 2, 3, 4, 5, 6};
  plan.seed = 5;
  const LongitudinalDataset d = generate_dataset(Periodic{}, MeanSpec::zero(), plan);
  CHECK(d.length(2, 1) == 6);
  CHECK(d.length(0, 0) == 1);

  SamplingPlan shared;
  shared.n = 4;
  shared.m = 2;
  shared.r = 5;
  shared.shared_times = true;
  const LongitudinalDataset s = generate_dataset(Periodic{}, MeanSpec::zero(), shared);
  for (Index i = 1; i < 4; ++i) CHECK(s.at(i, 1).times == s.at(0, 1).times);

  SamplingPlan bad;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad.n = 3;
  bad.noise_var = {0.1, 0.1, 0.1};
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("MGP samples match the kernel covariance plus noise") {
  VectorXd t(3);
  t << 0.1, 0.4, 0.9;
  const int reps = 20000;
  MatrixXd draws(reps, 3);
  for (int s = 0; s < reps; ++s) {
    Rng rng = make_stream(2024, static_cast<std::uint64_t>(s));
    draws.row(s) = sample_mgp_subject(RationalQuadratic{1.0}, MeanSpec::zero(), 0, {t}, {0.1}, rng)[0].transpose();
  }
  const MatrixXd centred = draws.rowwise() - draws.colwise().mean();
  const MatrixXd emp = centred.transpose() * centred / (reps - 1.0);
  const MatrixXd se = oracle::covariance_standard_error(draws);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const double d = t[a] - t[b];
      const double expected = 1.0 / std::sqrt(1.0 + d * d) + (a == b ? 0.1 : 0.0);
      CHECK(std::abs(emp(a, b) - expected) < 3.0 * se(a, b));
    }

  Rng r1 = make_stream(3, 0), r2 = make_stream(3, 0);
  CHECK(sample_mgp_subject(Periodic{}, MeanSpec::zero(), 0, {t}, {0.1}, r1)[0] ==
        sample_mgp_subject(Periodic{}, MeanSpec::zero(), 0, {t}, {0.1}, r2)[0]);
}

TEST_CASE("Wiener process starts at zero and has unit variance at time one") {
  VectorXd zero(1);
  zero << 0.0;
  Rng rng(1);
  CHECK(sample_misspecified_subject(Wiener{}, zero, rng)[0] == 0.0);

  VectorXd t(2);
  t << 0.0, 1.0;
  const int reps = 20000;
  VectorXd end(reps);
  for (int s = 0; s < reps; ++s) {
    Rng r = make_stream(77, static_cast<std::uint64_t>(s));
    end[s] = sample_misspecified_subject(Wiener{}, t, r)[1];
  }
  const double var = (end.array() - end.mean()).square().sum() / (reps - 1.0);
  CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(2.0 / reps));
}

TEST_CASE("stationary OU lag covariance") {
  VectorXd t(2);
  t << 0.2, 0.7;
  const int reps = 20000;
  MatrixXd draws(reps, 2);
  for (int s = 0; s < reps; ++s) {
    Rng r = make_stream(78, static_cast<std::uint64_t>(s));
    draws.row(s) = sample_misspecified_subject(OrnsteinUhlenbeck{1.0, 0.0, 1.0}, t, r).transpose();
  }
  const MatrixXd centred = draws.rowwise() - draws.colwise().mean();
  const double lag = (centred.col(0).cwiseProduct(centred.col(1))).sum() / (reps - 1.0);
  const double se = oracle::covariance_standard_error(draws)(0, 1);
  CHECK(std::abs(lag - 0.5 * std::exp(-0.5)) < 3.0 * se);
}

TEST_CASE("exponential Brownian with zero volatility is deterministic") {
  VectorXd t(3);
  t << 0.0, 0.5, 1.0;
  Rng rng(3);
  const VectorXd v = sample_misspecified_subject(ExponentialBrownian{0.4, 0.0}, t, rng);
  for (int k = 0; k < 3; ++k) CHECK(v[k] == doctest::Approx(std::exp(0.4 * t[k])));
  CHECK_THROWS_AS(sample_misspecified_subject(ExponentialBrownian{0.0, -1.0}, t, rng), Error);
  CHECK_THROWS_AS(sample_misspecified_subject(OrnsteinUhlenbeck{0.0, 0.0, 1.0}, t, rng), Error);
}
