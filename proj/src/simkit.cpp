#include "psimf/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace psimf {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

double interpolate_grid(const MatrixXd& grid, double x, double y) {
  const Index g = grid.rows();
  if (g == 0) return 0.0;
  if (g == 1) return grid(0, 0);
  const double scale = static_cast<double>(g - 1);
  const double fx = std::clamp(x, 0.0, 1.0) * scale;
  const double fy = std::clamp(y, 0.0, 1.0) * scale;
  const Index ix = std::min<Index>(static_cast<Index>(fx), g - 2);
  const Index iy = std::min<Index>(static_cast<Index>(fy), g - 2);
  const double ax = fx - static_cast<double>(ix);
  const double ay = fy - static_cast<double>(iy);
  return (1 - ax) * (1 - ay) * grid(ix, iy) + ax * (1 - ay) * grid(ix + 1, iy) +
         (1 - ax) * ay * grid(ix, iy + 1) + ax * ay * grid(ix + 1, iy + 1);
}

// Uniform draws for one subject's time grid come from a stream disjoint from subject streams.
constexpr std::uint64_t kSharedTimesSalt = 0x7A3C'91E5'0B6D'F248ULL;

}  // namespace

Kernel zero_kernel() { return Tabulated{MatrixXd::Zero(2, 2)}; }

double evaluate(const Kernel& kernel, double x, double y) {
  using std::numbers::pi;
  return std::visit(
      Overloaded{
          [&](const RationalQuadratic& k) {
            const double d = x - y;
            return 1.0 / std::sqrt(1.0 + d * d / (k.length_scale * k.length_scale));
          },
          [&](const Periodic&) {
            const double s = std::sin(2.0 * pi * std::abs(x - y));
            return std::exp(-8.0 * s * s);
          },
          [&](const TruncatedLocalPeriodic&) {
            const double d = std::abs(x - y);
            if (d > 1.0 / 3.0 && d < 2.0 / 3.0) {
              const double s = std::sin(2.0 * pi * d);
              return std::exp(-8.0 * s * s) * std::exp(-2.0 * d * d);
            }
            return 0.01;
          },
          [&](const Rbf& k) {
            const double d = x - y;
            return std::exp(-k.rho / (1.0 - k.rho * k.rho) * d * d);
          },
          [&](const Tabulated& k) { return interpolate_grid(k.values, x, y); },
      },
      kernel);
}

MatrixXd covariance_matrix(const Kernel& kernel, const VectorXd& times_a, const VectorXd& times_b) {
  MatrixXd out(times_a.size(), times_b.size());
  for (Index k2 = 0; k2 < times_b.size(); ++k2)
    for (Index k1 = 0; k1 < times_a.size(); ++k1) out(k1, k2) = evaluate(kernel, times_a[k1], times_b[k2]);
  return out;
}

MatrixXd pooled_covariance(const Kernel& kernel, const std::vector<VectorXd>& times,
                           const std::optional<Kernel>& cross) {
  std::vector<Index> offset(times.size() + 1, 0);
  for (std::size_t j = 0; j < times.size(); ++j) offset[j + 1] = offset[j] + times[j].size();
  MatrixXd out = MatrixXd::Zero(offset.back(), offset.back());
  for (std::size_t a = 0; a < times.size(); ++a) {
    for (std::size_t b = 0; b < times.size(); ++b) {
      if (a != b && !cross) continue;
      const Kernel& k = (a == b) ? kernel : *cross;
      out.block(offset[a], offset[b], times[a].size(), times[b].size()) =
          covariance_matrix(k, times[a], times[b]);
    }
  }
  return out;
}

double MeanSpec::value(Index subject, double /*t*/) const {
  return std::visit(Overloaded{
                        [&](const ConstantMeans& c) {
                          if (c.values.empty()) return 0.0;
                          return c.values.at(static_cast<std::size_t>(subject));
                        },
                        [&](const TwoGroupMeans& g) { return subject < g.split ? g.first : g.second; },
                    },
                    form);
}

Index SamplingPlan::record_length(Index i, Index j) const {
  if (!r_per_record.empty()) return r_per_record.at(static_cast<std::size_t>(i * m + j));
  return r;
}

double SamplingPlan::noise(Index j) const {
  if (noise_var.size() == 1) return noise_var.front();
  return noise_var.at(static_cast<std::size_t>(j));
}

void SamplingPlan::validate() const {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "plan requires n >= 2");
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "plan requires m >= 1");
  if (r_per_record.empty()) {
    if (r < 1) throw Error(ErrorKind::InvalidArgument, "plan requires r >= 1");
  } else {
    if (static_cast<Index>(r_per_record.size()) != n * m)
      throw Error(ErrorKind::InvalidArgument, "r_per_record must have n*m entries");
    if (shared_times)
      throw Error(ErrorKind::InvalidArgument, "shared_times needs a fixed record length");
    for (Index len : r_per_record)
      if (len < 1) throw Error(ErrorKind::InvalidArgument, "every record length must be >= 1");
  }
  if (noise_var.empty() || (noise_var.size() != 1 && static_cast<Index>(noise_var.size()) != m))
    throw Error(ErrorKind::InvalidArgument, "noise_var must have 1 or m entries");
  for (double s : noise_var)
    if (!(s >= 0.0) || !std::isfinite(s))
      throw Error(ErrorKind::InvalidArgument, "noise variances must be finite and >= 0");
}

PsdFactor psd_factor(const MatrixXd& covariance) {
  const Index dim = covariance.rows();
  PsdFactor out;
  if (dim == 0) return out;
  if (!covariance.allFinite())
    throw Error(ErrorKind::FactorizationFailure, "covariance has non-finite entries");
  const MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success)
    throw Error(ErrorKind::FactorizationFailure, "eigendecomposition did not converge");
  VectorXd lambda = eig.eigenvalues();
  out.min_eigenvalue = lambda.minCoeff();
  out.max_eigenvalue = lambda.maxCoeff();
  if (out.max_eigenvalue <= 0.0 && sym.cwiseAbs().maxCoeff() > 0.0)
    throw Error(ErrorKind::FactorizationFailure, "covariance has no positive spectrum");
  out.clipped = out.min_eigenvalue < 0.0;
  lambda = lambda.cwiseMax(0.0);
  // Jitter is isotropic, so it commutes with the eigenbasis.
  const double jitter = 1e-10 * lambda.sum() / static_cast<double>(dim);
  lambda.array() += jitter;
  out.factor = eig.eigenvectors() * lambda.cwiseSqrt().asDiagonal();
  return out;
}

std::vector<VectorXd> sample_mgp_subject(const Kernel& kernel, const MeanSpec& mean, Index subject,
                                         const std::vector<VectorXd>& times,
                                         const std::vector<double>& noise_var, Rng& rng,
                                         const std::optional<Kernel>& cross) {
  if (noise_var.size() != times.size())
    throw Error(ErrorKind::DimensionMismatch, "one noise variance per feature is required");
  const PsdFactor factor = psd_factor(pooled_covariance(kernel, times, cross));
  const Index dim = factor.factor.rows();

  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd z(dim);
  for (Index k = 0; k < dim; ++k) z[k] = normal(rng);
  const VectorXd path = dim > 0 ? VectorXd(factor.factor * z) : VectorXd();

  std::vector<VectorXd> out;
  out.reserve(times.size());
  Index offset = 0;
  for (std::size_t j = 0; j < times.size(); ++j) {
    const Index r = times[j].size();
    const double sd = std::sqrt(noise_var[j]);
    VectorXd values(r);
    for (Index k = 0; k < r; ++k) {
      const double eps = normal(rng);
      values[k] = mean.value(subject, times[j][k]) + path[offset + k] + sd * eps;
    }
    offset += r;
    out.push_back(std::move(values));
  }
  return out;
}

VectorXd draw_times(Index r, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  VectorXd t(r);
  for (Index k = 0; k < r; ++k) t[k] = unif(rng);
  std::sort(t.data(), t.data() + r);
  return t;
}

namespace {

template <typename SampleSubject>
LongitudinalDataset generate_with(const SamplingPlan& plan, SampleSubject&& sample) {
  plan.validate();
  std::vector<VectorXd> shared;
  if (plan.shared_times) {
    for (Index j = 0; j < plan.m; ++j) {
      Rng rng = make_stream(plan.seed ^ kSharedTimesSalt, static_cast<std::uint64_t>(j));
      shared.push_back(draw_times(plan.r, rng));
    }
  }
  LongitudinalDataset data(plan.n, plan.m);
  for (Index i = 0; i < plan.n; ++i) {
    Rng rng = make_stream(plan.seed, static_cast<std::uint64_t>(i));
    std::vector<VectorXd> times;
    for (Index j = 0; j < plan.m; ++j)
      times.push_back(plan.shared_times ? shared[j] : draw_times(plan.record_length(i, j), rng));
    std::vector<VectorXd> values = sample(i, times, rng);
    for (Index j = 0; j < plan.m; ++j) {
      data.at(i, j).times = std::move(times[j]);
      data.at(i, j).values = std::move(values[j]);
    }
  }
  return data;
}

}  // namespace

LongitudinalDataset generate_dataset(const Kernel& kernel, const MeanSpec& mean,
                                     const SamplingPlan& plan, const std::optional<Kernel>& cross) {
  std::vector<double> noise;
  for (Index j = 0; j < plan.m; ++j) noise.push_back(plan.noise(j));
  return generate_with(plan, [&](Index i, const std::vector<VectorXd>& times, Rng& rng) {
    return sample_mgp_subject(kernel, mean, i, times, noise, rng, cross);
  });
}

VectorXd sample_misspecified_subject(const MisspecProcess& process, const VectorXd& times, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Index r = times.size();
  VectorXd out(r);
  std::visit(
      Overloaded{
          [&](const Wiener&) {
            double w = 0.0, prev = 0.0;
            for (Index k = 0; k < r; ++k) {
              w += std::sqrt(times[k] - prev) * normal(rng);
              prev = times[k];
              out[k] = w;
            }
          },
          [&](const ExponentialBrownian& p) {
            if (!(p.vol >= 0.0) || !std::isfinite(p.drift))
              throw Error(ErrorKind::InvalidArgument, "exponential Brownian needs finite drift and vol >= 0");
            double w = 0.0, prev = 0.0;
            for (Index k = 0; k < r; ++k) {
              w += std::sqrt(times[k] - prev) * normal(rng);
              prev = times[k];
              out[k] = std::exp(p.drift * times[k] + p.vol * w);
            }
          },
          [&](const OrnsteinUhlenbeck& p) {
            if (!(p.theta > 0.0)) throw Error(ErrorKind::InvalidArgument, "OU theta must be > 0");
            if (!(p.vol >= 0.0)) throw Error(ErrorKind::InvalidArgument, "OU vol must be >= 0");
            double x = p.mean + p.vol / std::sqrt(2.0 * p.theta) * normal(rng);
            double prev = r > 0 ? times[0] : 0.0;
            for (Index k = 0; k < r; ++k) {
              const double dt = times[k] - prev;
              if (k > 0) {
                const double decay = std::exp(-p.theta * dt);
                const double sd = p.vol * std::sqrt((1.0 - decay * decay) / (2.0 * p.theta));
                x = p.mean + (x - p.mean) * decay + sd * normal(rng);
              }
              prev = times[k];
              out[k] = x;
            }
          },
      },
      process);
  return out;
}

LongitudinalDataset generate_misspecified_dataset(const MisspecProcess& process,
                                                  const SamplingPlan& plan) {
  return generate_with(plan, [&](Index, const std::vector<VectorXd>& times, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<VectorXd> values;
    for (std::size_t j = 0; j < times.size(); ++j) {
      VectorXd v = sample_misspecified_subject(process, times[j], rng);
      const double sd = std::sqrt(plan.noise(static_cast<Index>(j)));
      for (Index k = 0; k < v.size(); ++k) v[k] += sd * normal(rng);
      values.push_back(std::move(v));
    }
    return values;
  });
}

}  // namespace psimf
