#pragma once

// Reference computations that share no code with the library. They are slow and simple
// on purpose and only used to produce expected values inside tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// H_n(x) = n! sum_k (-1)^k (2x)^(n-2k) / (k! (n-2k)!)
inline double hermite_explicit(int n, double x) {
  double sum = 0.0;
  for (int k = 0; 2 * k <= n; ++k) {
    const double term = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - 2 * k + 1.0));
    sum += ((k % 2) ? -1.0 : 1.0) * term * std::pow(2.0 * x, n - 2 * k);
  }
  return sum;
}

// Density of c * chi_d written from the textbook formula.
inline double chi_pdf(double x, int d, double c) {
  if (x < 0.0) return 0.0;
  const double u = x / c;
  return std::exp((1.0 - d / 2.0) * std::log(2.0) + (d - 1.0) * std::log(u) - u * u / 2.0 - std::lgamma(d / 2.0)) / c;
}

// Composite Simpson rule with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Upper tail of c * chi_d by quadrature of the density over [x, x + 40c].
inline double chi_tail(double x, int d, double c) {
  if (x <= 0.0) return 1.0;
  return simpson([&](double t) { return chi_pdf(t, d, c); }, x, x + 40.0 * c + 10.0 * std::sqrt(d) * c, 40000);
}

// Denman-Beavers iteration for the inverse square root of an SPD matrix.
inline MatrixXd inv_sqrt_db(const MatrixXd& a) {
  MatrixXd y = a, z = MatrixXd::Identity(a.rows(), a.cols());
  for (int it = 0; it < 100; ++it) {
    const MatrixXd yi = y.inverse(), zi = z.inverse();
    y = 0.5 * (y + zi);
    z = 0.5 * (z + yi);
  }
  return z;
}

// Within-cluster sum of squares of rows for labels in {0,1}.
inline double wcss(const MatrixXd& x, const std::vector<int>& labels) {
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.cols());
    int count = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (labels[i] == c) {
        mean += x.row(i);
        ++count;
      }
    if (count == 0) return std::numeric_limits<double>::infinity();
    mean /= count;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      if (labels[i] == c) total += (x.row(i) - mean).squaredNorm();
  }
  return total;
}

// Exhaustive search of the best 2-means split; labels normalised so subject 0 has label 0.
inline std::vector<int> best_two_means(const MatrixXd& x) {
  const int n = static_cast<int>(x.rows());
  std::vector<int> best, labels(n);
  double best_v = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (1ULL << (n - 1)); ++mask) {
    for (int i = 0; i < n; ++i) labels[i] = i == 0 ? 0 : static_cast<int>((mask >> (i - 1)) & 1ULL);
    const double v = wcss(x, labels);
    if (v < best_v) {
      best_v = v;
      best = labels;
    }
  }
  return best;
}

// Agglomerative clustering recomputing every between-cluster cost from its definition.
// linkage: 0 Ward (increase in SS), 1 complete (max squared distance), 2 average (mean squared distance).
inline std::vector<int> naive_agglomerative(const MatrixXd& x, int linkage) {
  const int n = static_cast<int>(x.rows());
  std::vector<std::vector<int>> clusters(n);
  for (int i = 0; i < n; ++i) clusters[i] = {i};
  auto cost = [&](const std::vector<int>& a, const std::vector<int>& b) {
    if (linkage == 0) {
      Eigen::RowVectorXd ca = Eigen::RowVectorXd::Zero(x.cols()), cb = ca;
      for (int i : a) ca += x.row(i);
      for (int i : b) cb += x.row(i);
      ca /= static_cast<double>(a.size());
      cb /= static_cast<double>(b.size());
      const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
      return na * nb / (na + nb) * (ca - cb).squaredNorm();
    }
    double best = linkage == 1 ? 0.0 : 0.0;
    for (int i : a)
      for (int j : b) {
        const double d = (x.row(i) - x.row(j)).squaredNorm();
        best = linkage == 1 ? std::max(best, d) : best + d;
      }
    return linkage == 1 ? best : best / static_cast<double>(a.size() * b.size());
  };
  while (clusters.size() > 2) {
    std::size_t ba = 0, bb = 1;
    double bv = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < clusters.size(); ++a)
      for (std::size_t b = a + 1; b < clusters.size(); ++b) {
        const double v = cost(clusters[a], clusters[b]);
        if (v < bv) {
          bv = v;
          ba = a;
          bb = b;
        }
      }
    clusters[ba].insert(clusters[ba].end(), clusters[bb].begin(), clusters[bb].end());
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(bb));
  }
  std::vector<int> labels(n);
  const bool zero_first = std::find(clusters[0].begin(), clusters[0].end(), 0) != clusters[0].end();
  for (int c = 0; c < 2; ++c)
    for (int i : clusters[c]) labels[i] = (c == 0) == zero_first ? 0 : 1;
  return labels;
}

// sup_x |F_n(x) - x| by scanning both one-sided limits at every jump of the ECDF.
inline double ks_uniform_scan(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double d = 0.0;
  for (double x : v) {
    const double below = static_cast<double>(std::lower_bound(v.begin(), v.end(), x) - v.begin()) / n;
    const double at = static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) / n;
    d = std::max({d, std::abs(below - x), std::abs(at - x)});
  }
  return d;
}

// Per-entry Monte-Carlo standard error of a sample covariance built from rows of `x`
// (row-wise centred), using the fourth-moment estimate of Var(x_a x_b).
inline MatrixXd covariance_standard_error(const MatrixXd& x) {
  const MatrixXd c = x.rowwise() - x.colwise().mean();
  const double n = static_cast<double>(x.rows());
  MatrixXd se(x.cols(), x.cols());
  for (Eigen::Index a = 0; a < x.cols(); ++a)
    for (Eigen::Index b = 0; b < x.cols(); ++b) {
      const VectorXd prod = c.col(a).cwiseProduct(c.col(b));
      const double mean = prod.mean();
      se(a, b) = std::sqrt((prod.array() - mean).square().sum() / (n - 1.0) / n);
    }
  return se;
}

}  // namespace oracle
