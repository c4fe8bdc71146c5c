#include "psimf/chi.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "psimf/core.hpp"

namespace psimf {

namespace {

void check(int dof, double scale) {
  if (dof < 1) throw Error(ErrorKind::InvalidArgument, "chi dof must be >= 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::InvalidArgument, "chi scale must be > 0");
}

}  // namespace

double chi_log_density(double x, int dof, double scale) {
  check(dof, scale);
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  const double u = x / scale;
  if (u == 0.0) {
    if (dof == 1) return 0.5 * std::log(2.0 / std::numbers::pi) - std::log(scale);
    return -std::numeric_limits<double>::infinity();
  }
  const double k = 0.5 * dof;
  return (dof - 1) * std::log(u) - 0.5 * u * u - (k - 1.0) * std::numbers::ln2 - std::lgamma(k) -
         std::log(scale);
}

double chi_density(double x, int dof, double scale) { return std::exp(chi_log_density(x, dof, scale)); }

double chi_survival(double x, int dof, double scale) {
  check(dof, scale);
  if (!(x > 0.0)) return 1.0;
  const double u = x / scale;
  const double y = 0.5 * u * u;
  const double log_y = std::log(y);
  double sum = 0.0;
  if (dof % 2 == 0) {
    // Q(k, y) = e^{-y} sum_{i<k} y^i / i!
    for (int i = 0; i < dof / 2; ++i) sum += std::exp(-y + i * log_y - std::lgamma(i + 1.0));
  } else {
    // Q(k + 1/2, y) = erfc(sqrt y) + e^{-y} sum_{i<k} y^{i+1/2} / Gamma(i + 3/2)
    sum = std::erfc(std::sqrt(y));
    for (int i = 0; i < dof / 2; ++i) sum += std::exp(-y + (i + 0.5) * log_y - std::lgamma(i + 1.5));
  }
  return std::min(1.0, sum);
}

double normal_log_density(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace psimf
