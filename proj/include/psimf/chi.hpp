#pragma once

namespace psimf {

// Law of scale * chi_dof. The survival function is the regularised upper incomplete gamma
// Q(dof/2, x^2 / (2 scale^2)), summed in closed form for integer dof.

double chi_log_density(double x, int dof, double scale);
double chi_density(double x, int dof, double scale);
double chi_survival(double x, int dof, double scale);

/// log of the N(mean, sd^2) density.
double normal_log_density(double x, double mean, double sd);

}  // namespace psimf
