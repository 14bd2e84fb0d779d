#pragma once

#include <span>

namespace sdors {

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

double normal_cdf(double z);

// Student-t CDF and upper-tail quantile (two-sided 95% uses p = 0.975).
double student_t_cdf(double x, int dof);
double student_t_quantile(double p, int dof);

// Half-width of the two-sided 95% confidence interval on the mean.
double ci95_halfwidth(std::span<const double> v);

}  // namespace sdors
