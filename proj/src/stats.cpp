#include "sdors/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace sdors {

double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / 1.4142135623730950488); }

namespace {

// regularized incomplete beta via Lentz's continued fraction
double betacf(double a, double b, double x) {
  const int kMaxIter = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
              b * std::log(1.0 - x);
  double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("t distribution needs dof >= 1");
  double v = static_cast<double>(dof);
  double p = 0.5 * ibeta(v / 2.0, 0.5, v / (v + x * x));
  return x >= 0.0 ? 1.0 - p : p;
}

double student_t_quantile(double p, int dof) {
  if (p <= 0.0 || p >= 1.0) throw std::invalid_argument("quantile needs p in (0,1)");
  double lo = -1e3, hi = 1e3;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (student_t_cdf(mid, dof) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ci95_halfwidth(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double t = student_t_quantile(0.975, static_cast<int>(v.size()) - 1);
  return t * sample_sd(v) / std::sqrt(static_cast<double>(v.size()));
}

}  // namespace sdors
