#include "comcheck/special_functions.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>

namespace comcheck {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kSeamTolerance = 1e-8;

bool is_pole(double x) { return x <= 0.0 && x == std::floor(x); }

double connection(double a, double x) {
  // Gamma(1/2) / Gamma(a + 1/2) M(a, 1/2, x) + Gamma(-1/2) / Gamma(a) sqrt(x) M(a + 1/2, 3/2, x)
  const double first = kSqrtPi * reciprocal_gamma(a + 0.5);
  const double second = -2.0 * kSqrtPi * reciprocal_gamma(a);
  double value = 0.0;
  if (first != 0.0) value += first * kummer_m(a, 0.5, x);
  if (second != 0.0 && x > 0.0) value += second * std::sqrt(x) * kummer_m(a + 0.5, 1.5, x);
  return value;
}

double integral(double a, double x) {
  // U(a, b, x) = 1 / Gamma(a) int_0^inf exp(-x t) t^(a-1) (1 + t)^(b-a-1) dt, a > 0.
  boost::math::quadrature::exp_sinh<double> quad;
  const double tol = 1e-14;
  if (a >= 1.0) {
    auto f = [&](double t) { return std::exp(-x * t + (a - 1.0) * std::log(t) - (a + 0.5) * std::log1p(t)); };
    return quad.integrate(f, tol) * reciprocal_gamma(a);
  }
  // t = u^(1/a) removes the t^(a-1) endpoint singularity.
  const double inv_a = 1.0 / a;
  auto f = [&](double u) {
    const double t = std::pow(u, inv_a);
    return std::exp(-x * t - (a + 0.5) * std::log1p(t));
  };
  return quad.integrate(f, tol) * reciprocal_gamma(a + 1.0);
}

// Returns NaN when the smallest term is not small enough.
double asymptotic(double a, double x) {
  double term = 1.0;
  double sum = 1.0;
  double previous = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 500; ++k) {
    term *= -(a + k - 1.0) * (a + k - 0.5) / (k * x);
    const double size = std::abs(term);
    if (size >= previous) break;  // series starts to diverge
    previous = size;
    sum += term;
    if (size < 1e-17 * std::abs(sum)) return std::pow(x, -a) * sum;
  }
  if (previous < 1e-15 * std::abs(sum)) return std::pow(x, -a) * sum;
  return std::numeric_limits<double>::quiet_NaN();
}

double connection_limit(double a) { return a > 4.0 ? std::min(kKummerConnectionMax, 4.0 / a) : kKummerConnectionMax; }

double positive_a(double a, double x, KummerMethod& method) {
  if (x <= connection_limit(a)) {
    method = KummerMethod::kConnection;
    return connection(a, x);
  }
  if (x >= kKummerAsymptoticMin) {
    const double v = asymptotic(a, x);
    if (!std::isnan(v)) {
      method = KummerMethod::kAsymptotic;
      return v;
    }
  }
  method = KummerMethod::kIntegral;
  return integral(a, x);
}

double recurrence(double a, double x) {
  // U(c-1) = (x + 2c - 1/2) U(c) - c (c + 1/2) U(c+1), b = 1/2.
  double c = a + std::ceil(-a);
  if (c <= 0.0) c += 1.0;
  KummerMethod unused{};
  double u_c = positive_a(c, x, unused);
  double u_next = positive_a(c + 1.0, x, unused);
  while (c > a + 0.5) {
    const double u_prev = (x + 2.0 * c - 0.5) * u_c - c * (c + 0.5) * u_next;
    u_next = u_c;
    u_c = u_prev;
    c -= 1.0;
  }
  return u_c;
}

double relative_gap(double u, double v) {
  const double scale = std::max(std::abs(u), std::abs(v));
  return scale > 0.0 ? std::abs(u - v) / scale : 0.0;
}

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x)) throw std::domain_error("gamma_fn: non-finite argument");
  if (is_pole(x)) throw std::domain_error("gamma_fn: pole at " + std::to_string(x));
  if (x < 0.5) return kPi / (std::sin(kPi * x) * std::tgamma(1.0 - x));
  return std::tgamma(x);
}

double reciprocal_gamma(double x) {
  if (is_pole(x)) return 0.0;
  if (x > 171.0) return 0.0;
  return 1.0 / gamma_fn(x);
}

double kummer_m(double a, double b, double x) {
  if (is_pole(b)) throw std::domain_error("kummer_m: b is a non-positive integer");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 10000; ++k) {
    term *= (a + k) / (b + k) * x / (k + 1.0);
    sum += term;
    if (term == 0.0) return sum;
    // Past k > -a all terms share a sign, so a small term ends the sum.
    if (k + 1 > -a && std::abs(term) < 1e-16 * std::abs(sum)) return sum;
  }
  throw std::runtime_error("kummer_m: series did not converge");
}

KummerResult kummer_u_half_checked(double a, double x) {
  if (!(x >= 0.0) || !std::isfinite(a)) throw std::domain_error("kummer_u_half: requires x >= 0 and finite a");
  KummerResult r;
  if (a == 0.0) {
    r.value = 1.0;
    return r;
  }
  if (a < 0.0) {
    if (x <= kKummerConnectionMax) {
      r.method = KummerMethod::kConnection;
      r.value = connection(a, x);
      if (x >= 0.9 * kKummerConnectionMax) r.seam_discrepancy = relative_gap(r.value, recurrence(a, x));
    } else {
      r.method = KummerMethod::kRecurrence;
      r.value = recurrence(a, x);
      if (x <= 1.1 * kKummerConnectionMax) r.seam_discrepancy = relative_gap(r.value, connection(a, x));
    }
    r.precision_loss = r.seam_discrepancy > kSeamTolerance;
    return r;
  }
  r.value = positive_a(a, x, r.method);
  const double xc = connection_limit(a);
  if (x >= 0.9 * xc && x <= 1.1 * xc) {
    const double other = r.method == KummerMethod::kConnection ? integral(a, x) : connection(a, x);
    r.seam_discrepancy = relative_gap(r.value, other);
  } else if (x >= 0.9 * kKummerAsymptoticMin && x <= 1.1 * kKummerAsymptoticMin) {
    const double asym = asymptotic(a, x);
    if (!std::isnan(asym)) {
      const double other = r.method == KummerMethod::kAsymptotic ? integral(a, x) : asym;
      r.seam_discrepancy = relative_gap(r.value, other);
    }
  }
  r.precision_loss = r.seam_discrepancy > kSeamTolerance;
  return r;
}

double kummer_u_half(double a, double x) { return kummer_u_half_checked(a, x).value; }

}  // namespace comcheck
