#pragma once

// Gamma function and the confluent hypergeometric functions needed by the
// two-boson trap solution (b = 1/2 only for U).

namespace comcheck {

/// Gamma(x); reflection formula for x < 1/2. Throws std::domain_error at
/// non-positive integers.
double gamma_fn(double x);

/// 1 / Gamma(x), zero at the poles of Gamma.
double reciprocal_gamma(double x);

/// Kummer's M(a, b, x) = sum_k (a)_k / (b)_k x^k / k!, summed until the
/// relative term size drops below 1e-15. Intended for |x| up to a few tens.
double kummer_m(double a, double b, double x);

enum class KummerMethod { kTrivial, kConnection, kIntegral, kAsymptotic, kRecurrence };

struct KummerResult {
  double value = 0.0;
  KummerMethod method = KummerMethod::kTrivial;
  /// Set when two evaluation paths near a crossover disagree by more than 1e-8
  /// (relative).
  bool precision_loss = false;
  double seam_discrepancy = 0.0;
};

/// Crossover points between the evaluation regimes of kummer_u_half.
inline constexpr double kKummerConnectionMax = 1.0;
inline constexpr double kKummerAsymptoticMin = 30.0;

/// U(a, 1/2, x) for x >= 0:
///   x <= 1:           connection formula through M (exact for a = 0, -1/2)
///   1 < x < 30:       integral representation (a > 0)
///   x >= 30:          Poincare series cut at its smallest term, when that
///                     term is below 1e-15; otherwise the integral
///   a <= 0, x > 1:    downward three-term recurrence from a + k in (0, 1]
/// Within 10% of a crossover both neighbouring paths are evaluated and
/// compared.
KummerResult kummer_u_half_checked(double a, double x);

/// Value of kummer_u_half_checked.
double kummer_u_half(double a, double x);

}  // namespace comcheck
