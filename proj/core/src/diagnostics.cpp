#include "comcheck/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "comcheck/exact2.hpp"
#include "comcheck/observables.hpp"

namespace comcheck {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kConverged:
      return "converged";
    case Verdict::kUnconverged:
      return "unconverged";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

DiagnosticReport com_convergence_test(const TimeSeries& series, const TimeSeries& reference, double tol,
                                      double time_tolerance) {
  if (series.size() == 0 || reference.size() == 0) throw std::invalid_argument("com_convergence_test: empty series");
  if (series.size() != reference.size()) {
    throw std::invalid_argument("com_convergence_test: series have " + std::to_string(series.size()) + " and " +
                                std::to_string(reference.size()) + " records");
  }
  DiagnosticReport r;
  r.test = "com_convergence";
  r.threshold = tol;
  r.columns = {"t", "sigma_R2", "sigma_R2_ref", "ratio"};
  double worst = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (std::abs(series.times[i] - reference.times[i]) > time_tolerance) {
      std::ostringstream msg;
      msg << "com_convergence_test: time stamps differ at record " << i << " (" << series.times[i] << " vs "
          << reference.times[i] << ")";
      throw std::invalid_argument(msg.str());
    }
    const double ratio = series.sigma_r2[i] / reference.sigma_r2[i];
    worst = std::max(worst, std::abs(ratio - 1.0));
    r.detail.push_back({series.times[i], series.sigma_r2[i], reference.sigma_r2[i], ratio});
  }
  r.metric = worst;
  r.verdict = worst > tol ? Verdict::kUnconverged : Verdict::kConverged;
  return r;
}

TimeSeries ballistic_reference(const std::vector<double>& times, int n_particles, double lambda0) {
  TimeSeries ts;
  ts.particles = n_particles;
  ts.times = times;
  ts.sigma_r2.reserve(times.size());
  for (double t : times) ts.sigma_r2.push_back(com_spread_variance(t, n_particles, lambda0));
  return ts;
}

TimeSeries harmonic_com_reference(const std::vector<double>& times, int n_particles, double mass, double omega0,
                                  double omega_final) {
  if (n_particles < 1 || !(mass > 0.0) || !(omega0 > 0.0) || omega_final < 0.0) {
    throw std::invalid_argument("harmonic_com_reference: need N >= 1, mass > 0, omega0 > 0, omega_final >= 0");
  }
  const double total_mass = n_particles * mass;
  const double s0 = 1.0 / (2.0 * total_mass * omega0);
  const double p2 = 1.0 / (4.0 * s0);  // momentum variance of the COM Gaussian
  TimeSeries ts;
  ts.particles = n_particles;
  ts.times = times;
  ts.sigma_r2.reserve(times.size());
  for (double t : times) {
    if (omega_final == 0.0) {
      ts.sigma_r2.push_back(s0 + p2 * t * t / (total_mass * total_mass));
    } else {
      const double c = std::cos(omega_final * t);
      const double sn = std::sin(omega_final * t) / (total_mass * omega_final);
      ts.sigma_r2.push_back(s0 * c * c + p2 * sn * sn);
    }
  }
  return ts;
}

DiagnosticReport occupancy_threshold_check(const TimeSeries& series, double threshold) {
  DiagnosticReport r;
  r.test = "occupancy_threshold";
  r.threshold = threshold;
  r.advisory = true;
  r.note = "advisory: a small least natural occupancy does not guarantee convergence; the COM test decides";
  r.columns = {"t", "least_occupation_fraction"};
  if (series.modes <= 1) {
    r.verdict = Verdict::kInconclusive;
    r.metric = std::numeric_limits<double>::quiet_NaN();
    r.warnings.push_back("single-mode run: criterion not applicable");
    return r;
  }
  if (series.size() == 0) throw std::invalid_argument("occupancy_threshold_check: empty series");
  const std::vector<double> least = series.least_occupation_fraction();
  double worst = 0.0;
  for (std::size_t i = 0; i < least.size(); ++i) {
    worst = std::max(worst, least[i]);
    r.detail.push_back({series.times[i], least[i]});
  }
  r.metric = worst;
  r.verdict = worst < threshold ? Verdict::kConverged : Verdict::kUnconverged;
  return r;
}

DiagnosticReport width_bounds_check(double sigma_r2, double sigma_n2, double sigma_sol2, double slack) {
  if (!(sigma_r2 >= 0.0) || !(sigma_n2 >= 0.0) || !(sigma_sol2 >= 0.0) || !(slack >= 0.0)) {
    throw std::invalid_argument("width_bounds_check: inputs must be non-negative");
  }
  DiagnosticReport r;
  r.test = "width_bounds";
  r.threshold = slack;
  r.note = "upper bound sigma_R^2 + sigma_sol^2 is approximate";
  r.columns = {"sigma_R2", "sigma_n2", "sigma_sol2", "lower_violation", "upper_violation"};
  const double scale = sigma_r2 > 0.0 ? sigma_r2 : 1.0;
  const double lower = (sigma_r2 - sigma_n2) / scale;
  const double upper = (sigma_n2 - sigma_r2 - sigma_sol2) / scale;
  r.metric = std::max(lower, upper);
  r.detail.push_back({sigma_r2, sigma_n2, sigma_sol2, lower, upper});
  r.verdict = r.metric > slack ? Verdict::kUnconverged : Verdict::kConverged;
  return r;
}

namespace {

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return f;
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  return f;
}

}  // namespace

PowerLawFit power_law_fit(const std::vector<int>& modes, const std::vector<double>& errors, int restrict_min) {
  if (modes.size() != errors.size()) throw std::invalid_argument("power_law_fit: size mismatch");
  PowerLawFit fit;
  fit.restrict_min = restrict_min;
  std::vector<double> lx, ly, rx, ry;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (!(errors[i] > 0.0) || modes[i] < 1) {
      fit.warnings.push_back("dropped M=" + std::to_string(modes[i]) + " (non-positive error or M)");
      continue;
    }
    lx.push_back(std::log(static_cast<double>(modes[i])));
    ly.push_back(std::log(errors[i]));
    if (modes[i] >= restrict_min) {
      rx.push_back(lx.back());
      ry.push_back(ly.back());
    }
  }
  if (lx.size() < 3) throw std::invalid_argument("power_law_fit: needs at least three positive errors");
  const LineFit all = fit_line(lx, ly);
  fit.exponent = all.slope;
  fit.prefactor = std::exp(all.intercept);
  fit.points = static_cast<int>(lx.size());
  const LineFit restricted = fit_line(rx, ry);
  fit.restricted_exponent = restricted.slope;
  fit.restricted_points = static_cast<int>(rx.size());
  if (rx.size() < 2) fit.warnings.push_back("fewer than two points with M >= " + std::to_string(restrict_min));
  return fit;
}

double length_ratio(double g_tilde, int n_particles) {
  if (!(g_tilde < 0.0)) throw std::invalid_argument("length_ratio: requires g < 0");
  return std::sqrt(1.0 / (2.0 * n_particles)) / std::sqrt(soliton_variance(n_particles, g_tilde));
}

}  // namespace comcheck
