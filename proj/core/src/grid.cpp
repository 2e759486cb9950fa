#include "comcheck/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace comcheck {

Grid::Grid(double length, int n_points, double center)
    : length_(length), n_points_(n_points), center_(center), spacing_(0.0) {
  if (n_points < kMinPoints) {
    throw std::invalid_argument("Grid: n_points must be >= 5 (five-point stencil), got " +
                                std::to_string(n_points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument("Grid: length must be positive and finite");
  }
  if (!std::isfinite(center)) throw std::invalid_argument("Grid: center must be finite");
  spacing_ = length / (n_points - 1);
}

RealField Grid::points() const {
  RealField xs(n_points_);
  for (int i = 0; i < n_points_; ++i) xs[i] = x(i);
  return xs;
}

Grid make_grid(double length, int n_points, double center) { return Grid(length, n_points, center); }

namespace {

// (-f[i-2] + 16 f[i-1] - 30 f[i] + 16 f[i+1] - f[i+2]) / (12 dx^2), zero outside.
template <class In, class Out>
void stencil(const In& f, Out&& out, int n, double inv12dx2) {
  auto at = [&](int i) -> cplx { return (i < 0 || i >= n) ? cplx{} : cplx(f[i]); };
  for (int i = 0; i < n; ++i) {
    if (i >= 2 && i < n - 2) {
      out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * inv12dx2;
    } else {
      out[i] = (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) * inv12dx2;
    }
  }
}

}  // namespace

ComplexField laplacian5(const ComplexField& f, const Grid& grid) {
  if (f.size() != grid.size()) throw std::invalid_argument("laplacian5: field/grid size mismatch");
  const double inv = 1.0 / (12.0 * grid.spacing() * grid.spacing());
  ComplexField out(f.size());
  stencil(f, out, grid.size(), inv);
  return out;
}

void laplacian5_columns(const Eigen::MatrixXcd& in, const Grid& grid, Eigen::MatrixXcd& out) {
  if (in.rows() != grid.size()) throw std::invalid_argument("laplacian5: field/grid size mismatch");
  const double inv = 1.0 / (12.0 * grid.spacing() * grid.spacing());
  out.resize(in.rows(), in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c) {
    stencil(in.col(c), out.col(c), grid.size(), inv);
  }
}

cplx quadrature(const ComplexField& f, const ComplexField& g, const Grid& grid) {
  if (f.size() != grid.size() || g.size() != grid.size()) {
    throw std::invalid_argument("quadrature: fields are not on the same grid");
  }
  return f.dot(g) * grid.spacing();  // Eigen's dot conjugates the left operand
}

double integrate(const RealField& f, const Grid& grid) {
  if (f.size() != grid.size()) throw std::invalid_argument("integrate: field/grid size mismatch");
  return f.sum() * grid.spacing();
}

Schedule::Schedule(double initial, std::vector<std::pair<double, double>> switches)
    : initial_(initial), switches_(std::move(switches)) {
  if (!std::is_sorted(switches_.begin(), switches_.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; })) {
    throw std::invalid_argument("Schedule: switch times must be increasing");
  }
}

double Schedule::at(double t) const noexcept {
  double value = initial_;
  for (const auto& [start, v] : switches_) {
    if (t >= start) value = v;
    else break;
  }
  return value;
}

Schedule Schedule::step_at_zero(double before, double after) { return Schedule(before, {{0.0, after}}); }

std::string to_string(UnitSystem units) {
  return units == UnitSystem::kTrapped ? "trapped" : "untrapped";
}

void HamiltonianSpec::validate() const {
  if (!(mass > 0.0)) throw std::invalid_argument("HamiltonianSpec: mass must be positive");
  auto check = [](double w) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("HamiltonianSpec: omega must be >= 0");
  };
  check(omega.initial());
  for (const auto& s : omega.switches()) check(s.second);
  auto finite = [](double g) {
    if (!std::isfinite(g)) throw std::invalid_argument("HamiltonianSpec: coupling must be finite");
  };
  finite(coupling.initial());
  for (const auto& s : coupling.switches()) finite(s.second);
}

HamiltonianSpec HamiltonianSpec::constant(double omega, double g, UnitSystem units) {
  HamiltonianSpec spec;
  spec.omega = Schedule(omega);
  spec.coupling = Schedule(g);
  spec.units = units;
  spec.validate();
  return spec;
}

HamiltonianSpec HamiltonianSpec::trap_release(double omega0, double g) {
  HamiltonianSpec spec;
  spec.omega = Schedule::step_at_zero(omega0, 0.0);
  spec.coupling = Schedule(g);
  spec.units = UnitSystem::kTrapped;
  spec.validate();
  return spec;
}

}  // namespace comcheck
