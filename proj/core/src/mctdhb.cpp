#include "comcheck/mctdhb.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "comcheck/observables.hpp"

namespace comcheck {

namespace {

constexpr double kRho1Floor = 1e-8;  // relative to N

RealField trap_potential(const Grid& grid, double mass, double omega) {
  const RealField xs = grid.points();
  return (0.5 * mass * omega * omega) * xs.cwiseAbs2();
}

Eigen::MatrixXcd apply_single_particle_h(const Eigen::MatrixXcd& phi, const Grid& grid, double mass,
                                         const RealField& potential) {
  Eigen::MatrixXcd out;
  laplacian5_columns(phi, grid, out);
  out *= -0.5 / mass;
  out += potential.asDiagonal() * phi;
  return out;
}

Eigen::MatrixXcd pair_products(const Eigen::MatrixXcd& phi, const PairIndex& pairs) {
  Eigen::MatrixXcd pm(phi.rows(), pairs.size());
  for (int p = 0; p < pairs.size(); ++p) pm.col(p) = phi.col(pairs.first(p)).cwiseProduct(phi.col(pairs.second(p)));
  return pm;
}

struct Projected {
  ModeOperators ops;
  Eigen::MatrixXcd hphi;
  Eigen::MatrixXcd pm;  // empty when non-interacting
  double g = 0.0;
};

Projected project(const Eigen::MatrixXcd& phi, const Grid& grid, const HamiltonianSpec& spec, double t,
                  int particles) {
  const double dx = grid.spacing();
  const PairIndex pairs(static_cast<int>(phi.cols()));
  Projected out;
  out.g = spec.coupling_at(t);
  out.hphi = apply_single_particle_h(phi, grid, spec.mass, trap_potential(grid, spec.mass, spec.omega_at(t)));
  out.ops.h = dx * (phi.adjoint() * out.hphi);
  if (out.g != 0.0 && particles >= 2) {
    out.pm = pair_products(phi, pairs);
    out.ops.w_pairs = (out.g * dx) * (out.pm.adjoint() * out.pm);
  } else {
    out.ops.w_pairs = Eigen::MatrixXcd::Zero(pairs.size(), pairs.size());
  }
  return out;
}

struct RhsResult {
  CoefficientVector dc;
  Eigen::MatrixXcd dphi;
  double energy = 0.0;
  double min_eigenvalue = 0.0;
  bool regularized = false;
  ModeMatrix rho1;  // normalized
};

RhsResult rhs_impl(const FockBasis& basis, const Grid& grid, const HamiltonianSpec& spec, const CoefficientVector& c,
                   const Eigen::MatrixXcd& phi, double t, TimeMode mode,
                   std::optional<double> phase_shift = std::nullopt) {
  const int n_modes = basis.modes();
  const int n_particles = basis.particles();
  const double dx = grid.spacing();
  const PairIndex& pairs = basis.pairs();

  const Projected pr = project(phi, grid, spec, t, n_particles);
  const CoefficientVector hc = apply_many_body_h(c, pr.ops, basis);
  const double c2 = c.squaredNorm();

  RhsResult r;
  r.energy = c.dot(hc).real() / c2;

  const ReducedDensities rd = reduced_densities_unchecked(c, basis);
  r.rho1 = rd.rho1 / c2;

  // Regularized inverse of rho1.
  const ModeMatrix herm = 0.5 * (r.rho1 + r.rho1.adjoint());
  Eigen::SelfAdjointEigenSolver<ModeMatrix> eig(herm);
  const double floor = kRho1Floor * n_particles;
  Eigen::VectorXd inv_vals(n_modes);
  r.min_eigenvalue = eig.eigenvalues().minCoeff();
  for (int k = 0; k < n_modes; ++k) {
    const double lam = eig.eigenvalues()[k];
    if (lam < floor) r.regularized = true;
    inv_vals[k] = 1.0 / std::max(lam, floor);
  }
  const ModeMatrix rho1_inv = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().adjoint();

  Eigen::MatrixXcd f = pr.hphi;
  if (pr.pm.size() > 0) {
    // A(x, ks) = sum_{ql} rho2_ksql phi_q phi_l; B_k(x) = sum_s conj(phi_s) A(x, ks).
    Eigen::MatrixXcd rho2m = rd.rho2_pairs / c2;
    for (int p = 0; p < pairs.size(); ++p) rho2m.col(p) *= pairs.multiplicity(p);
    const Eigen::MatrixXcd a = pr.pm * rho2m.transpose();
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(phi.rows(), n_modes);
    for (int k = 0; k < n_modes; ++k)
      for (int s = 0; s < n_modes; ++s) b.col(k) += phi.col(s).conjugate().cwiseProduct(a.col(pairs(k, s)));
    f.noalias() += pr.g * (b * rho1_inv.transpose());
  }
  // Project out the orbital span.
  const Eigen::MatrixXcd overlap = dx * (phi.adjoint() * f);
  f.noalias() -= phi * overlap;

  const cplx minus_i(0.0, -1.0);
  if (mode == TimeMode::kReal) {
    r.dphi = minus_i * f;
    r.dc = minus_i * hc;
    if (phase_shift) r.dc -= minus_i * *phase_shift * c;
  } else {
    r.dphi = -f;
    r.dc = -(hc - r.energy * c);
  }
  return r;
}

double overlap_error(const Eigen::MatrixXcd& phi, const Grid& grid) {
  const Eigen::MatrixXcd s = grid.spacing() * (phi.adjoint() * phi);
  return (s - Eigen::MatrixXcd::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();
}

void check_time_step(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("step: dt must be positive");
}

}  // namespace

double MctdhbState::orthonormality_error() const { return overlap_error(orbitals, grid); }

void MctdhbState::validate(double tolerance) const {
  if (!basis) throw std::invalid_argument("MctdhbState: missing basis");
  if (orbitals.rows() != grid.size() || orbitals.cols() != basis->modes()) {
    throw std::invalid_argument("MctdhbState: orbital matrix does not match grid x modes");
  }
  if (static_cast<std::size_t>(coefficients.size()) != basis->size()) {
    throw std::invalid_argument("MctdhbState: coefficient vector does not match basis");
  }
  if (!orbitals.allFinite() || !coefficients.allFinite()) throw std::invalid_argument("MctdhbState: non-finite entries");
  if (orthonormality_error() > tolerance) {
    throw std::invalid_argument("MctdhbState: orbitals are not orthonormal (error " +
                                std::to_string(orthonormality_error()) + ")");
  }
  if (norm_error() > tolerance) {
    throw std::invalid_argument("MctdhbState: coefficients are not normalized (error " + std::to_string(norm_error()) +
                                ")");
  }
}

ModeOperators project_hamiltonian(const Eigen::MatrixXcd& orbitals, const Grid& grid, const HamiltonianSpec& spec,
                                  double t) {
  if (orbitals.rows() != grid.size()) throw std::invalid_argument("project_hamiltonian: orbitals not on grid");
  return project(orbitals, grid, spec, t, /*particles=*/2).ops;
}

StateDerivative eom_rhs(const MctdhbState& state, const HamiltonianSpec& spec, TimeMode mode,
                        std::optional<double> hamiltonian_time) {
  const double t = hamiltonian_time.value_or(state.time);
  RhsResult r = rhs_impl(*state.basis, state.grid, spec, state.coefficients, state.orbitals, t, mode);
  StateDerivative d;
  d.coefficients = std::move(r.dc);
  d.orbitals = std::move(r.dphi);
  d.energy = r.energy;
  d.min_rho1_eigenvalue = r.min_eigenvalue;
  d.regularized = r.regularized;
  return d;
}

void orthonormalize_symmetric(Eigen::MatrixXcd& orbitals, const Grid& grid) {
  const Eigen::MatrixXcd s = grid.spacing() * (orbitals.adjoint() * orbitals);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(0.5 * (s + s.adjoint()));
  if (eig.eigenvalues().minCoeff() <= 0.0) throw std::runtime_error("orthonormalize_symmetric: singular overlap");
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  orbitals = orbitals * (eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().adjoint());
}

MctdhbState step(const MctdhbState& state, const HamiltonianSpec& spec, double dt, const StepOptions& options,
                 StepInfo* info) {
  check_time_step(dt);
  const FockBasis& basis = *state.basis;
  const bool real = options.mode == TimeMode::kReal;
  const double t0 = real ? state.time : options.imaginary_hamiltonian_time;
  const double half = real ? 0.5 * dt : 0.0;
  const double full = real ? dt : 0.0;

  // Real time: i dC/dt = (H - E0) C with E0 the energy at the step start.
  // The shift only changes the global phase but keeps RK4 accurate when |E| dt
  // is not small.
  RhsResult k1 = rhs_impl(basis, state.grid, spec, state.coefficients, state.orbitals, t0, options.mode);
  std::optional<double> shift;
  if (real) {
    shift = k1.energy;
    k1.dc -= cplx(0.0, -1.0) * k1.energy * state.coefficients;
  }
  const RhsResult k2 = rhs_impl(basis, state.grid, spec, state.coefficients + (0.5 * dt) * k1.dc,
                                state.orbitals + (0.5 * dt) * k1.dphi, t0 + half, options.mode, shift);
  const RhsResult k3 = rhs_impl(basis, state.grid, spec, state.coefficients + (0.5 * dt) * k2.dc,
                                state.orbitals + (0.5 * dt) * k2.dphi, t0 + half, options.mode, shift);
  const RhsResult k4 = rhs_impl(basis, state.grid, spec, state.coefficients + dt * k3.dc,
                                state.orbitals + dt * k3.dphi, t0 + full, options.mode, shift);

  MctdhbState next = state;
  next.coefficients += (dt / 6.0) * (k1.dc + 2.0 * k2.dc + 2.0 * k3.dc + k4.dc);
  next.orbitals += (dt / 6.0) * (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi);
  if (real) next.time = state.time + dt;

  const double norm_drift = next.norm_error();
  const double orth_drift = next.orthonormality_error();
  if (!(norm_drift <= options.max_norm_drift) || !(orth_drift <= options.max_norm_drift)) {
    std::ostringstream msg;
    msg << "step rejected at t=" << state.time << " (dt=" << dt << "): |C|^2 drift " << norm_drift
        << ", orbital overlap drift " << orth_drift << "; reduce dt";
    throw StepRejectedError(msg.str());
  }
  orthonormalize_symmetric(next.orbitals, next.grid);
  next.coefficients.normalize();
  if (info) {
    info->norm_drift = norm_drift;
    info->orthonormality_drift = orth_drift;
    info->energy_at_start = k1.energy;
    info->rho1_at_start = k1.rho1;
    info->regularized = k1.regularized || k2.regularized || k3.regularized || k4.regularized;
  }
  return next;
}

MctdhbState step(const MctdhbState& state, const HamiltonianSpec& spec, double dt, TimeMode mode) {
  StepOptions opts;
  opts.mode = mode;
  return step(state, spec, dt, opts);
}

void pin_orbital_phases(MctdhbState& state) {
  const int m = state.modes();
  std::vector<double> theta(m, 0.0);
  for (int k = 0; k < m; ++k) {
    Eigen::Index imax = 0;
    state.orbitals.col(k).cwiseAbs2().maxCoeff(&imax);
    theta[k] = std::arg(state.orbitals(imax, k));
    state.orbitals.col(k) *= std::polar(1.0, -theta[k]);
  }
  for (std::size_t i = 0; i < state.basis->size(); ++i) {
    const auto occ = state.basis->config(i);
    double phase = 0.0;
    for (int k = 0; k < m; ++k) phase += occ[k] * theta[k];
    state.coefficients[static_cast<Eigen::Index>(i)] *= std::polar(1.0, phase);
  }
}

double diagonalize_coefficients(MctdhbState& state, const HamiltonianSpec& spec, double t,
                                double residual_tolerance) {
  const FockBasis& basis = *state.basis;
  const ModeOperators ops = project(state.orbitals, state.grid, spec, t, basis.particles()).ops;
  const auto dim = static_cast<Eigen::Index>(basis.size());
  const Eigen::Index kmax = std::min<Eigen::Index>(dim, 80);
  CoefficientVector y = state.coefficients.normalized();
  double theta = 0.0;
  for (int restart = 0; restart < 500; ++restart) {
    Eigen::MatrixXcd v(dim, kmax);
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(kmax, kmax);
    v.col(0) = y;
    Eigen::Index k = 0;
    while (k < kmax) {
      CoefficientVector w = apply_many_body_h(v.col(k), ops, basis);
      const double alpha = v.col(k).dot(w).real();
      tri(k, k) = alpha;
      for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(k + 1) * (v.leftCols(k + 1).adjoint() * w);
      const double beta = w.norm();
      ++k;
      if (k == kmax || beta < 1e-12 * (std::abs(alpha) + 1.0)) break;
      tri(k - 1, k) = tri(k, k - 1) = beta;
      v.col(k) = w / beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tri.topLeftCorner(k, k));
    theta = eig.eigenvalues()[0];
    y = v.leftCols(k) * eig.eigenvectors().col(0).cast<cplx>();
    y.normalize();
    const double residual = (apply_many_body_h(y, ops, basis) - theta * y).norm();
    if (residual < residual_tolerance * std::max(1.0, std::abs(theta))) break;
  }
  state.coefficients = y;
  return theta;
}

GroundStateResult relax(const MctdhbState& init, const HamiltonianSpec& spec, const RelaxOptions& options) {
  spec.validate();
  init.validate(1e-6);
  if (!options.allow_untrapped && !(spec.omega_at(options.hamiltonian_time) > 0.0)) {
    throw std::invalid_argument("relax: Hamiltonian has no trap at the relaxation time; set allow_untrapped");
  }
  StepOptions sopts;
  sopts.mode = TimeMode::kImaginary;
  sopts.imaginary_hamiltonian_time = options.hamiltonian_time;

  GroundStateResult result;
  MctdhbState state = init;
  if (options.prediagonalize && state.modes() > 1) diagonalize_coefficients(state, spec, options.hamiltonian_time);
  double previous = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  long it = 0;
  const int stride = std::max(1, options.history_stride);
  double dtau = options.dtau;
  int calm_steps = 0;
  int settled = 0;
  for (it = 1; it <= options.max_iterations; ++it) {
    StepInfo info;
    MctdhbState next;
    try {
      next = step(state, spec, dtau, sopts, &info);
    } catch (const StepRejectedError&) {
      // Stiff transients (weakly occupied orbitals) need a shorter step for a while.
      dtau *= 0.5;
      calm_steps = 0;
      ++result.reduced_steps;
      if (dtau < options.dtau * 1e-6) throw;
      previous = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (info.regularized) ++result.regularized_steps;
    const double e = info.energy_at_start;  // energy of `state`
    const double delta = std::isnan(previous) ? std::numeric_limits<double>::infinity() : e - previous;
    previous = e;
    const bool full_step = dtau == options.dtau;
    // A single small step can be a sign change of Delta E on a plateau.
    settled = full_step && std::abs(delta) < options.energy_tolerance ? settled + 1 : 0;
    const bool done = settled >= std::max(1, options.settle_steps);
    if (it % stride == 0 || done) result.history.push_back({it, e, delta});
    if (done) {
      converged = true;
      break;
    }
    state = std::move(next);
    if (!full_step && ++calm_steps >= 200) {
      dtau = std::min(options.dtau, 2.0 * dtau);
      calm_steps = 0;
      previous = std::numeric_limits<double>::quiet_NaN();
    }
  }
  pin_orbital_phases(state);
  result.state = std::move(state);
  result.iterations = std::min(it, options.max_iterations);
  result.energy = total_energy(result.state, spec, options.hamiltonian_time);
  if (!converged) {
    throw RelaxationError("relax: no convergence to |dE| < " + std::to_string(options.energy_tolerance) + " after " +
                              std::to_string(options.max_iterations) + " iterations",
                          std::move(result));
  }
  return result;
}

std::vector<double> TimeSeries::least_occupation_fraction() const {
  std::vector<double> out;
  out.reserve(occupations.size());
  for (const auto& row : occupations) out.push_back(row.empty() ? 0.0 : row.back() / particles);
  return out;
}

namespace {

double edge_density(const ModeMatrix& rho1, const Eigen::MatrixXcd& phi, Eigen::Index i, int particles) {
  const Eigen::VectorXcd row = phi.row(i).transpose();
  return (row.adjoint() * rho1 * row)(0, 0).real() / particles;
}

void record(TimeSeries& ts, const MctdhbState& state, const HamiltonianSpec& spec, bool with_density) {
  const Measurement m = measure(state, spec, state.time);
  ts.times.push_back(state.time);
  ts.energy.push_back(m.energy);
  ts.sigma_r2.push_back(m.sigma_r2);
  ts.sigma_n2.push_back(m.sigma_n2);
  ts.occupations.push_back(m.occupations);
  if (with_density) ts.densities.push_back(density(state));
}

}  // namespace

PropagationResult propagate(const MctdhbState& init, const HamiltonianSpec& spec, const PropagateOptions& options) {
  spec.validate();
  init.validate(1e-6);
  if (!(options.t_final > 0.0)) throw std::invalid_argument("propagate: t_final must be positive");
  check_time_step(options.dt);
  if (options.record_every < 1) throw std::invalid_argument("propagate: record_every must be >= 1");

  const long steps = std::max(1L, std::lround(options.t_final / options.dt));
  const double dt = options.t_final / static_cast<double>(steps);
  const double t_start = init.time;
  const int n_particles = init.particles();
  const Eigen::Index last = init.grid.size() - 1;

  PropagationResult result;
  TimeSeries& ts = result.series;
  ts.particles = n_particles;
  ts.modes = init.modes();

  MctdhbState state = init;
  record(ts, state, spec, options.record_density);
  if (options.on_record) options.on_record(ts);

  StepOptions sopts;
  sopts.mode = TimeMode::kReal;
  for (long k = 1; k <= steps; ++k) {
    StepInfo info;
    MctdhbState next;
    try {
      next = step(state, spec, dt, sopts, &info);
    } catch (const StepRejectedError& e) {
      throw PropagationError(e.what(), state, ts);
    }
    if (info.regularized) ++result.regularized_steps;
    const double edge = std::max(edge_density(info.rho1_at_start, state.orbitals, 0, n_particles),
                                 edge_density(info.rho1_at_start, state.orbitals, last, n_particles));
    if (edge > options.edge_threshold) {
      std::ostringstream msg;
      msg << "density reached the box edge at t=" << state.time << " (rho/N = " << edge << " > "
          << options.edge_threshold << "); enlarge the box";
      throw BoxOverflowError(msg.str(), state, ts);
    }
    state = std::move(next);
    state.time = t_start + k * dt;
    if (k % options.record_every == 0 || k == steps) {
      record(ts, state, spec, options.record_density);
      if (options.on_record) options.on_record(ts);
    }
  }
  result.final_state = std::move(state);
  return result;
}

namespace {

Eigen::VectorXcd shape_samples(const InitialShape& shape, const Grid& grid) {
  const int n = grid.size();
  Eigen::VectorXcd v(n);
  if (shape.kind == ShapeKind::kCustom) {
    if (shape.custom.size() != n) throw std::invalid_argument("init_product_state: custom shape not on grid");
    v = shape.custom;
  } else {
    if (!(shape.width > 0.0)) throw std::invalid_argument("init_product_state: width must be positive");
    for (int i = 0; i < n; ++i) {
      const double xi = (grid.x(i) - grid.center()) / shape.width;
      v[i] = shape.kind == ShapeKind::kSech ? 1.0 / std::cosh(xi) : std::exp(-0.5 * xi * xi);
    }
  }
  const double norm = std::sqrt(grid.spacing() * v.squaredNorm());
  if (!(norm > 0.0)) throw std::invalid_argument("init_product_state: shape has zero norm");
  return v / norm;
}

// Appends phi_1 * H_k(x / width) seeds orthonormalized against `orbitals`.
void seed_modes(Eigen::MatrixXcd& orbitals, int first_new, int n_modes, const Eigen::VectorXcd& phi1, const Grid& grid,
                double width) {
  const double dx = grid.spacing();
  for (int k = first_new; k < n_modes; ++k) {
    Eigen::VectorXcd v(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
      v[i] = phi1[i] * std::hermite(static_cast<unsigned>(k), (grid.x(i) - grid.center()) / width);
    }
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j < k; ++j) v -= (dx * orbitals.col(j).dot(v)) * orbitals.col(j);
    }
    const double norm = std::sqrt(dx * v.squaredNorm());
    if (!(norm > 1e-12)) throw std::runtime_error("init_product_state: Hermite seed is linearly dependent");
    orbitals.col(k) = v / norm;
  }
}

}  // namespace

MctdhbState init_product_state(const InitialShape& shape, int n_particles, int n_modes, const Grid& grid,
                               std::size_t max_configs) {
  if (n_modes < 1) throw std::invalid_argument("init_product_state: need M >= 1");
  MctdhbState state{grid, enumerate_configs(n_particles, n_modes, max_configs), {}, {}, 0.0};
  const Eigen::VectorXcd phi1 = shape_samples(shape, grid);
  state.orbitals.resize(grid.size(), n_modes);
  state.orbitals.col(0) = phi1;
  seed_modes(state.orbitals, 1, n_modes, phi1, grid, shape.kind == ShapeKind::kCustom ? 1.0 : shape.width);
  state.coefficients = CoefficientVector::Zero(static_cast<Eigen::Index>(state.basis->size()));
  state.coefficients[0] = 1.0;  // (N, 0, ..., 0) is first in descending order
  return state;
}

MctdhbState pad_modes(const MctdhbState& state, int n_modes, double seed_width) {
  const int old_m = state.modes();
  if (n_modes < old_m) throw std::invalid_argument("pad_modes: cannot reduce the number of modes");
  MctdhbState out{state.grid, enumerate_configs(state.particles(), n_modes), {}, {}, state.time};
  out.orbitals.resize(state.grid.size(), n_modes);
  out.orbitals.leftCols(old_m) = state.orbitals;
  seed_modes(out.orbitals, old_m, n_modes, state.orbitals.col(0), state.grid, seed_width);
  out.coefficients = CoefficientVector::Zero(static_cast<Eigen::Index>(out.basis->size()));
  std::vector<int> occ(n_modes, 0);
  for (std::size_t i = 0; i < state.basis->size(); ++i) {
    const auto old = state.basis->config(i);
    std::fill(occ.begin(), occ.end(), 0);
    std::copy(old.begin(), old.end(), occ.begin());
    out.coefficients[static_cast<Eigen::Index>(out.basis->index_of(occ))] = state.coefficients[static_cast<Eigen::Index>(i)];
  }
  return out;
}

MctdhbState embed_in_grid(const MctdhbState& state, const Grid& grid) {
  const Grid& g0 = state.grid;
  const double dx = g0.spacing();
  const double offset = (g0.left() - grid.left()) / dx;
  const long shift = std::lround(offset);
  if (std::abs(grid.spacing() - dx) > 1e-12 * dx || std::abs(offset - shift) > 1e-6 || shift < 0 ||
      shift + g0.size() > grid.size()) {
    throw std::invalid_argument("embed_in_grid: target grid must contain the state grid with the same aligned spacing");
  }
  MctdhbState out = state;
  out.grid = grid;
  out.orbitals = Eigen::MatrixXcd::Zero(grid.size(), state.modes());
  out.orbitals.middleRows(shift, g0.size()) = state.orbitals;
  return out;
}

}  // namespace comcheck
