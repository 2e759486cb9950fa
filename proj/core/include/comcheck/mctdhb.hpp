#pragma once

// Multi-configurational time-dependent Hartree for bosons (MCTDHB).
//
// The many-body state is sum_n C_n prod_k (b+_k)^{n_k} / sqrt(n_k!) |vac> with
// M time-dependent orbitals phi_k(x, t). Working equations (projector gauge,
// <phi_k | d phi_j / dt> = 0):
//
//   i dC/dt      = H C
//   i dphi_j/dt  = P [ h phi_j + g sum_{k,s,q,l} (rho1^-1)_{jk} rho2_{ksql} conj(phi_s) phi_l phi_q ]
//
// with P = 1 - sum_m |phi_m><phi_m|. rho1 is inverted after flooring its
// eigenvalues at 1e-8 N. Imaginary time replaces t by -i tau; after each step
// the orbitals are orthonormalized symmetrically and C is renormalized.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "comcheck/fock.hpp"
#include "comcheck/grid.hpp"

namespace comcheck {

enum class TimeMode { kReal, kImaginary };

/// Orbitals (one per column, n_points x M) plus configuration coefficients.
struct MctdhbState {
  Grid grid{1.0, Grid::kMinPoints};
  std::shared_ptr<const FockBasis> basis;
  Eigen::MatrixXcd orbitals;
  CoefficientVector coefficients;
  double time = 0.0;

  int particles() const noexcept { return basis->particles(); }
  int modes() const noexcept { return basis->modes(); }

  /// Largest deviation of the orbital overlap matrix from the identity.
  double orthonormality_error() const;
  /// | sum |C|^2 - 1 |.
  double norm_error() const { return std::abs(coefficients.squaredNorm() - 1.0); }

  /// Throws std::invalid_argument on shape mismatches, non-finite entries or
  /// orthonormality / norm errors above `tolerance`.
  void validate(double tolerance = 1e-8) const;
};

/// Thrown when a step changes norms by more than 1e-3 (dt too large).
class StepRejectedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// h_kq = <phi_k| -1/(2m) d^2 + m omega(t)^2 x^2 / 2 |phi_q> and
/// W_ksql = g(t) int conj(phi_k phi_s) phi_q phi_l dx.
ModeOperators project_hamiltonian(const Eigen::MatrixXcd& orbitals, const Grid& grid, const HamiltonianSpec& spec,
                                  double t);

struct StateDerivative {
  CoefficientVector coefficients;
  Eigen::MatrixXcd orbitals;
  double energy = 0.0;               ///< <C|H C> / <C|C> at the evaluated state
  double min_rho1_eigenvalue = 0.0;  ///< smallest eigenvalue of rho1 / |C|^2
  bool regularized = false;          ///< rho1 eigenvalue floor was engaged
};

/// Time derivative of (C, orbitals). `hamiltonian_time` selects omega(t) and
/// g(t); it defaults to state.time. In imaginary time the coefficient part is
/// -(H - E) C, which keeps |C| constant to first order.
StateDerivative eom_rhs(const MctdhbState& state, const HamiltonianSpec& spec, TimeMode mode = TimeMode::kReal,
                        std::optional<double> hamiltonian_time = std::nullopt);

struct StepOptions {
  TimeMode mode = TimeMode::kReal;
  /// Time at which the Hamiltonian is evaluated in imaginary-time mode.
  double imaginary_hamiltonian_time = HamiltonianSpec::kBeforeStart;
  double max_norm_drift = 1e-3;
};

struct StepInfo {
  double energy_at_start = 0.0;
  ModeMatrix rho1_at_start;  ///< normalized <a+_k a_q> of the input state
  bool regularized = false;
  double norm_drift = 0.0;            ///< | |C|^2 - 1 | before renormalization
  double orthonormality_drift = 0.0;  ///< orbital overlap error before renormalization
};

/// One classical RK4 step. Real time advances state.time by dt (C is advanced
/// in the frame rotating with the initial energy, which alters only its global
/// phase); imaginary time leaves it unchanged. Throws StepRejectedError if the
/// norm of C or the orbital overlaps drift by more than options.max_norm_drift;
/// otherwise orbitals are re-orthonormalized (Loewdin) and C renormalized.
MctdhbState step(const MctdhbState& state, const HamiltonianSpec& spec, double dt, const StepOptions& options,
                 StepInfo* info = nullptr);
MctdhbState step(const MctdhbState& state, const HamiltonianSpec& spec, double dt, TimeMode mode);

struct RelaxOptions {
  double dtau = 1e-3;
  double energy_tolerance = 1e-10;
  /// Consecutive full steps below energy_tolerance required for convergence.
  int settle_steps = 20;
  long max_iterations = 400000;
  /// Hamiltonian parameters are taken at this time (pre-quench by default).
  double hamiltonian_time = HamiltonianSpec::kBeforeStart;
  /// Permit relaxation without a trap; the box walls then bind the state.
  bool allow_untrapped = false;
  /// Keep every n-th history entry (the last one is always kept).
  int history_stride = 1;
  /// Replace the initial coefficients by the lowest eigenvector of H in the
  /// initial orbitals before relaxing. Starting from |N, 0, ...> leaves rho1
  /// singular and the orbital equations stiff.
  bool prediagonalize = true;
};

struct RelaxRecord {
  long iteration = 0;
  double energy = 0.0;
  double delta = 0.0;
};

struct GroundStateResult {
  MctdhbState state;
  double energy = 0.0;
  std::vector<RelaxRecord> history;
  long iterations = 0;
  long regularized_steps = 0;
  long reduced_steps = 0;  ///< rejected steps retried with half the step
};

class RelaxationError : public std::runtime_error {
 public:
  RelaxationError(const std::string& what, GroundStateResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const GroundStateResult& partial() const noexcept { return partial_; }

 private:
  GroundStateResult partial_;
};

/// Lowest eigenpair of the many-body Hamiltonian in the fixed orbital set of
/// `state` (Lanczos with full reorthogonalization, restarted from the Ritz
/// vector). Returns the eigenvalue and overwrites state.coefficients.
double diagonalize_coefficients(MctdhbState& state, const HamiltonianSpec& spec, double t,
                                double residual_tolerance = 1e-10);

/// Imaginary-time relaxation until |Delta E| per step < energy_tolerance for
/// settle_steps consecutive steps.
/// A rejected step is retried with half the step; the step doubles back after
/// 200 accepted steps. Convergence is only declared at the full step dtau.
/// Orbital phases of the result are pinned so that each orbital's
/// largest-magnitude sample is real and positive.
GroundStateResult relax(const MctdhbState& init, const HamiltonianSpec& spec, const RelaxOptions& options = {});

/// Observables recorded during real-time propagation.
struct TimeSeries {
  int particles = 0;
  int modes = 0;
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> sigma_r2;  ///< center-of-mass variance
  std::vector<double> sigma_n2;  ///< single-particle density variance
  std::vector<std::vector<double>> occupations;  ///< natural occupancies, descending
  std::vector<RealField> densities;              ///< optional snapshots

  std::size_t size() const noexcept { return times.size(); }
  /// Smallest natural occupancy divided by N at every recorded time.
  std::vector<double> least_occupation_fraction() const;
};

struct PropagateOptions {
  double t_final = 1.0;
  double dt = 1e-3;
  int record_every = 10;  ///< steps between records; t = 0 is always recorded
  bool record_density = false;
  /// Abort when the normalized density rho(x)/N at either outermost grid
  /// point exceeds this value.
  double edge_threshold = 1e-6;
  /// Called after every record (progress reporting); may be empty.
  std::function<void(const TimeSeries&)> on_record;
};

struct PropagationResult {
  TimeSeries series;
  MctdhbState final_state;
  long regularized_steps = 0;
};

/// Real-time propagation stopped; carries the last accepted state and the
/// records taken so far.
class PropagationError : public std::runtime_error {
 public:
  PropagationError(const std::string& what, MctdhbState state, TimeSeries partial)
      : std::runtime_error(what), state_(std::move(state)), partial_(std::move(partial)) {}
  const MctdhbState& state() const noexcept { return state_; }
  const TimeSeries& partial() const noexcept { return partial_; }

 private:
  MctdhbState state_;
  TimeSeries partial_;
};

/// Density reached the computational box edge.
class BoxOverflowError : public PropagationError {
 public:
  using PropagationError::PropagationError;
};

/// Fixed-step RK4 real-time evolution from init.time to init.time + t_final.
/// Throws BoxOverflowError at the edge threshold and PropagationError when a
/// step is rejected.
PropagationResult propagate(const MctdhbState& init, const HamiltonianSpec& spec, const PropagateOptions& options);

enum class ShapeKind { kSech, kGaussian, kCustom };

struct InitialShape {
  ShapeKind kind = ShapeKind::kGaussian;
  /// sech(x / width) or exp(-x^2 / (2 width^2)); also scales the Hermite seeds.
  double width = 1.0;
  /// Used when kind == kCustom; normalized internally.
  ComplexField custom;
};

/// Product state |N, 0, ..., 0>: phi_1 is the requested normalized shape
/// (centered on the grid), phi_k for k >= 2 are phi_1 H_{k-1}(x / width)
/// orthonormalized by Gram-Schmidt.
MctdhbState init_product_state(const InitialShape& shape, int n_particles, int n_modes, const Grid& grid,
                               std::size_t max_configs = FockBasis::kDefaultMaxConfigs);

/// Pins each orbital's phase (largest-magnitude sample real-positive) and
/// applies the compensating phase to C, leaving the many-body state unchanged.
void pin_orbital_phases(MctdhbState& state);

/// Symmetric (Loewdin) orthonormalization of the orbital set.
void orthonormalize_symmetric(Eigen::MatrixXcd& orbitals, const Grid& grid);

/// Replaces the orbital set by a larger one: existing orbitals are kept and
/// new ones seeded as in init_product_state; C is embedded with zero
/// amplitude on configurations that occupy the new modes.
MctdhbState pad_modes(const MctdhbState& state, int n_modes, double seed_width = 1.0);

/// Same state on a larger grid with identical, aligned spacing; orbitals are
/// zero outside the original box.
MctdhbState embed_in_grid(const MctdhbState& state, const Grid& grid);

}  // namespace comcheck
