#pragma once

// N-boson configuration space over M modes.
//
// Index conventions (used everywhere in this library):
//   rho1(k,q)       = <a+_k a_q>
//   rho2(k,s,q,l)   = <a+_k a+_s a_l a_q>
//   h(k,q)          = <phi_k| h |phi_q>
//   W(k,s,q,l)      = g * int conj(phi_k) conj(phi_s) phi_q phi_l dx
//   H = sum h(k,q) a+_k a_q + 1/2 sum W(k,s,q,l) a+_k a+_s a_l a_q
//   E = sum h(k,q) rho1(k,q) + 1/2 sum W(k,s,q,l) rho2(k,s,q,l)
//
// Two-body quantities are symmetric under k<->s together with q<->l and, for
// contact interactions, separately in (k,s) and in (q,l). They are therefore
// stored as matrices over unordered mode pairs (PairMatrix); ModeTensor4 is the
// expanded M^4 view.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

namespace comcheck {

using cplx = std::complex<double>;
using CoefficientVector = Eigen::VectorXcd;
using ModeMatrix = Eigen::MatrixXcd;

/// Thrown when a requested configuration space exceeds the configured cap.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumerates unordered mode pairs (q <= l) in row-major triangular order.
class PairIndex {
 public:
  explicit PairIndex(int modes);

  int modes() const noexcept { return modes_; }
  int size() const noexcept { return static_cast<int>(first_.size()); }
  int operator()(int q, int l) const noexcept { return lookup_[q * modes_ + l]; }
  int first(int p) const noexcept { return first_[p]; }
  int second(int p) const noexcept { return second_[p]; }
  /// Number of ordered pairs mapping to p: 1 on the diagonal, 2 otherwise.
  double multiplicity(int p) const noexcept { return first_[p] == second_[p] ? 1.0 : 2.0; }

 private:
  int modes_;
  std::vector<int> lookup_;
  std::vector<int> first_;
  std::vector<int> second_;
};

/// Rank-4 mode tensor T(k,s,q,l) with dense M^4 storage.
class ModeTensor4 {
 public:
  ModeTensor4() = default;
  explicit ModeTensor4(int modes) : modes_(modes), data_(static_cast<std::size_t>(modes) * modes * modes * modes) {}

  int modes() const noexcept { return modes_; }
  cplx& operator()(int k, int s, int q, int l) noexcept { return data_[index(k, s, q, l)]; }
  const cplx& operator()(int k, int s, int q, int l) const noexcept { return data_[index(k, s, q, l)]; }

  /// Expands a pair matrix P((k,s),(q,l)) into the full tensor.
  static ModeTensor4 from_pairs(const Eigen::MatrixXcd& pairs, const PairIndex& index);

 private:
  std::size_t index(int k, int s, int q, int l) const noexcept {
    return ((static_cast<std::size_t>(k) * modes_ + s) * modes_ + q) * modes_ + l;
  }
  int modes_ = 0;
  std::vector<cplx> data_;
};

/// Occupation-number basis of N bosons in M modes, ordered lexicographically
/// descending in (n_1, n_2, ...). For N = 2, M = 2: (2,0), (1,1), (0,2).
///
/// Besides the configurations it holds the hop tables used by the many-body
/// matrix-vector product: for each configuration of the (N-1)- and
/// (N-2)-particle spaces, where a single a+_q (pair a+_q a+_l) lands in the
/// N-particle space, and for each N-particle configuration where a single
/// a_q (pair a_l a_q) lands below. All products are gathers with a fixed
/// summation order, so results do not depend on evaluation order.
class FockBasis {
 public:
  static constexpr std::size_t kDefaultMaxConfigs = 10'000'000;

  FockBasis(int n_particles, int n_modes, std::size_t max_configs = kDefaultMaxConfigs);

  /// Number of configurations C(N+M-1, N); throws std::overflow_error if it
  /// does not fit into 64 bits.
  static std::size_t count(int n_particles, int n_modes);

  int particles() const noexcept { return n_; }
  int modes() const noexcept { return m_; }
  std::size_t size() const noexcept { return size_; }
  const PairIndex& pairs() const noexcept { return pairs_; }

  std::span<const int> config(std::size_t i) const {
    return {occupations_.data() + i * m_, static_cast<std::size_t>(m_)};
  }
  /// Position of an occupation vector; throws std::invalid_argument if it is
  /// not an N-particle configuration over M modes.
  std::size_t index_of(std::span<const int> occupation) const;

  // Hop tables. Index -1 marks an impossible hop.
  std::size_t size_minus1() const noexcept { return size_m1_; }
  std::size_t size_minus2() const noexcept { return size_m2_; }
  std::int64_t lower1(std::size_t n, int q) const noexcept { return lower1_[n * m_ + q]; }
  double lower1_factor(std::size_t n, int q) const noexcept { return lower1_f_[n * m_ + q]; }
  std::int64_t raise1(std::size_t m, int q) const noexcept { return raise1_[m * m_ + q]; }
  double raise1_factor(std::size_t m, int q) const noexcept { return raise1_f_[m * m_ + q]; }
  std::int64_t lower2(std::size_t n, int p) const noexcept { return lower2_[n * pairs_.size() + p]; }
  double lower2_factor(std::size_t n, int p) const noexcept { return lower2_f_[n * pairs_.size() + p]; }
  std::int64_t raise2(std::size_t m, int p) const noexcept { return raise2_[m * pairs_.size() + p]; }
  double raise2_factor(std::size_t m, int p) const noexcept { return raise2_f_[m * pairs_.size() + p]; }

 private:
  std::size_t rank(std::span<const int> occ, int total) const;
  std::size_t count_cached(int particles, int modes) const;

  int n_;
  int m_;
  std::size_t size_;
  std::size_t size_m1_ = 0;
  std::size_t size_m2_ = 0;
  PairIndex pairs_;
  std::vector<std::size_t> counts_;  // (N+1) x (M+1) table of count(p, m)
  std::vector<int> occupations_;
  std::vector<std::int64_t> lower1_;
  std::vector<double> lower1_f_;
  std::vector<std::int64_t> raise1_;
  std::vector<double> raise1_f_;
  std::vector<std::int64_t> lower2_;
  std::vector<double> lower2_f_;
  std::vector<std::int64_t> raise2_;
  std::vector<double> raise2_f_;
};

std::shared_ptr<const FockBasis> enumerate_configs(int n_particles, int n_modes,
                                                   std::size_t max_configs = FockBasis::kDefaultMaxConfigs);

/// One- and two-body matrix elements in the orbital basis. `w_pairs` holds
/// W((k,s),(q,l)) over unordered pairs.
struct ModeOperators {
  ModeMatrix h;
  Eigen::MatrixXcd w_pairs;

  ModeTensor4 w_tensor(const PairIndex& index) const { return ModeTensor4::from_pairs(w_pairs, index); }
};

/// Expectation values <a+_k a_q> and <a+_k a+_s a_l a_q>; `rho2_pairs` is the
/// pair-matrix form indexed like ModeOperators::w_pairs.
struct ReducedDensities {
  ModeMatrix rho1;
  Eigen::MatrixXcd rho2_pairs;

  ModeTensor4 rho2(const PairIndex& index) const { return ModeTensor4::from_pairs(rho2_pairs, index); }
};

/// Returns H C for the second-quantized Hamiltonian defined by h and W.
CoefficientVector apply_many_body_h(const CoefficientVector& c, const ModeOperators& ops, const FockBasis& basis);

/// Throws std::invalid_argument if C is not normalized to within 1e-8.
ReducedDensities reduced_densities(const CoefficientVector& c, const FockBasis& basis);

/// Same contraction without the normalization check; the result scales with |C|^2.
ReducedDensities reduced_densities_unchecked(const CoefficientVector& c, const FockBasis& basis);

/// E = sum h(k,q) rho1(k,q) + 1/2 sum W rho2 (real part).
double energy_from_densities(const ModeOperators& ops, const ReducedDensities& rd, const PairIndex& index);

}  // namespace comcheck
