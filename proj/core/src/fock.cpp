#include "comcheck/fock.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace comcheck {

PairIndex::PairIndex(int modes) : modes_(modes), lookup_(static_cast<std::size_t>(modes) * modes, -1) {
  for (int q = 0; q < modes; ++q) {
    for (int l = q; l < modes; ++l) {
      const int p = static_cast<int>(first_.size());
      first_.push_back(q);
      second_.push_back(l);
      lookup_[q * modes + l] = p;
      lookup_[l * modes + q] = p;
    }
  }
}

ModeTensor4 ModeTensor4::from_pairs(const Eigen::MatrixXcd& pairs, const PairIndex& index) {
  const int m = index.modes();
  ModeTensor4 t(m);
  for (int k = 0; k < m; ++k)
    for (int s = 0; s < m; ++s)
      for (int q = 0; q < m; ++q)
        for (int l = 0; l < m; ++l) t(k, s, q, l) = pairs(index(k, s), index(q, l));
  return t;
}

std::size_t FockBasis::count(int n_particles, int n_modes) {
  if (n_particles < 0 || n_modes < 1) return 0;
  // C(N+M-1, M-1) built incrementally; each intermediate value is itself a binomial.
  std::size_t value = 1;
  for (int j = 1; j < n_modes; ++j) {
    // value * (N + j) / j is a binomial; divide by the common factor first.
    const std::size_t a = static_cast<std::size_t>(n_particles) + j;
    const std::size_t g = std::gcd(value, static_cast<std::size_t>(j));
    const std::size_t b = static_cast<std::size_t>(j) / g;
    std::size_t next = 0;
    if (__builtin_mul_overflow(value / g, a / b, &next)) {
      throw std::overflow_error("FockBasis::count: configuration count overflows 64 bits");
    }
    value = next;
  }
  return value;
}

std::size_t FockBasis::count_cached(int particles, int modes) const {
  return counts_[static_cast<std::size_t>(particles) * (m_ + 1) + modes];
}

// Number of configurations that precede `occ` in descending lexicographic order.
// For position k, every larger value v > occ[k] leaves (total - v) particles in
// the remaining modes; summing those counts collapses to a single binomial.
std::size_t FockBasis::rank(std::span<const int> occ, int total) const {
  std::size_t idx = 0;
  int remaining = total;
  for (int k = 0; k + 1 < m_; ++k) {
    const int rest_modes = m_ - 1 - k;
    if (occ[k] < remaining) idx += count_cached(remaining - occ[k] - 1, rest_modes + 1);
    remaining -= occ[k];
  }
  return idx;
}

namespace {

// Advances to the next configuration in descending lexicographic order.
bool next_config(std::vector<int>& occ) {
  const int m = static_cast<int>(occ.size());
  int k = m - 2;
  while (k >= 0 && occ[k] == 0) --k;
  if (k < 0) return false;
  int tail = 0;
  for (int j = k + 1; j < m; ++j) {
    tail += occ[j];
    occ[j] = 0;
  }
  --occ[k];
  occ[k + 1] = tail + 1;
  return true;
}

template <class Visit>
void for_each_config(int n, int m, Visit&& visit) {
  if (n < 0) return;
  std::vector<int> occ(m, 0);
  occ[0] = n;
  std::size_t i = 0;
  do {
    visit(i++, occ);
  } while (next_config(occ));
}

}  // namespace

FockBasis::FockBasis(int n_particles, int n_modes, std::size_t max_configs)
    : n_(n_particles), m_(n_modes), size_(0), pairs_(n_modes > 0 ? n_modes : 1) {
  if (n_particles < 1) throw std::invalid_argument("FockBasis: need N >= 1");
  if (n_modes < 1) throw std::invalid_argument("FockBasis: need M >= 1");
  size_ = count(n_particles, n_modes);
  if (size_ > max_configs) {
    throw ResourceLimitError("FockBasis: C(N+M-1,N) = " + std::to_string(size_) + " for N=" +
                             std::to_string(n_particles) + ", M=" + std::to_string(n_modes) +
                             " exceeds the configuration cap " + std::to_string(max_configs));
  }
  counts_.resize(static_cast<std::size_t>(n_ + 1) * (m_ + 1), 0);
  for (int p = 0; p <= n_; ++p)
    for (int mm = 1; mm <= m_; ++mm) counts_[static_cast<std::size_t>(p) * (m_ + 1) + mm] = count(p, mm);

  const int npairs = pairs_.size();
  size_m1_ = count(n_ - 1, m_);
  size_m2_ = n_ >= 2 ? count(n_ - 2, m_) : 0;

  occupations_.resize(size_ * m_);
  lower1_.assign(size_ * m_, -1);
  lower1_f_.assign(size_ * m_, 0.0);
  lower2_.assign(size_ * npairs, -1);
  lower2_f_.assign(size_ * npairs, 0.0);

  std::vector<int> work(m_);
  for_each_config(n_, m_, [&](std::size_t i, const std::vector<int>& occ) {
    std::copy(occ.begin(), occ.end(), occupations_.begin() + static_cast<std::ptrdiff_t>(i * m_));
    for (int q = 0; q < m_; ++q) {
      if (occ[q] == 0) continue;
      work = occ;
      --work[q];
      lower1_[i * m_ + q] = static_cast<std::int64_t>(rank(work, n_ - 1));
      lower1_f_[i * m_ + q] = std::sqrt(static_cast<double>(occ[q]));
    }
    if (n_ < 2) return;
    for (int p = 0; p < npairs; ++p) {
      const int q = pairs_.first(p), l = pairs_.second(p);
      double f = 0.0;
      if (q == l) {
        if (occ[q] < 2) continue;
        f = std::sqrt(static_cast<double>(occ[q]) * (occ[q] - 1));
      } else {
        if (occ[q] < 1 || occ[l] < 1) continue;
        f = std::sqrt(static_cast<double>(occ[q]) * occ[l]);
      }
      work = occ;
      --work[q];
      --work[l];
      lower2_[i * npairs + p] = static_cast<std::int64_t>(rank(work, n_ - 2));
      lower2_f_[i * npairs + p] = f;
    }
  });

  raise1_.assign(size_m1_ * m_, -1);
  raise1_f_.assign(size_m1_ * m_, 0.0);
  for_each_config(n_ - 1, m_, [&](std::size_t i, const std::vector<int>& occ) {
    for (int q = 0; q < m_; ++q) {
      work = occ;
      ++work[q];
      raise1_[i * m_ + q] = static_cast<std::int64_t>(rank(work, n_));
      raise1_f_[i * m_ + q] = std::sqrt(static_cast<double>(occ[q] + 1));
    }
  });

  if (n_ >= 2) {
    raise2_.assign(size_m2_ * npairs, -1);
    raise2_f_.assign(size_m2_ * npairs, 0.0);
    for_each_config(n_ - 2, m_, [&](std::size_t i, const std::vector<int>& occ) {
      for (int p = 0; p < npairs; ++p) {
        const int q = pairs_.first(p), l = pairs_.second(p);
        work = occ;
        ++work[q];
        ++work[l];
        raise2_[i * npairs + p] = static_cast<std::int64_t>(rank(work, n_));
        raise2_f_[i * npairs + p] = q == l ? std::sqrt((occ[q] + 1.0) * (occ[q] + 2.0))
                                           : std::sqrt((occ[q] + 1.0) * (occ[l] + 1.0));
      }
    });
  }
}

std::size_t FockBasis::index_of(std::span<const int> occupation) const {
  if (static_cast<int>(occupation.size()) != m_) throw std::invalid_argument("index_of: wrong number of modes");
  int total = 0;
  for (int v : occupation) {
    if (v < 0) throw std::invalid_argument("index_of: negative occupation");
    total += v;
  }
  if (total != n_) throw std::invalid_argument("index_of: occupations do not sum to N");
  return rank(occupation, n_);
}

std::shared_ptr<const FockBasis> enumerate_configs(int n_particles, int n_modes, std::size_t max_configs) {
  return std::make_shared<const FockBasis>(n_particles, n_modes, max_configs);
}

namespace {

// D1(m, q) = (a_q C)_m over the (N-1)-particle basis.
Eigen::MatrixXcd lower_once(const CoefficientVector& c, const FockBasis& b) {
  const int m = b.modes();
  Eigen::MatrixXcd d(static_cast<Eigen::Index>(b.size_minus1()), m);
  for (std::size_t i = 0; i < b.size_minus1(); ++i)
    for (int q = 0; q < m; ++q) d(static_cast<Eigen::Index>(i), q) = b.raise1_factor(i, q) * c[b.raise1(i, q)];
  return d;
}

// D2(m, p) = (a_l a_q C)_m over the (N-2)-particle basis, p = (q, l).
Eigen::MatrixXcd lower_twice(const CoefficientVector& c, const FockBasis& b) {
  const int np = b.pairs().size();
  Eigen::MatrixXcd d(static_cast<Eigen::Index>(b.size_minus2()), np);
  for (std::size_t i = 0; i < b.size_minus2(); ++i)
    for (int p = 0; p < np; ++p) d(static_cast<Eigen::Index>(i), p) = b.raise2_factor(i, p) * c[b.raise2(i, p)];
  return d;
}

}  // namespace

CoefficientVector apply_many_body_h(const CoefficientVector& c, const ModeOperators& ops, const FockBasis& basis) {
  const int m = basis.modes();
  const int np = basis.pairs().size();
  if (static_cast<std::size_t>(c.size()) != basis.size()) {
    throw std::invalid_argument("apply_many_body_h: coefficient vector does not match basis");
  }
  if (ops.h.rows() != m || ops.h.cols() != m) throw std::invalid_argument("apply_many_body_h: h is not M x M");
  if (basis.particles() >= 2 && (ops.w_pairs.rows() != np || ops.w_pairs.cols() != np)) {
    throw std::invalid_argument("apply_many_body_h: W does not match the pair index");
  }

  CoefficientVector out = CoefficientVector::Zero(c.size());

  // One-body: (sum_kq h_kq a+_k a_q C)_n = sum_k sqrt(n_k) [D1 h^T](n - e_k, k).
  const Eigen::MatrixXcd g1 = lower_once(c, basis) * ops.h.transpose();
  for (std::size_t n = 0; n < basis.size(); ++n) {
    cplx acc{};
    for (int k = 0; k < m; ++k) {
      const auto idx = basis.lower1(n, k);
      if (idx >= 0) acc += basis.lower1_factor(n, k) * g1(idx, k);
    }
    out[static_cast<Eigen::Index>(n)] = acc;
  }
  if (basis.particles() < 2) return out;

  // Two-body: G2(m, ks) = sum_{ql} W_ksql (a_l a_q C)_m, then raise by a+_k a+_s.
  const auto& pairs = basis.pairs();
  Eigen::MatrixXcd w_mult = ops.w_pairs;
  for (int p = 0; p < np; ++p) w_mult.col(p) *= pairs.multiplicity(p);
  const Eigen::MatrixXcd g2 = lower_twice(c, basis) * w_mult.transpose();
  for (std::size_t n = 0; n < basis.size(); ++n) {
    cplx acc{};
    for (int p = 0; p < np; ++p) {
      const auto idx = basis.lower2(n, p);
      if (idx >= 0) acc += (0.5 * pairs.multiplicity(p) * basis.lower2_factor(n, p)) * g2(idx, p);
    }
    out[static_cast<Eigen::Index>(n)] += acc;
  }
  return out;
}

ReducedDensities reduced_densities_unchecked(const CoefficientVector& c, const FockBasis& basis) {
  if (static_cast<std::size_t>(c.size()) != basis.size()) {
    throw std::invalid_argument("reduced_densities: coefficient vector does not match basis");
  }
  ReducedDensities rd;
  const Eigen::MatrixXcd d1 = lower_once(c, basis);
  rd.rho1 = d1.adjoint() * d1;
  const int np = basis.pairs().size();
  if (basis.particles() >= 2) {
    const Eigen::MatrixXcd d2 = lower_twice(c, basis);
    rd.rho2_pairs = d2.adjoint() * d2;
  } else {
    rd.rho2_pairs = Eigen::MatrixXcd::Zero(np, np);
  }
  return rd;
}

ReducedDensities reduced_densities(const CoefficientVector& c, const FockBasis& basis) {
  const double norm2 = c.squaredNorm();
  if (std::abs(norm2 - 1.0) > 1e-8) {
    throw std::invalid_argument("reduced_densities: coefficients are not normalized (|C|^2 = " +
                                std::to_string(norm2) + ")");
  }
  return reduced_densities_unchecked(c, basis);
}

double energy_from_densities(const ModeOperators& ops, const ReducedDensities& rd, const PairIndex& index) {
  cplx e = (ops.h.array() * rd.rho1.array()).sum();
  const int np = index.size();
  if (ops.w_pairs.size() > 0 && rd.rho2_pairs.size() > 0) {
    cplx e2{};
    for (int p = 0; p < np; ++p)
      for (int pp = 0; pp < np; ++pp)
        e2 += index.multiplicity(p) * index.multiplicity(pp) * ops.w_pairs(p, pp) * rd.rho2_pairs(p, pp);
    e += 0.5 * e2;
  }
  return e.real();
}

}  // namespace comcheck
