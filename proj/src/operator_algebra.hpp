#pragma once

// Dense complex linear algebra for the small operators used throughout the
// toolkit: 2x2 single-qubit and 4x4 two-qubit observables, states, Kraus
// channels and Born-rule sampling.
//
// All matrices are stored row-major in the y-basis convention, where
//   X = [[0,-i],[i,0]],  Y = diag(1,-1),  Z = [[0,1],[1,0]].

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "rng.hpp"

namespace e91 {

using Cplx = std::complex<double>;

inline constexpr double kInputTol = 1e-12;  // validation of caller-supplied data
inline constexpr double kResultTol = 1e-10;  // checks on computed results

// Throws std::invalid_argument unless both components are finite.
Cplx make_cplx(double re, double im);

// Throws std::invalid_argument unless | |z| - 1 | <= kInputTol.
void require_unit_modulus(Cplx z, const char* what);

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols);
  ComplexMatrix(std::size_t rows, std::size_t cols,
                std::initializer_list<Cplx> row_major);

  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zero(std::size_t rows, std::size_t cols);
  // |v><v|
  static ComplexMatrix outer(std::span<const Cplx> v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  Cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Cplx& operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const Cplx> data() const { return data_; }

  ComplexMatrix adjoint() const;
  Cplx trace() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Cplx s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Cplx s) { return a *= s; }
  friend ComplexMatrix operator*(Cplx s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cplx> data_;
};

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
// max_{jk} |a_jk - b_jk|; shapes must agree.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
// max_{jk} |m_jk - conj(m_kj)|; infinity for non-square input.
double hermiticity_defect(const ComplexMatrix& m);
// (m + m^dagger) / 2
ComplexMatrix hermitian_part(const ComplexMatrix& m);
bool all_finite(const ComplexMatrix& m);

// Observable on one qubit (dim 2) or a qubit pair (dim 4).
class HermitianOperator {
 public:
  // Validates dim in {2,4}, finite entries and Hermiticity within kInputTol.
  explicit HermitianOperator(ComplexMatrix m);
  // Same, but with the looser post-computation tolerance; the stored matrix is
  // symmetrised so it is exactly Hermitian.
  static HermitianOperator from_computed(const ComplexMatrix& m);
  static HermitianOperator identity(std::size_t dim);

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }
  Cplx operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

 private:
  struct Trusted {};
  HermitianOperator(ComplexMatrix m, Trusted) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

class StateDensity {
 public:
  // Hermitian within kInputTol, unit trace within kResultTol, minimum
  // eigenvalue >= -kResultTol.
  explicit StateDensity(ComplexMatrix m);
  static StateDensity pure(std::span<const Cplx> psi);
  static StateDensity maximally_mixed(std::size_t dim);
  // (1 - w) * a + w * b
  static StateDensity mix(const StateDensity& a, const StateDensity& b, double w);

  std::size_t dim() const { return m_.rows(); }
  const ComplexMatrix& matrix() const { return m_; }

 private:
  ComplexMatrix m_;
};

class QuantumChannel {
 public:
  // Kraus operators are out_dim x in_dim; sum K^dagger K = I within kResultTol.
  QuantumChannel(std::size_t in_dim, std::size_t out_dim, std::vector<ComplexMatrix> kraus);
  static QuantumChannel identity(std::size_t dim);

  std::size_t in_dim() const { return in_dim_; }
  std::size_t out_dim() const { return out_dim_; }
  const std::vector<ComplexMatrix>& kraus() const { return kraus_; }

  // max-entry distance of sum K^dagger K from the identity.
  double completeness_residual() const;

 private:
  std::size_t in_dim_;
  std::size_t out_dim_;
  std::vector<ComplexMatrix> kraus_;
};

struct EigenSystem {
  std::vector<double> eigenvalues;           // descending
  std::vector<std::vector<Cplx>> eigenvectors;  // eigenvectors[k] pairs with eigenvalues[k]

  ComplexMatrix reconstruct() const;
};

enum class PauliAxis { x, y, z };

HermitianOperator pauli(PauliAxis axis);
HermitianOperator generalized_x(Cplx alpha);
HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b);

// Cyclic complex Jacobi. Accepts any square matrix that is Hermitian within
// kResultTol (Choi matrices are 16x16); throws std::invalid_argument otherwise.
EigenSystem hermitian_eig(const ComplexMatrix& m);
inline EigenSystem hermitian_eig(const HermitianOperator& m) { return hermitian_eig(m.matrix()); }

double min_eigenvalue(const ComplexMatrix& m);
inline double min_eigenvalue(const HermitianOperator& m) { return min_eigenvalue(m.matrix()); }
inline bool is_psd(const HermitianOperator& m, double tol = kResultTol) {
  return min_eigenvalue(m) >= -tol;
}

StateDensity apply_channel(const QuantumChannel& ch, const StateDensity& rho);
HermitianOperator adjoint_apply(const QuantumChannel& ch, const HermitianOperator& obs);
ComplexMatrix adjoint_apply(const QuantumChannel& ch, const ComplexMatrix& obs);

// Re Tr[a b]
double expectation(const ComplexMatrix& a, const ComplexMatrix& b);

// Validated measurement: PSD elements summing to the identity.
class Povm {
 public:
  explicit Povm(std::vector<HermitianOperator> elements);
  std::size_t size() const { return elements_.size(); }
  std::size_t dim() const { return elements_.front().dim(); }
  const std::vector<HermitianOperator>& elements() const { return elements_; }

 private:
  std::vector<HermitianOperator> elements_;
};

// Born probabilities Tr[P_k rho]; entries in [-kResultTol, 0) are clipped to
// zero and the vector renormalised. Larger negativity or a total that misses
// one by more than kResultTol throws std::domain_error.
std::vector<double> born_probabilities(const StateDensity& rho, const Povm& povm);

// Index drawn from a probability vector produced by born_probabilities, by
// inversion of the cumulative sum at u in [0, 1). Zero-probability entries are
// never returned.
std::size_t sample_index(std::span<const double> probs, double u);
inline std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  return sample_index(probs, rng.uniform());
}

std::size_t born_sample(const StateDensity& rho, const Povm& povm, Rng& rng);
std::size_t born_sample(const StateDensity& rho, const std::vector<HermitianOperator>& projectors,
                        Rng& rng);

}  // namespace e91
