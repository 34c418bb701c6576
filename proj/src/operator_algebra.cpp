#include "operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace e91 {

namespace {

constexpr Cplx kI{0.0, 1.0};

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Cplx make_cplx(double re, double im) {
  if (!std::isfinite(re) || !std::isfinite(im)) {
    throw std::invalid_argument("complex value must have finite components");
  }
  return {re, im};
}

void require_unit_modulus(Cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) ||
      std::abs(std::abs(z) - 1.0) > kInputTol) {
    throw std::invalid_argument(std::string(what) + " must have unit modulus");
  }
}

// ---------------------------------------------------------------------------
// ComplexMatrix

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols,
                             std::initializer_list<Cplx> row_major)
    : rows_(rows), cols_(cols), data_(row_major) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("ComplexMatrix: initializer size mismatch");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::zero(std::size_t rows, std::size_t cols) {
  return ComplexMatrix(rows, cols);
}

ComplexMatrix ComplexMatrix::outer(std::span<const Cplx> v) {
  ComplexMatrix m(v.size(), v.size());
  for (std::size_t r = 0; r < v.size(); ++r)
    for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[r] * std::conj(v[c]);
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  return out;
}

Cplx ComplexMatrix::trace() const {
  Cplx t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  require_same_shape(*this, o, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Cplx s) {
  for (auto& x : data_) x *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: inner dimension mismatch");
  ComplexMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Cplx ark = a(r, k);
      if (ark == Cplx{}) continue;
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ar = 0; ar < a.rows(); ++ar)
    for (std::size_t ac = 0; ac < a.cols(); ++ac)
      for (std::size_t br = 0; br < b.rows(); ++br)
        for (std::size_t bc = 0; bc < b.cols(); ++bc)
          out(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
  return out;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

double hermiticity_defect(const ComplexMatrix& m) {
  if (!m.is_square()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = r; c < m.cols(); ++c)
      worst = std::max(worst, std::abs(m(r, c) - std::conj(m(c, r))));
  return worst;
}

ComplexMatrix hermitian_part(const ComplexMatrix& m) {
  ComplexMatrix out = m + m.adjoint();
  out *= 0.5;
  return out;
}

bool all_finite(const ComplexMatrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](Cplx z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
  });
}

// ---------------------------------------------------------------------------
// HermitianOperator / StateDensity / QuantumChannel

namespace {

void check_operator_shape(const ComplexMatrix& m) {
  if (!m.is_square() || (m.rows() != 2 && m.rows() != 4)) {
    throw std::invalid_argument("HermitianOperator: dimension must be 2 or 4");
  }
  if (!all_finite(m)) throw std::invalid_argument("HermitianOperator: non-finite entry");
}

}  // namespace

HermitianOperator::HermitianOperator(ComplexMatrix m) : m_(std::move(m)) {
  check_operator_shape(m_);
  if (hermiticity_defect(m_) > kInputTol) {
    throw std::invalid_argument("HermitianOperator: matrix is not Hermitian");
  }
}

HermitianOperator HermitianOperator::from_computed(const ComplexMatrix& m) {
  check_operator_shape(m);
  if (hermiticity_defect(m) > kResultTol) {
    throw std::domain_error("HermitianOperator: computed matrix is not Hermitian");
  }
  return HermitianOperator(hermitian_part(m), Trusted{});
}

HermitianOperator HermitianOperator::identity(std::size_t dim) {
  return HermitianOperator(ComplexMatrix::identity(dim));
}

StateDensity::StateDensity(ComplexMatrix m) : m_(std::move(m)) {
  if (!m_.is_square() || m_.rows() == 0) throw std::invalid_argument("StateDensity: not square");
  if (!all_finite(m_)) throw std::invalid_argument("StateDensity: non-finite entry");
  if (hermiticity_defect(m_) > kInputTol) throw std::invalid_argument("StateDensity: not Hermitian");
  m_ = hermitian_part(m_);
  if (std::abs(m_.trace() - 1.0) > kResultTol) throw std::invalid_argument("StateDensity: trace != 1");
  if (min_eigenvalue(m_) < -kResultTol) throw std::invalid_argument("StateDensity: not PSD");
}

StateDensity StateDensity::pure(std::span<const Cplx> psi) {
  double norm2 = 0.0;
  for (Cplx a : psi) norm2 += std::norm(a);
  if (!(norm2 > 0.0)) throw std::invalid_argument("StateDensity::pure: zero vector");
  ComplexMatrix m = ComplexMatrix::outer(psi);
  m *= 1.0 / norm2;
  return StateDensity(std::move(m));
}

StateDensity StateDensity::maximally_mixed(std::size_t dim) {
  ComplexMatrix m = ComplexMatrix::identity(dim);
  m *= 1.0 / static_cast<double>(dim);
  return StateDensity(std::move(m));
}

StateDensity StateDensity::mix(const StateDensity& a, const StateDensity& b, double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("StateDensity::mix: weight outside [0,1]");
  return StateDensity(a.matrix() * (1.0 - w) + b.matrix() * w);
}

QuantumChannel::QuantumChannel(std::size_t in_dim, std::size_t out_dim,
                               std::vector<ComplexMatrix> kraus)
    : in_dim_(in_dim), out_dim_(out_dim), kraus_(std::move(kraus)) {
  if (kraus_.empty()) throw std::invalid_argument("QuantumChannel: no Kraus operators");
  for (const auto& k : kraus_) {
    if (k.rows() != out_dim_ || k.cols() != in_dim_) {
      throw std::invalid_argument("QuantumChannel: Kraus operator has wrong shape");
    }
    if (!all_finite(k)) throw std::invalid_argument("QuantumChannel: non-finite Kraus entry");
  }
  if (completeness_residual() > kResultTol) {
    throw std::invalid_argument("QuantumChannel: Kraus set is not trace preserving");
  }
}

QuantumChannel QuantumChannel::identity(std::size_t dim) {
  return QuantumChannel(dim, dim, {ComplexMatrix::identity(dim)});
}

double QuantumChannel::completeness_residual() const {
  ComplexMatrix sum(in_dim_, in_dim_);
  for (const auto& k : kraus_) sum += k.adjoint() * k;
  return max_abs_diff(sum, ComplexMatrix::identity(in_dim_));
}

// ---------------------------------------------------------------------------
// Paulis

HermitianOperator pauli(PauliAxis axis) {
  switch (axis) {
    case PauliAxis::x:
      return HermitianOperator(ComplexMatrix(2, 2, {0.0, -kI, kI, 0.0}));
    case PauliAxis::y:
      return HermitianOperator(ComplexMatrix(2, 2, {1.0, 0.0, 0.0, -1.0}));
    case PauliAxis::z:
      return HermitianOperator(ComplexMatrix(2, 2, {0.0, 1.0, 1.0, 0.0}));
  }
  throw std::invalid_argument("pauli: unknown axis");
}

HermitianOperator generalized_x(Cplx alpha) {
  require_unit_modulus(alpha, "generalized_x: alpha");
  return HermitianOperator(ComplexMatrix(2, 2, {0.0, alpha, std::conj(alpha), 0.0}));
}

HermitianOperator tensor(const HermitianOperator& a, const HermitianOperator& b) {
  if (a.dim() != 2 || b.dim() != 2) throw std::invalid_argument("tensor: both factors must be 2x2");
  return HermitianOperator::from_computed(kron(a.matrix(), b.matrix()));
}

// ---------------------------------------------------------------------------
// Eigensolver

EigenSystem hermitian_eig(const ComplexMatrix& input) {
  if (!input.is_square() || input.rows() == 0) throw std::invalid_argument("hermitian_eig: not square");
  if (!all_finite(input)) throw std::invalid_argument("hermitian_eig: non-finite entry");
  if (hermiticity_defect(input) > kResultTol) throw std::invalid_argument("hermitian_eig: not Hermitian");

  const std::size_t n = input.rows();
  ComplexMatrix a = hermitian_part(input);
  ComplexMatrix v = ComplexMatrix::identity(n);

  double scale = 0.0;
  for (Cplx z : a.data()) scale += std::norm(z);
  scale = std::sqrt(scale);

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a(p, q));
    return std::sqrt(s);
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_norm() <= 1e-17 * scale || scale == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Cplx apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        // Rotation J = diag(1, e*) * [[c, s], [-s, c]] in the (p,q) plane makes
        // (J^dagger A J)_pq vanish.
        const Cplx e = apq / g;
        const double theta = (aqq - app) / (2.0 * g);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        const Cplx jqp = -s * std::conj(e);
        const Cplx jqq = c * std::conj(e);

        for (std::size_t k = 0; k < n; ++k) {  // A <- A J
          const Cplx akp = a(k, p);
          const Cplx akq = a(k, q);
          a(k, p) = akp * c + akq * jqp;
          a(k, q) = akp * s + akq * jqq;
        }
        for (std::size_t k = 0; k < n; ++k) {  // A <- J^dagger A
          const Cplx apk = a(p, k);
          const Cplx aqk = a(q, k);
          a(p, k) = c * apk + std::conj(jqp) * aqk;
          a(q, k) = s * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();
        for (std::size_t k = 0; k < n; ++k) {  // V <- V J
          const Cplx vkp = v(k, p);
          const Cplx vkq = v(k, q);
          v(k, p) = vkp * c + vkq * jqp;
          v(k, q) = vkp * s + vkq * jqq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i).real() > a(j, j).real(); });

  EigenSystem es;
  es.eigenvalues.reserve(n);
  es.eigenvectors.reserve(n);
  for (std::size_t idx : order) {
    es.eigenvalues.push_back(a(idx, idx).real());
    std::vector<Cplx> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v(k, idx);
    es.eigenvectors.push_back(std::move(col));
  }
  return es;
}

ComplexMatrix EigenSystem::reconstruct() const {
  const std::size_t n = eigenvalues.size();
  ComplexMatrix m(n, n);
  for (std::size_t k = 0; k < n; ++k) m += ComplexMatrix::outer(eigenvectors[k]) * eigenvalues[k];
  return m;
}

double min_eigenvalue(const ComplexMatrix& m) { return hermitian_eig(m).eigenvalues.back(); }

// ---------------------------------------------------------------------------
// Channels

StateDensity apply_channel(const QuantumChannel& ch, const StateDensity& rho) {
  if (rho.dim() != ch.in_dim()) throw std::invalid_argument("apply_channel: dimension mismatch");
  ComplexMatrix out(ch.out_dim(), ch.out_dim());
  for (const auto& k : ch.kraus()) out += k * rho.matrix() * k.adjoint();
  return StateDensity(hermitian_part(out));
}

ComplexMatrix adjoint_apply(const QuantumChannel& ch, const ComplexMatrix& obs) {
  if (!obs.is_square() || obs.rows() != ch.out_dim()) {
    throw std::invalid_argument("adjoint_apply: dimension mismatch");
  }
  ComplexMatrix out(ch.in_dim(), ch.in_dim());
  for (const auto& k : ch.kraus()) out += k.adjoint() * obs * k;
  return out;
}

HermitianOperator adjoint_apply(const QuantumChannel& ch, const HermitianOperator& obs) {
  return HermitianOperator::from_computed(adjoint_apply(ch, obs.matrix()));
}

double expectation(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows() || a.rows() != b.cols()) throw std::invalid_argument("expectation: shape mismatch");
  double s = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) s += (a(r, k) * b(k, r)).real();
  return s;
}

// ---------------------------------------------------------------------------
// Measurement

Povm::Povm(std::vector<HermitianOperator> elements) : elements_(std::move(elements)) {
  if (elements_.empty()) throw std::invalid_argument("Povm: no elements");
  const std::size_t d = elements_.front().dim();
  ComplexMatrix sum(d, d);
  for (const auto& e : elements_) {
    if (e.dim() != d) throw std::invalid_argument("Povm: elements differ in dimension");
    if (min_eigenvalue(e) < -kResultTol) throw std::invalid_argument("Povm: element is not PSD");
    sum += e.matrix();
  }
  if (max_abs_diff(sum, ComplexMatrix::identity(d)) > kResultTol) {
    throw std::invalid_argument("Povm: elements do not sum to the identity");
  }
}

std::vector<double> born_probabilities(const StateDensity& rho, const Povm& povm) {
  if (rho.dim() != povm.dim()) throw std::invalid_argument("born_probabilities: dimension mismatch");
  std::vector<double> probs;
  probs.reserve(povm.size());
  double total = 0.0;
  for (const auto& e : povm.elements()) {
    double p = expectation(e.matrix(), rho.matrix());
    if (p < -kResultTol) throw std::domain_error("born_probabilities: negative probability");
    p = std::clamp(p, 0.0, 1.0);
    probs.push_back(p);
    total += p;
  }
  if (std::abs(total - 1.0) > kResultTol) throw std::domain_error("born_probabilities: total != 1");
  for (double& p : probs) p /= total;
  return probs;
}

std::size_t sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] > 0.0) last_nonzero = k;
    acc += probs[k];
    if (u < acc && probs[k] > 0.0) return k;
  }
  return last_nonzero;
}

std::size_t born_sample(const StateDensity& rho, const Povm& povm, Rng& rng) {
  const auto probs = born_probabilities(rho, povm);
  return sample_index(probs, rng);
}

std::size_t born_sample(const StateDensity& rho, const std::vector<HermitianOperator>& projectors,
                        Rng& rng) {
  return born_sample(rho, Povm(projectors), rng);
}

}  // namespace e91
