#include "squash.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace e91 {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// 90 degree rotation about Z in the y-basis; conjugation maps X to Y.
ComplexMatrix z_rotation_90() {
  const double h = 1.0 / kSqrt2;
  return ComplexMatrix(2, 2, {Cplx{h, 0.0}, Cplx{0.0, h}, Cplx{0.0, h}, Cplx{h, 0.0}});
}

ComplexMatrix tensor_matrix(const HermitianOperator& a, const HermitianOperator& b) {
  return kron(a.matrix(), b.matrix());
}

// Partial trace over the output factor of an (in*out)x(in*out) matrix.
ComplexMatrix trace_out(const ComplexMatrix& j, std::size_t in, std::size_t out) {
  ComplexMatrix r(in, in);
  for (std::size_t i = 0; i < in; ++i)
    for (std::size_t k = 0; k < in; ++k)
      for (std::size_t a = 0; a < out; ++a) r(i, k) += j(i * out + a, k * out + a);
  return r;
}

}  // namespace

double flip_amplitude(double phi) {
  if (!std::isfinite(phi) || std::abs(phi) > std::numbers::pi / 4.0 + kInputTol) {
    throw std::invalid_argument("flip_amplitude: |phi| must not exceed pi/4");
  }
  const double s = std::sin(phi);
  const double mag = std::min(1.0, (1.0 + kSqrt2) * std::abs(s));
  if (s > 0.0) return mag;
  if (s < 0.0) return -mag;
  return 0.0;
}

SquashChannel build_squash(Cplx alpha, Cplx beta) {
  const CHSHMeasurement m = build_chsh(alpha, beta);
  const double a = flip_amplitude(m.phi);
  const ComplexMatrix r = z_rotation_90();
  const ComplexMatrix z180 = pauli(PauliAxis::z).matrix();

  std::vector<ComplexMatrix> kraus;
  const double w_keep = (1.0 + a) / 2.0;
  const double w_flip = (1.0 - a) / 2.0;
  if (w_keep > 0.0) kraus.push_back(kron(r, r) * std::sqrt(w_keep));
  if (w_flip > 0.0) kraus.push_back(kron(r, z180 * r) * std::sqrt(w_flip));
  return {alpha, beta, QuantumChannel(4, 4, std::move(kraus)), a, m.phi};
}

SquashReport verify_squash_conditions(const SquashChannel& sq, double tol) {
  const CHSHMeasurement m = build_chsh(sq.alpha, sq.beta);
  const MPrime mp = mprime(m);
  const auto x = pauli(PauliAxis::x);
  const auto y = pauli(PauliAxis::y);
  const auto z = pauli(PauliAxis::z);
  const auto id2 = HermitianOperator::identity(2);
  const ComplexMatrix id4 = ComplexMatrix::identity(4);
  const ComplexMatrix xx = tensor_matrix(x, x);
  const ComplexMatrix yy = tensor_matrix(y, y);
  const ComplexMatrix zi = tensor_matrix(z, id2);

  const ComplexMatrix f_zi = adjoint_apply(sq.channel, zi);
  const ComplexMatrix f_xx = adjoint_apply(sq.channel, xx);

  SquashReport rep{};
  rep.cond1_residual = max_abs_diff(f_zi, zi);

  ComplexMatrix cond2 = adjoint_apply(sq.channel, id4 + xx * (kSqrt2 - 1.0)) - m.op.matrix() * 2.0;
  rep.cond2_min_eig = min_eigenvalue(hermitian_part(cond2));

  ComplexMatrix n = (id4 - mp.op.matrix() * 2.0) * (1.0 + kSqrt2) + f_xx;
  rep.n_min_eig = min_eigenvalue(hermitian_part(n));

  rep.mprime_gap_min_eig = min_eigenvalue(mp.op.matrix() - m.op.matrix());
  rep.xx_image_residual = max_abs_diff(f_xx, yy * sq.flip_amplitude);
  rep.tp_residual = sq.channel.completeness_residual();
  rep.choi_min_eig = min_eigenvalue(choi_matrix(sq.channel).matrix);
  rep.pass = rep.cond1_residual <= tol && rep.cond2_min_eig >= -tol;
  return rep;
}

double ChoiMatrix::tp_residual() const {
  return max_abs_diff(trace_out(matrix, in_dim, out_dim), ComplexMatrix::identity(in_dim));
}

ChoiMatrix choi_matrix(const QuantumChannel& ch) {
  const std::size_t in = ch.in_dim();
  const std::size_t out = ch.out_dim();
  ComplexMatrix j(in * out, in * out);
  for (const auto& k : ch.kraus())
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t a = 0; a < out; ++a)
        for (std::size_t l = 0; l < in; ++l)
          for (std::size_t b = 0; b < out; ++b)
            j(i * out + a, l * out + b) += k(a, i) * std::conj(k(b, l));
  return {in, out, hermitian_part(j)};
}

QuantumChannel channel_from_choi(const ChoiMatrix& choi, double tp_tol) {
  const std::size_t in = choi.in_dim;
  const std::size_t out = choi.out_dim;
  if (choi.matrix.rows() != in * out || !choi.matrix.is_square()) {
    throw std::invalid_argument("channel_from_choi: shape mismatch");
  }
  if (choi.tp_residual() > tp_tol) {
    throw std::domain_error("channel_from_choi: partial trace is not the identity");
  }
  const EigenSystem es = hermitian_eig(choi.matrix);
  if (es.eigenvalues.back() < -kResultTol) {
    throw std::domain_error("channel_from_choi: Choi matrix is not positive semidefinite");
  }

  std::vector<ComplexMatrix> kraus;
  for (std::size_t k = 0; k < es.eigenvalues.size(); ++k) {
    const double lam = es.eigenvalues[k];
    if (lam <= 0.0) continue;
    ComplexMatrix kr(out, in);
    const double s = std::sqrt(lam);
    for (std::size_t i = 0; i < in; ++i)
      for (std::size_t a = 0; a < out; ++a) kr(a, i) = s * es.eigenvectors[k][i * out + a];
    kraus.push_back(std::move(kr));
  }
  if (kraus.empty()) throw std::domain_error("channel_from_choi: zero Choi matrix");

  // Within tp_tol the partial trace S differs from I; K -> K S^{-1/2} makes
  // the Kraus set complete exactly.
  ComplexMatrix s(in, in);
  for (const auto& k : kraus) s += k.adjoint() * k;
  const EigenSystem se = hermitian_eig(hermitian_part(s));
  ComplexMatrix s_inv_half(in, in);
  for (std::size_t k = 0; k < se.eigenvalues.size(); ++k) {
    if (se.eigenvalues[k] <= 0.0) throw std::domain_error("channel_from_choi: singular partial trace");
    s_inv_half += ComplexMatrix::outer(se.eigenvectors[k]) * (1.0 / std::sqrt(se.eigenvalues[k]));
  }
  for (auto& k : kraus) k = k * s_inv_half;
  return QuantumChannel(in, out, std::move(kraus));
}

std::string_view to_string(Feasibility f) {
  switch (f) {
    case Feasibility::feasible: return "feasible";
    case Feasibility::infeasible: return "infeasible";
    case Feasibility::inconclusive: return "inconclusive";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// 2 -> 2 feasibility. J is a 4x4 Hermitian matrix written in an orthonormal
// (Frobenius) real basis of 16 elements.

namespace {

constexpr std::size_t kDim = 4;
constexpr std::size_t kVars = 16;
constexpr std::size_t kCons = 12;

using Vec = std::array<double, kVars>;

std::array<ComplexMatrix, kVars> hermitian_basis() {
  std::array<ComplexMatrix, kVars> b;
  std::size_t n = 0;
  const double h = 1.0 / kSqrt2;
  for (std::size_t k = 0; k < kDim; ++k) {
    b[n] = ComplexMatrix(kDim, kDim);
    b[n++](k, k) = 1.0;
  }
  for (std::size_t k = 0; k < kDim; ++k) {
    for (std::size_t l = k + 1; l < kDim; ++l) {
      b[n] = ComplexMatrix(kDim, kDim);
      b[n](k, l) = h;
      b[n++](l, k) = h;
      b[n] = ComplexMatrix(kDim, kDim);
      b[n](k, l) = Cplx{0.0, -h};
      b[n++](l, k) = Cplx{0.0, h};
    }
  }
  return b;
}

// F^dagger(O)_{ji} = sum_{ab} J[(i,a),(j,b)] O[b][a], 2 -> 2.
ComplexMatrix adjoint_from_choi(const ComplexMatrix& j, const ComplexMatrix& o) {
  ComplexMatrix r(2, 2);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) r(l, i) += j(i * 2 + a, l * 2 + b) * o(b, a);
  return r;
}

// Four real coordinates of a 2x2 Hermitian matrix.
std::array<double, 4> herm2_coords(const ComplexMatrix& m) {
  return {m(0, 0).real(), m(1, 1).real(), m(0, 1).real(), m(0, 1).imag()};
}

ComplexMatrix to_matrix(const Vec& x, const std::array<ComplexMatrix, kVars>& basis) {
  ComplexMatrix j(kDim, kDim);
  for (std::size_t k = 0; k < kVars; ++k) j += basis[k] * x[k];
  return j;
}

Vec to_coords(const ComplexMatrix& j, const std::array<ComplexMatrix, kVars>& basis) {
  Vec x{};
  for (std::size_t k = 0; k < kVars; ++k) x[k] = expectation(basis[k], j);
  return x;
}

// Solves the symmetric positive definite system g y = r in place (Cholesky).
void cholesky_solve(std::array<std::array<double, kCons>, kCons> g, std::array<double, kCons>& r) {
  for (std::size_t k = 0; k < kCons; ++k) {
    double d = g[k][k];
    for (std::size_t p = 0; p < k; ++p) d -= g[k][p] * g[k][p];
    if (!(d > 0.0)) throw std::logic_error("feasibility: constraint Gram matrix is singular");
    g[k][k] = std::sqrt(d);
    for (std::size_t i = k + 1; i < kCons; ++i) {
      double s = g[i][k];
      for (std::size_t p = 0; p < k; ++p) s -= g[i][p] * g[k][p];
      g[i][k] = s / g[k][k];
    }
  }
  for (std::size_t i = 0; i < kCons; ++i) {
    double s = r[i];
    for (std::size_t p = 0; p < i; ++p) s -= g[i][p] * r[p];
    r[i] = s / g[i][i];
  }
  for (std::size_t i = kCons; i-- > 0;) {
    double s = r[i];
    for (std::size_t p = i + 1; p < kCons; ++p) s -= g[p][i] * r[p];
    r[i] = s / g[i][i];
  }
}

class AffineSet {
 public:
  AffineSet(const std::array<ComplexMatrix, kVars>& basis, const ComplexMatrix& mx,
            const ComplexMatrix& mz) {
    const std::array<ComplexMatrix, 3> obs = {ComplexMatrix::identity(2), pauli(PauliAxis::x).matrix(),
                                              pauli(PauliAxis::z).matrix()};
    const std::array<ComplexMatrix, 3> target = {ComplexMatrix::identity(2), mx, mz};
    for (std::size_t c = 0; c < 3; ++c) {
      const auto t = herm2_coords(target[c]);
      for (std::size_t r = 0; r < 4; ++r) b_[c * 4 + r] = t[r];
      for (std::size_t k = 0; k < kVars; ++k) {
        const auto col = herm2_coords(adjoint_from_choi(basis[k], obs[c]));
        for (std::size_t r = 0; r < 4; ++r) a_[c * 4 + r][k] = col[r];
      }
    }
    for (std::size_t i = 0; i < kCons; ++i)
      for (std::size_t l = 0; l < kCons; ++l) {
        double s = 0.0;
        for (std::size_t k = 0; k < kVars; ++k) s += a_[i][k] * a_[l][k];
        gram_[i][l] = s;
      }
  }

  // Residual A x - b.
  std::array<double, kCons> residual(const Vec& x) const {
    std::array<double, kCons> r{};
    for (std::size_t i = 0; i < kCons; ++i) {
      double s = -b_[i];
      for (std::size_t k = 0; k < kVars; ++k) s += a_[i][k] * x[k];
      r[i] = s;
    }
    return r;
  }

  Vec project(const Vec& x) const {
    auto r = residual(x);
    cholesky_solve(gram_, r);
    Vec out = x;
    for (std::size_t k = 0; k < kVars; ++k)
      for (std::size_t i = 0; i < kCons; ++i) out[k] -= a_[i][k] * r[i];
    return out;
  }

 private:
  std::array<std::array<double, kVars>, kCons> a_{};
  std::array<double, kCons> b_{};
  std::array<std::array<double, kCons>, kCons> gram_{};
};

ComplexMatrix project_psd(const ComplexMatrix& j) {
  const EigenSystem es = hermitian_eig(j);
  ComplexMatrix out(kDim, kDim);
  for (std::size_t k = 0; k < es.eigenvalues.size(); ++k) {
    if (es.eigenvalues[k] > 0.0) out += ComplexMatrix::outer(es.eigenvectors[k]) * es.eigenvalues[k];
  }
  return hermitian_part(out);
}

double distance(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kVars; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

void require_qubit_effect(const HermitianOperator& m, const char* what) {
  if (m.dim() != 2) throw std::invalid_argument(std::string(what) + ": must be 2x2");
  const EigenSystem es = hermitian_eig(m);
  if (es.eigenvalues.front() > 1.0 + kInputTol || es.eigenvalues.back() < -1.0 - kInputTol) {
    throw std::invalid_argument(std::string(what) + ": spectrum outside [-1, 1]");
  }
}

}  // namespace

FeasibilityReport onepartite_squash_feasibility(const HermitianOperator& mx, const HermitianOperator& mz,
                                                const FeasibilityOptions& options) {
  require_qubit_effect(mx, "onepartite_squash_feasibility: Mx");
  require_qubit_effect(mz, "onepartite_squash_feasibility: Mz");
  if (!(options.feasible_tol > 0.0) || !(options.infeasible_floor > options.feasible_tol) ||
      options.stall_iterations <= 0 || options.max_iterations <= 0) {
    throw std::invalid_argument("onepartite_squash_feasibility: bad options");
  }

  const auto basis = hermitian_basis();
  const AffineSet affine(basis, mx.matrix(), mz.matrix());

  ComplexMatrix j0 = ComplexMatrix::identity(kDim);
  j0 *= 0.5;
  Vec x = to_coords(j0, basis);  // PSD-side iterate
  Vec q{};                       // Dykstra correction for the cone
  double prev = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (std::int64_t it = 1; it <= options.max_iterations; ++it) {
    const Vec y = affine.project(x);
    Vec shifted;
    for (std::size_t k = 0; k < kVars; ++k) shifted[k] = y[k] + q[k];
    const Vec xn = to_coords(project_psd(to_matrix(shifted, basis)), basis);
    for (std::size_t k = 0; k < kVars; ++k) q[k] = shifted[k] - xn[k];
    x = xn;

    const double d = distance(x, affine.project(x));
    double worst = 0.0;
    for (double r : affine.residual(x)) worst = std::max(worst, std::abs(r));
    if (std::max(d, worst) <= options.feasible_tol) {
      return {Feasibility::feasible, d, it, ChoiMatrix{2, 2, to_matrix(x, basis)}};
    }
    if (d > options.infeasible_floor && prev - d < 1e-9 * d) {
      if (++stalled >= options.stall_iterations) return {Feasibility::infeasible, d, it, std::nullopt};
    } else {
      stalled = 0;
    }
    prev = d;
  }
  return {Feasibility::inconclusive, prev, options.max_iterations, std::nullopt};
}

double witness_residual(const ChoiMatrix& witness, const HermitianOperator& mx, const HermitianOperator& mz) {
  if (witness.in_dim != 2 || witness.out_dim != 2) throw std::invalid_argument("witness_residual: expects a 2 -> 2 map");
  const QuantumChannel ch = channel_from_choi(witness, 1e-6);
  return std::max(max_abs_diff(adjoint_apply(ch, pauli(PauliAxis::x).matrix()), mx.matrix()),
                  max_abs_diff(adjoint_apply(ch, pauli(PauliAxis::z).matrix()), mz.matrix()));
}

}  // namespace e91
