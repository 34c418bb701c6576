#include "chsh.hpp"

#include <cmath>
#include <stdexcept>

namespace e91 {

namespace {

// Unit phase of z, or 1 when z vanishes (the matching eigenvalue is then 0 and
// any completion of the basis is spectrally valid).
Cplx unit_phase(Cplx z) {
  const double r = std::abs(z);
  return r == 0.0 ? Cplx{1.0, 0.0} : z / r;
}

HermitianOperator projector_on(const HermitianOperator& obs, int outcome) {
  ComplexMatrix p = ComplexMatrix::identity(obs.dim()) + obs.matrix() * static_cast<double>(outcome);
  p *= 0.5;
  return HermitianOperator::from_computed(p);
}

}  // namespace

int bell_test_t(Basis a, Basis b) { return (a == Basis::x && b == Basis::x) ? 1 : 0; }

int chsh_sign(int r_a, int r_b, Basis a, Basis b) {
  if ((r_a != 1 && r_a != -1) || (r_b != 1 && r_b != -1)) {
    throw std::invalid_argument("chsh_sign: outcomes must be +1 or -1");
  }
  return r_a * r_b * (bell_test_t(a, b) == 1 ? -1 : 1);
}

std::string_view to_string(BellLabel label) {
  switch (label) {
    case BellLabel::psi_plus: return "psi+";
    case BellLabel::psi_minus: return "psi-";
    case BellLabel::phi_plus: return "phi+";
    case BellLabel::phi_minus: return "phi-";
  }
  return "?";
}

double CHSHMeasurement::bell_eigenvalue(std::size_t k) const {
  switch (k) {
    case 0: return abs_mu;
    case 1: return -abs_mu;
    case 2: return abs_nu;
    case 3: return -abs_nu;
    default: throw std::out_of_range("bell_eigenvalue: index");
  }
}

HermitianOperator alice_observable(Cplx alpha, Basis c) {
  switch (c) {
    case Basis::z:
    case Basis::z_prime: return pauli(PauliAxis::z);
    case Basis::x: return generalized_x(alpha);
  }
  throw std::invalid_argument("alice_observable: basis");
}

HermitianOperator bob_observable(Cplx beta, Basis c) { return alice_observable(beta, c); }

CHSHMeasurement build_chsh(Cplx alpha, Cplx beta) {
  require_unit_modulus(alpha, "build_chsh: alpha");
  require_unit_modulus(beta, "build_chsh: beta");

  const auto z = pauli(PauliAxis::z);
  const auto xa = generalized_x(alpha);
  const auto xb = generalized_x(beta);
  ComplexMatrix m = tensor(z, z).matrix() + tensor(z, xb).matrix() + tensor(xa, z).matrix() -
                    tensor(xa, xb).matrix();
  m *= 0.25;

  const Cplx mu = 0.25 * (1.0 + alpha + beta - alpha * beta);
  const Cplx nu = 0.25 * (1.0 + alpha + std::conj(beta) - alpha * std::conj(beta));
  const double abs_mu = std::abs(mu);
  const double abs_nu = std::abs(nu);

  // M has entries mu at (00,11) and nu at (01,10) (y-basis ordering), so the
  // Bell vectors carry the conjugate phases.
  const Cplx pm = std::conj(unit_phase(mu));
  const Cplx pn = std::conj(unit_phase(nu));
  const double h = 1.0 / std::sqrt(2.0);

  CHSHMeasurement out{
      alpha,
      beta,
      HermitianOperator::from_computed(m),
      mu,
      nu,
      abs_mu,
      abs_nu,
      std::atan2(abs_mu - abs_nu, abs_mu + abs_nu),
      {{
          {BellLabel::psi_plus, {h, 0.0, 0.0, h * pm}},
          {BellLabel::psi_minus, {h, 0.0, 0.0, -h * pm}},
          {BellLabel::phi_plus, {0.0, h, h * pn, 0.0}},
          {BellLabel::phi_minus, {0.0, h, -h * pn, 0.0}},
      }},
  };
  return out;
}

ComplexMatrix spectral_reconstruction(const CHSHMeasurement& m) {
  ComplexMatrix out(4, 4);
  for (std::size_t k = 0; k < 4; ++k) {
    out += ComplexMatrix::outer(m.bell_basis[k].amplitudes) * m.bell_eigenvalue(k);
  }
  return out;
}

std::pair<HermitianOperator, HermitianOperator> chsh_povm(const CHSHMeasurement& m) {
  const ComplexMatrix id = ComplexMatrix::identity(4);
  ComplexMatrix plus = id + m.op.matrix();
  plus *= 0.5;
  auto e_plus = HermitianOperator::from_computed(plus);
  // E- is formed as I - E+ so that the pair sums to the identity.
  auto e_minus = HermitianOperator::from_computed(id - e_plus.matrix());
  return {std::move(e_plus), std::move(e_minus)};
}

MixtureReport povm_equals_local_mixture(const CHSHMeasurement& m, const StateDensity& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("povm_equals_local_mixture: state must be 4x4");
  const auto [e_plus, e_minus] = chsh_povm(m);
  const double p_povm = expectation(e_plus.matrix(), rho.matrix());

  double p_mix = 0.0;
  for (Basis ca : {Basis::z, Basis::x}) {
    for (Basis cb : {Basis::z, Basis::x}) {
      const auto a = alice_observable(m.alpha, ca);
      const auto b = bob_observable(m.beta, cb);
      for (int ra : {1, -1}) {
        for (int rb : {1, -1}) {
          if (chsh_sign(ra, rb, ca, cb) != 1) continue;
          const auto proj = tensor(projector_on(a, ra), projector_on(b, rb));
          p_mix += 0.25 * expectation(proj.matrix(), rho.matrix());
        }
      }
    }
  }
  return {p_povm, p_mix, std::abs(p_povm - p_mix)};
}

MPrime mprime(const CHSHMeasurement& m) {
  ComplexMatrix op = m.op.matrix();
  op += ComplexMatrix::outer(m.bell_basis[1].amplitudes) * (2.0 * m.abs_mu);
  op += ComplexMatrix::outer(m.bell_basis[3].amplitudes) * (2.0 * m.abs_nu);
  return {HermitianOperator::from_computed(op), m.phi};
}

}  // namespace e91
