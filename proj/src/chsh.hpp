#pragma once

// The joint CHSH observable
//   M(alpha,beta) = 1/4 (Z(x)Z + Z(x)X_beta + X_alpha(x)Z - X_alpha(x)X_beta)
// of a qubit pair measured with Alice's {Z, X_alpha} and Bob's {Z, X_beta},
// its Bell-basis spectral form and the dominating operator M' used by the
// squash construction.

#include <array>
#include <string_view>
#include <utility>

#include "operator_algebra.hpp"

namespace e91 {

enum class Basis { z, x, z_prime };

// Sign convention of the classical CHSH estimator: t = 1 iff both parties
// measured in x.
int bell_test_t(Basis a, Basis b);

// Signed CHSH sample s = r_A r_B (-1)^t for outcomes r in {+1,-1}. This is
// (-1)^(bit_A + bit_B + t) with bit = 0 for r = +1 and 1 for r = -1.
int chsh_sign(int r_a, int r_b, Basis a, Basis b);

enum class BellLabel { psi_plus, psi_minus, phi_plus, phi_minus };
std::string_view to_string(BellLabel label);

struct BellVector {
  BellLabel label;
  std::array<Cplx, 4> amplitudes;
};

struct CHSHMeasurement {
  Cplx alpha;
  Cplx beta;
  HermitianOperator op;
  Cplx mu;
  Cplx nu;
  double abs_mu;
  double abs_nu;
  double phi;  // atan2(|mu|-|nu|, |mu|+|nu|), |phi| <= pi/4
  // Psi+, Psi-, Phi+, Phi- with eigenvalues +|mu|, -|mu|, +|nu|, -|nu|.
  std::array<BellVector, 4> bell_basis;

  // Eigenvalue of op on bell_basis[k].
  double bell_eigenvalue(std::size_t k) const;
};

CHSHMeasurement build_chsh(Cplx alpha, Cplx beta);

// sum_k lambda_k |b_k><b_k| over the Bell basis.
ComplexMatrix spectral_reconstruction(const CHSHMeasurement& m);

// POVM elements E+- = (I +- M)/2.
std::pair<HermitianOperator, HermitianOperator> chsh_povm(const CHSHMeasurement& m);

struct MixtureReport {
  double prob_povm;     // Tr[E+ rho]
  double prob_mixture;  // uniform mixture over the four local basis pairs
  double difference;
};

MixtureReport povm_equals_local_mixture(const CHSHMeasurement& m, const StateDensity& rho);

struct MPrime {
  HermitianOperator op;
  double phi;
};

// M' = M + 2|mu| |Psi-><Psi-| + 2|nu| |Phi-><Phi-|  ( = (cos phi I + sin phi Y(x)Y) / 2 ).
MPrime mprime(const CHSHMeasurement& m);

// Local observables of the reduced qubit picture.
HermitianOperator alice_observable(Cplx alpha, Basis c);
HermitianOperator bob_observable(Cplx beta, Basis c);

}  // namespace e91
