#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "chsh.hpp"
#include "operator_algebra.hpp"

namespace e91 {

// Phase-flip weight of the bipartite squash map as a function of the M'
// angle: a = Sign(sin phi) * min(1, (1+sqrt2)|sin phi|). Requires
// |phi| <= pi/4 (+ kInputTol).
double flip_amplitude(double phi);

// Bipartite squash map for the CHSH measurement M(alpha,beta): a 90 degree Z
// rotation on both qubits, followed by a 180 degree Z rotation on Bob's qubit
// with probability (1-a)/2. Satisfies
//   F^dagger(Z(x)I) = Z(x)I,   F^dagger(X(x)X) = a Y(x)Y,
//   F^dagger(I + (sqrt2-1) X(x)X) >= 2 M(alpha,beta).
struct SquashChannel {
  Cplx alpha;
  Cplx beta;
  QuantumChannel channel;
  double flip_amplitude;
  double phi;
};

SquashChannel build_squash(Cplx alpha, Cplx beta);

struct SquashReport {
  double cond1_residual;        // max |F^dagger(Z(x)I) - Z(x)I|
  double cond2_min_eig;         // lambda_min(F^dagger(I + (sqrt2-1)X(x)X) - 2M)
  double n_min_eig;             // lambda_min((1+sqrt2)(I - 2M') + F^dagger(X(x)X))
  double mprime_gap_min_eig;    // lambda_min(M' - M)
  double xx_image_residual;     // max |F^dagger(X(x)X) - a Y(x)Y|
  double tp_residual;
  double choi_min_eig;
  bool pass;                    // cond1_residual <= tol && cond2_min_eig >= -tol
};

SquashReport verify_squash_conditions(const SquashChannel& sq, double tol);

// Choi matrix J = sum_ij |i><j| (x) F(|i><j|), input index major.
struct ChoiMatrix {
  std::size_t in_dim;
  std::size_t out_dim;
  ComplexMatrix matrix;

  // max |Tr_out J - I|; zero iff the channel is trace preserving.
  double tp_residual() const;
};

ChoiMatrix choi_matrix(const QuantumChannel& ch);
// Kraus decomposition from the eigenvectors of J with positive eigenvalues.
// Throws std::domain_error if J is not PSD within kResultTol.
QuantumChannel channel_from_choi(const ChoiMatrix& choi, double tp_tol = kResultTol);

enum class Feasibility { feasible, infeasible, inconclusive };
std::string_view to_string(Feasibility f);

struct FeasibilityOptions {
  double feasible_tol = 1e-7;
  double infeasible_floor = 1e-4;
  int stall_iterations = 500;
  std::int64_t max_iterations = 100000;
};

struct FeasibilityReport {
  Feasibility status;
  double residual;  // distance between the PSD iterate and the affine set
  std::int64_t iterations;
  std::optional<ChoiMatrix> witness;
};

// Does a qubit channel F exist with F^dagger(X) = mx and F^dagger(Z) = mz?
// Searched as a PSD Choi matrix in the affine set {Tr_out J = I, adjoint
// constraints} with Dykstra alternating projections.
FeasibilityReport onepartite_squash_feasibility(const HermitianOperator& mx,
                                                const HermitianOperator& mz,
                                                const FeasibilityOptions& options = {});

// Converts a 2 -> 2 witness to Kraus form and returns
// max(|F^dagger(X) - mx|, |F^dagger(Z) - mz|) in max-entry norm.
double witness_residual(const ChoiMatrix& witness, const HermitianOperator& mx, const HermitianOperator& mz);

}  // namespace e91
