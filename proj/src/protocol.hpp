#pragma once

// Monte Carlo simulation of the E91 protocol in the qubit-reduced picture.
// Eve fixes, per pulse, a two-qubit state and the detector parameters; Alice
// and Bob label, measure, test CHSH, sift, correct, verify and amplify.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bounds.hpp"
#include "chsh.hpp"
#include "hashing.hpp"
#include "operator_algebra.hpp"
#include "rng.hpp"

namespace e91 {

// Which local observables realize the bases.
//   calibrated: Alice z = Z, x = X; Bob z = (Z-X)/sqrt2, x = (Z+X)/sqrt2, z' = Z.
//   reduced:    Alice z = Z, x = X_alpha; Bob z = Z, x = X_beta, z' = Z.
enum class Frame { calibrated, reduced };

struct PulseSource {
  StateDensity state;  // two-qubit
  Cplx alpha{0.0, -1.0};
  Cplx beta{0.0, -1.0};
  Frame frame = Frame::reduced;
};

enum class StrategyKind { iid_depolarizing, constant_misalignment, custom };
std::string_view to_string(StrategyKind k);

class EveStrategy {
 public:
  // (1-2p)|Psi+><Psi+| + 2p I/4 in the calibrated frame; p in [0, 1/2].
  static EveStrategy iid_depolarizing(double p);
  // The top eigenvector of M(alpha,beta), depolarized by 2p, reduced frame.
  static EveStrategy constant_misalignment(Cplx alpha, Cplx beta, double p);
  // One source per pulse, reduced frame; the list length must equal N at run time.
  static EveStrategy custom(std::vector<PulseSource> pulses);

  StrategyKind kind() const { return kind_; }
  double p() const { return p_; }
  Cplx alpha() const { return alpha_; }
  Cplx beta() const { return beta_; }
  bool iid() const { return kind_ != StrategyKind::custom; }
  // Number of stored sources (1 for the iid kinds).
  std::size_t size() const { return pulses_.size(); }
  // Source of pulse i.
  const PulseSource& source(std::size_t i) const;

 private:
  EveStrategy(StrategyKind kind, double p, Cplx alpha, Cplx beta, std::vector<PulseSource> pulses);
  StrategyKind kind_;
  double p_;
  Cplx alpha_;
  Cplx beta_;
  std::vector<PulseSource> pulses_;  // single element when iid
};

// |Psi+> = (|0z 0z> + |1z 1z>)/sqrt2, with |0z>,|1z> the +1/-1 eigenvectors of Z.
std::array<Cplx, 4> psi_plus_z();

HermitianOperator frame_observable(const PulseSource& src, bool alice, Basis c);

enum class Label : std::uint8_t { smp, sif };

struct PulseRecord {
  Label label_a;
  Label label_b;
  Basis basis_a;
  Basis basis_b;
  std::int8_t r_a;
  std::int8_t r_b;
  friend bool operator==(const PulseRecord&, const PulseRecord&) = default;
};

// Outcome distribution P(r_a, r_b) in the order (+,+), (+,-), (-,+), (-,-).
std::array<double, 4> outcome_probabilities(const PulseSource& src, Basis a, Basis b);

// Stream of pulse i under the run seed.
PulseRng pulse_rng(std::uint64_t seed, std::uint64_t i);

// One pulse: labels (smp with probability q, independently for Alice and Bob),
// bases, then a Born-rule outcome pair. Depends only on its arguments.
PulseRecord sample_pulse(const PulseSource& src, double q, PulseRng& rng);

enum class AbortReason { insufficient_pulses, chsh_failed, verify_failed };
std::string_view to_string(AbortReason r);

struct HashDescriptor {
  std::uint64_t seed;
  std::size_t in_len;
  std::size_t out_len;
};

struct RunOptions {
  std::optional<double> p_est;  // QBER estimate used to size the syndrome
  std::size_t corrupt_bits = 0;  // bits of u' flipped after correction
};

struct Transcript {
  ProtocolParams params;
  std::uint64_t seed;
  StrategyKind strategy;
  double strategy_p;
  Cplx strategy_alpha;
  Cplx strategy_beta;

  std::vector<PulseRecord> pulses;
  std::int64_t both_smp = 0;
  std::int64_t both_sif = 0;
  std::vector<std::int64_t> i_smp;  // ascending
  std::vector<std::int64_t> i_sif;  // ascending

  std::optional<double> s_est;
  std::optional<AbortReason> abort;

  BitString u;           // Alice's sifted key
  BitString u_bob_raw;   // Bob's z' outcomes on I_sif
  BitString u_corrected; // Bob's key after correction (and any injected faults)
  std::optional<double> qber;
  std::optional<double> p_est;
  std::int64_t syndrome_bits = 0;
  bool syndrome_within_budget = true;

  std::optional<HashDescriptor> f_cor;
  BitString tag_a;
  BitString tag_b;

  std::int64_t key_length = 0;
  std::optional<HashDescriptor> f_pa;
  BitString k_a;
  BitString k_b;
};

Transcript run_protocol(const ProtocolParams& params, const EveStrategy& eve, std::uint64_t seed,
                        const RunOptions& options = {});

// Mean of r_a r_b (-1)^t over the listed pulses. Throws if the list is empty,
// an index is out of range, or a pulse lacks sample-basis outcomes.
double estimate_chsh(std::span<const PulseRecord> pulses, std::span<const std::int64_t> indices);
double estimate_chsh(const Transcript& t);

// Hamming distance / length.
double qber(const BitString& u, const BitString& u_ref);

struct NoiseReport {
  std::int64_t trials;
  std::int64_t l_smp;
  double delta_s;
  std::int64_t exceed;      // trials with |S_G2' - S_G3| >= delta_s
  double frequency;
  double azuma_bound;
  double mean_s_g2;
  double mean_s_g3;
  double mean_abs_diff;
  double max_abs_diff;
};

// Bell-basis measurement of rho: Game 3 records the eigenvalue v_k of the
// outcome, Game 2' outputs +1 with probability (1 + v_k)/2.
NoiseReport povm_noise_experiment(const CHSHMeasurement& m, const StateDensity& rho,
                                  std::int64_t l_smp, double delta_s, std::int64_t trials, Rng& rng);
// Same experiment on an explicit outcome distribution and eigenvalue list.
NoiseReport povm_noise_experiment(std::span<const double> probs, std::span<const double> values,
                                  std::int64_t l_smp, double delta_s, std::int64_t trials, Rng& rng);

struct AbortExperimentReport {
  std::int64_t trials;
  std::int64_t aborts;
  double frequency;
  AbortBound bound;
};

// Label-only simulation of the selection step: aborts when fewer than n both-sif
// or fewer than l_smp both-smp pulses occur.
AbortExperimentReport abort_experiment(const ProtocolParams& params, std::int64_t trials,
                                       std::uint64_t seed);

}  // namespace e91
