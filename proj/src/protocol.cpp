#include "protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace e91 {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr std::uint64_t kProtocolDomain = 0x5e1ec7104e91ULL;

enum Stream : std::uint64_t { selection = 0, post_processing = 1, faults = 2 };

Rng protocol_rng(std::uint64_t seed, Stream s) {
  return Rng(derive_seed(splitmix64(seed ^ kProtocolDomain), s));
}

StateDensity depolarized(std::span<const Cplx> psi, double p) {
  if (!(p >= 0.0 && p <= 0.5)) throw std::invalid_argument("depolarizing parameter p must lie in [0, 1/2]");
  return StateDensity::mix(StateDensity::pure(psi), StateDensity::maximally_mixed(4), 2.0 * p);
}

std::size_t basis_slot(Basis c) {
  switch (c) {
    case Basis::z: return 0;
    case Basis::x: return 1;
    case Basis::z_prime: return 2;
  }
  return 0;
}

// Outcome probabilities for every basis pair a pulse can use.
struct OutcomeTable {
  std::array<std::array<std::array<double, 4>, 3>, 3> p{};

  explicit OutcomeTable(const PulseSource& src) {
    for (Basis a : {Basis::z, Basis::x}) {
      for (Basis b : {Basis::z, Basis::x, Basis::z_prime}) p[basis_slot(a)][basis_slot(b)] = outcome_probabilities(src, a, b);
    }
  }
  const std::array<double, 4>& operator()(Basis a, Basis b) const { return p[basis_slot(a)][basis_slot(b)]; }
};

template <class Probs>
PulseRecord draw_pulse(double q, PulseRng& rng, Probs&& probs) {
  PulseRecord r{};
  r.label_a = rng.uniform() < q ? Label::smp : Label::sif;
  r.label_b = rng.uniform() < q ? Label::smp : Label::sif;
  r.basis_a = r.label_a == Label::sif ? Basis::z : (rng.coin() ? Basis::x : Basis::z);
  r.basis_b = r.label_b == Label::sif ? Basis::z_prime : (rng.coin() ? Basis::x : Basis::z);
  const std::array<double, 4>& dist = probs(r.basis_a, r.basis_b);
  const std::size_t k = sample_index(dist, rng.uniform());
  r.r_a = (k < 2) ? 1 : -1;
  r.r_b = (k % 2 == 0) ? 1 : -1;
  return r;
}

// k distinct elements of `pool` chosen uniformly, returned ascending.
std::vector<std::int64_t> choose_subset(std::vector<std::int64_t> pool, std::size_t k, Rng& rng) {
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[r]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool is_sample_basis(Basis c) { return c == Basis::z || c == Basis::x; }

}  // namespace

std::string_view to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::iid_depolarizing: return "iid_depolarizing";
    case StrategyKind::constant_misalignment: return "constant_misalignment";
    case StrategyKind::custom: return "custom";
  }
  return "?";
}

std::string_view to_string(AbortReason r) {
  switch (r) {
    case AbortReason::insufficient_pulses: return "insufficient_pulses";
    case AbortReason::chsh_failed: return "chsh_failed";
    case AbortReason::verify_failed: return "verify_failed";
  }
  return "?";
}

std::array<Cplx, 4> psi_plus_z() {
  // |0z> = (1,1)/sqrt2, |1z> = (1,-1)/sqrt2, so the sum of products is
  // (|00> + |11>)/sqrt2 in the stored basis.
  const double h = 1.0 / kSqrt2;
  return {h, 0.0, 0.0, h};
}

EveStrategy::EveStrategy(StrategyKind kind, double p, Cplx alpha, Cplx beta, std::vector<PulseSource> pulses)
    : kind_(kind), p_(p), alpha_(alpha), beta_(beta), pulses_(std::move(pulses)) {}

EveStrategy EveStrategy::iid_depolarizing(double p) {
  const auto psi = psi_plus_z();
  PulseSource src{depolarized(psi, p), Cplx{0.0, -1.0}, Cplx{0.0, -1.0}, Frame::calibrated};
  return EveStrategy(StrategyKind::iid_depolarizing, p, src.alpha, src.beta, {std::move(src)});
}

EveStrategy EveStrategy::constant_misalignment(Cplx alpha, Cplx beta, double p) {
  const CHSHMeasurement m = build_chsh(alpha, beta);
  const std::size_t top = m.abs_mu >= m.abs_nu ? 0 : 2;
  PulseSource src{depolarized(m.bell_basis[top].amplitudes, p), alpha, beta, Frame::reduced};
  return EveStrategy(StrategyKind::constant_misalignment, p, alpha, beta, {std::move(src)});
}

EveStrategy EveStrategy::custom(std::vector<PulseSource> pulses) {
  if (pulses.empty()) throw std::invalid_argument("EveStrategy::custom: no pulses");
  for (const auto& s : pulses) {
    if (s.state.dim() != 4) throw std::invalid_argument("EveStrategy::custom: states must be two-qubit");
    require_unit_modulus(s.alpha, "EveStrategy::custom: alpha");
    require_unit_modulus(s.beta, "EveStrategy::custom: beta");
  }
  return EveStrategy(StrategyKind::custom, 0.0, Cplx{0.0, -1.0}, Cplx{0.0, -1.0}, std::move(pulses));
}

const PulseSource& EveStrategy::source(std::size_t i) const {
  if (kind_ != StrategyKind::custom) return pulses_.front();
  if (i >= pulses_.size()) throw std::out_of_range("EveStrategy::source: pulse index");
  return pulses_[i];
}

HermitianOperator frame_observable(const PulseSource& src, bool alice, Basis c) {
  if (src.frame == Frame::reduced || alice) {
    return alice ? alice_observable(src.alpha, c) : bob_observable(src.beta, c);
  }
  const ComplexMatrix z = pauli(PauliAxis::z).matrix();
  const ComplexMatrix x = pauli(PauliAxis::x).matrix();
  switch (c) {
    case Basis::z: return HermitianOperator::from_computed((z - x) * (1.0 / kSqrt2));
    case Basis::x: return HermitianOperator::from_computed((z + x) * (1.0 / kSqrt2));
    case Basis::z_prime: return HermitianOperator(z);
  }
  throw std::invalid_argument("frame_observable: basis");
}

std::array<double, 4> outcome_probabilities(const PulseSource& src, Basis a, Basis b) {
  const auto oa = frame_observable(src, true, a).matrix();
  const auto ob = frame_observable(src, false, b).matrix();
  const ComplexMatrix id = ComplexMatrix::identity(2);
  std::array<double, 4> out{};
  double total = 0.0;
  std::size_t k = 0;
  for (int ra : {1, -1}) {
    for (int rb : {1, -1}) {
      const ComplexMatrix pa = (id + oa * static_cast<double>(ra)) * 0.5;
      const ComplexMatrix pb = (id + ob * static_cast<double>(rb)) * 0.5;
      double p = expectation(kron(pa, pb), src.state.matrix());
      if (p < -kResultTol) throw std::domain_error("outcome_probabilities: negative probability");
      p = std::clamp(p, 0.0, 1.0);
      out[k++] = p;
      total += p;
    }
  }
  if (std::abs(total - 1.0) > kResultTol) throw std::domain_error("outcome_probabilities: total != 1");
  for (double& p : out) p /= total;
  return out;
}

PulseRng pulse_rng(std::uint64_t seed, std::uint64_t i) { return PulseRng(derive_seed(seed, i)); }

PulseRecord sample_pulse(const PulseSource& src, double q, PulseRng& rng) {
  std::array<double, 4> dist{};
  return draw_pulse(q, rng, [&](Basis a, Basis b) -> const std::array<double, 4>& {
    dist = outcome_probabilities(src, a, b);
    return dist;
  });
}

Transcript run_protocol(const ProtocolParams& params, const EveStrategy& eve, std::uint64_t seed,
                        const RunOptions& options) {
  validate(params);
  if (!eve.iid() && eve.size() != static_cast<std::size_t>(params.N)) {
    throw std::invalid_argument("run_protocol: custom strategy must supply exactly N pulses");
  }
  if (options.p_est && !(*options.p_est >= 0.0 && *options.p_est <= 0.5)) {
    throw std::invalid_argument("run_protocol: p_est must lie in [0, 1/2]");
  }
  if (options.corrupt_bits > static_cast<std::size_t>(params.n)) {
    throw std::invalid_argument("run_protocol: corrupt_bits exceeds n");
  }

  Transcript t{};
  t.params = params;
  t.seed = seed;
  t.strategy = eve.kind();
  t.strategy_p = eve.p();
  t.strategy_alpha = eve.alpha();
  t.strategy_beta = eve.beta();

  // Steps 1-3: labels, bases, outcomes.
  const auto n_pulses = static_cast<std::size_t>(params.N);
  t.pulses.reserve(n_pulses);
  std::vector<std::int64_t> smp_pool;
  std::vector<std::int64_t> sif_pool;
  std::optional<OutcomeTable> table;
  if (eve.iid()) table.emplace(eve.source(0));
  for (std::size_t i = 0; i < n_pulses; ++i) {
    PulseRng rng = pulse_rng(seed, i);
    const PulseRecord rec = table ? draw_pulse(params.q, rng, *table) : sample_pulse(eve.source(i), params.q, rng);
    if (rec.label_a == rec.label_b) {
      (rec.label_a == Label::smp ? smp_pool : sif_pool).push_back(static_cast<std::int64_t>(i));
    }
    t.pulses.push_back(rec);
  }
  t.both_smp = static_cast<std::int64_t>(smp_pool.size());
  t.both_sif = static_cast<std::int64_t>(sif_pool.size());

  // Sample and sift selection.
  if (t.both_smp < params.l_smp || t.both_sif < params.n) {
    t.abort = AbortReason::insufficient_pulses;
    return t;
  }
  Rng sel = protocol_rng(seed, selection);
  t.i_smp = choose_subset(std::move(smp_pool), static_cast<std::size_t>(params.l_smp), sel);
  t.i_sif = choose_subset(std::move(sif_pool), static_cast<std::size_t>(params.n), sel);

  // CHSH test.
  t.s_est = estimate_chsh(t.pulses, t.i_smp);
  if (*t.s_est < params.S0) {
    t.abort = AbortReason::chsh_failed;
    return t;
  }

  // Sifted keys.
  const auto n = static_cast<std::size_t>(params.n);
  t.u = BitString(n);
  t.u_bob_raw = BitString(n);
  for (std::size_t k = 0; k < n; ++k) {
    const PulseRecord& rec = t.pulses[static_cast<std::size_t>(t.i_sif[k])];
    t.u.set(k, rec.r_a == -1);
    t.u_bob_raw.set(k, rec.r_b == -1);
  }
  t.qber = qber(t.u, t.u_bob_raw);

  // Oracle error correction, then verification.
  t.p_est = options.p_est ? *options.p_est : std::clamp((1.0 - kSqrt2 * *t.s_est) / 2.0, 0.0, 0.5);
  t.syndrome_bits = syndrome_budget(params.n, params.f_ec, *t.p_est);
  t.syndrome_within_budget = t.syndrome_bits <= params.l_syn;
  t.u_corrected = t.u;
  if (options.corrupt_bits > 0) {
    Rng fault = protocol_rng(seed, faults);
    std::vector<std::int64_t> all(n);
    for (std::size_t k = 0; k < n; ++k) all[k] = static_cast<std::int64_t>(k);
    for (auto k : choose_subset(std::move(all), options.corrupt_bits, fault)) t.u_corrected.flip(static_cast<std::size_t>(k));
  }

  Rng post = protocol_rng(seed, post_processing);
  const auto tag_len = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(std::log2(1.0 / params.eps_cor))));
  const ToeplitzHash f_cor = sample_hash(n, std::max<std::size_t>(tag_len, 1), post);
  t.f_cor = HashDescriptor{f_cor.seed(), f_cor.in_len(), f_cor.out_len()};
  t.tag_a = f_cor(t.u);
  t.tag_b = f_cor(t.u_corrected);
  if (t.tag_a != t.tag_b) {
    t.abort = AbortReason::verify_failed;
    return t;
  }

  // Privacy amplification.
  t.key_length = finite_key_length(params).l;
  if (t.key_length > 0) {
    const ToeplitzHash f_pa = sample_hash(n, static_cast<std::size_t>(t.key_length), post);
    t.f_pa = HashDescriptor{f_pa.seed(), f_pa.in_len(), f_pa.out_len()};
    t.k_a = f_pa(t.u);
    t.k_b = f_pa(t.u_corrected);
  }
  return t;
}

double estimate_chsh(std::span<const PulseRecord> pulses, std::span<const std::int64_t> indices) {
  if (indices.empty()) throw std::invalid_argument("estimate_chsh: no sample pulses");
  std::int64_t sum = 0;
  for (auto i : indices) {
    if (i < 0 || static_cast<std::size_t>(i) >= pulses.size()) throw std::invalid_argument("estimate_chsh: index out of range");
    const PulseRecord& r = pulses[static_cast<std::size_t>(i)];
    if (!is_sample_basis(r.basis_a) || !is_sample_basis(r.basis_b)) {
      throw std::invalid_argument("estimate_chsh: pulse has no sample-basis outcome");
    }
    sum += chsh_sign(r.r_a, r.r_b, r.basis_a, r.basis_b);
  }
  return static_cast<double>(sum) / static_cast<double>(indices.size());
}

double estimate_chsh(const Transcript& t) { return estimate_chsh(t.pulses, t.i_smp); }

double qber(const BitString& u, const BitString& u_ref) {
  if (u.size() != u_ref.size()) throw std::invalid_argument("qber: length mismatch");
  if (u.size() == 0) throw std::invalid_argument("qber: empty strings");
  return static_cast<double>(hamming_distance(u, u_ref)) / static_cast<double>(u.size());
}

NoiseReport povm_noise_experiment(std::span<const double> probs, std::span<const double> values, std::int64_t l_smp,
                                  double delta_s, std::int64_t trials, Rng& rng) {
  if (probs.size() != values.size() || probs.empty()) throw std::invalid_argument("povm_noise_experiment: spectrum shape");
  if (l_smp < 1 || trials < 1) throw std::invalid_argument("povm_noise_experiment: l_smp and trials must be >= 1");
  double total = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (!(probs[k] >= 0.0) || !(std::abs(values[k]) <= 1.0)) {
      throw std::invalid_argument("povm_noise_experiment: probabilities must be >= 0 and |values| <= 1");
    }
    total += probs[k];
  }
  if (std::abs(total - 1.0) > kResultTol) throw std::invalid_argument("povm_noise_experiment: probabilities must sum to 1");

  NoiseReport rep{};
  rep.trials = trials;
  rep.l_smp = l_smp;
  rep.delta_s = delta_s;
  rep.azuma_bound = azuma_tail(l_smp, delta_s);
  const double inv = 1.0 / static_cast<double>(l_smp);
  for (std::int64_t tr = 0; tr < trials; ++tr) {
    std::int64_t s2 = 0;
    double s3 = 0.0;
    for (std::int64_t i = 0; i < l_smp; ++i) {
      const double v = values[sample_index(probs, rng.uniform())];
      s3 += v;
      s2 += rng.uniform() < 0.5 * (1.0 + v) ? 1 : -1;
    }
    const double g2 = static_cast<double>(s2) * inv;
    const double g3 = s3 * inv;
    const double d = std::abs(g2 - g3);
    if (d >= delta_s) ++rep.exceed;
    rep.mean_s_g2 += g2;
    rep.mean_s_g3 += g3;
    rep.mean_abs_diff += d;
    rep.max_abs_diff = std::max(rep.max_abs_diff, d);
  }
  const double tn = static_cast<double>(trials);
  rep.frequency = static_cast<double>(rep.exceed) / tn;
  rep.mean_s_g2 /= tn;
  rep.mean_s_g3 /= tn;
  rep.mean_abs_diff /= tn;
  return rep;
}

NoiseReport povm_noise_experiment(const CHSHMeasurement& m, const StateDensity& rho, std::int64_t l_smp,
                                  double delta_s, std::int64_t trials, Rng& rng) {
  if (rho.dim() != 4) throw std::invalid_argument("povm_noise_experiment: state must be two-qubit");
  std::array<double, 4> probs{};
  std::array<double, 4> values{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto proj = ComplexMatrix::outer(m.bell_basis[k].amplitudes);
    double p = expectation(proj, rho.matrix());
    if (p < -kResultTol) throw std::domain_error("povm_noise_experiment: negative probability");
    probs[k] = std::max(p, 0.0);
    total += probs[k];
    values[k] = m.bell_eigenvalue(k);
  }
  for (double& p : probs) p /= total;
  return povm_noise_experiment(probs, values, l_smp, delta_s, trials, rng);
}

AbortExperimentReport abort_experiment(const ProtocolParams& params, std::int64_t trials, std::uint64_t seed) {
  validate(params);
  if (trials < 1) throw std::invalid_argument("abort_experiment: trials must be >= 1");
  AbortExperimentReport rep{trials, 0, 0.0, chernoff_abort_bound(params)};
  for (std::int64_t tr = 0; tr < trials; ++tr) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(tr)));
    std::int64_t smp = 0;
    std::int64_t sif = 0;
    for (std::int64_t i = 0; i < params.N; ++i) {
      const bool a = rng.uniform() < params.q;
      const bool b = rng.uniform() < params.q;
      if (a && b) ++smp;
      if (!a && !b) ++sif;
    }
    if (smp < params.l_smp || sif < params.n) ++rep.aborts;
  }
  rep.frequency = static_cast<double>(rep.aborts) / static_cast<double>(trials);
  return rep;
}

}  // namespace e91
