#include "e91squash/e91squash.h"

#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <utility>

#include "bounds.hpp"
#include "chsh.hpp"
#include "hashing.hpp"
#include "protocol.hpp"
#include "serialize.hpp"
#include "squash.hpp"

struct e91_buffer {
  std::string data;
};

struct e91_chsh {
  e91::CHSHMeasurement m;
};

struct e91_squash {
  e91::SquashChannel sq;
};

struct e91_strategy {
  e91::EveStrategy eve;
};

struct e91_transcript {
  e91::Transcript t;
};

struct e91_hash {
  e91::ToeplitzHash h;
};

namespace {

thread_local std::string g_last_error;

struct NullPointer : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct BufferTooSmall : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class F>
e91_status guard(F&& f) {
  try {
    g_last_error.clear();
    std::forward<F>(f)();
    return E91_OK;
  } catch (const NullPointer& e) {
    g_last_error = e.what();
    return E91_ERR_NULL_POINTER;
  } catch (const BufferTooSmall& e) {
    g_last_error = e.what();
    return E91_ERR_BUFFER_TOO_SMALL;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return E91_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    g_last_error = e.what();
    return E91_ERR_DOMAIN;
  } catch (const std::out_of_range& e) {
    g_last_error = e.what();
    return E91_ERR_OUT_OF_RANGE;
  } catch (const std::bad_alloc&) {
    g_last_error = "allocation failed";
    return E91_ERR_ALLOCATION;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return E91_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return E91_ERR_INTERNAL;
  }
}

template <class T>
T& deref(T* p, const char* what) {
  if (p == nullptr) throw NullPointer(std::string(what) + " is NULL");
  return *p;
}

void need(const void* p, const char* what) {
  if (p == nullptr) throw NullPointer(std::string(what) + " is NULL");
}

e91::Cplx to_cplx(e91_complex z) { return e91::make_cplx(z.re, z.im); }
e91_complex from_cplx(e91::Cplx z) { return {z.real(), z.imag()}; }

e91::ComplexMatrix read_matrix(const e91_complex* data, std::size_t dim, const char* what) {
  need(data, what);
  e91::ComplexMatrix m(dim, dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) m(r, c) = to_cplx(data[r * dim + c]);
  return m;
}

void write_matrix(const e91::ComplexMatrix& m, e91_complex* out) {
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = from_cplx(m(r, c));
}

e91::ProtocolParams to_params(const e91_params* p) {
  const e91_params& c = deref(p, "params");
  e91::ProtocolParams out{c.n, c.q, c.delta, c.N, c.l_smp, c.S0, c.eps, c.eps_cor, c.f_ec, c.l_syn};
  e91::validate(out);
  return out;
}

e91_params from_params(const e91::ProtocolParams& p) {
  return {p.n, p.q, p.delta, p.N, p.l_smp, p.S0, p.eps, p.eps_cor, p.f_ec, p.l_syn};
}

e91_abort_bound from_bound(const e91::AbortBound& b) {
  return {b.simple_expression, b.corrected, b.sif_term, b.smp_term, b.sif_mean, b.smp_mean};
}

e91_noise_report from_noise(const e91::NoiseReport& r) {
  return {r.trials,    r.l_smp,     r.delta_s,       r.exceed,       r.frequency,
          r.azuma_bound, r.mean_s_g2, r.mean_s_g3, r.mean_abs_diff, r.max_abs_diff};
}

e91::FeasibilityOptions to_options(const e91_feasibility_options* o) {
  e91::FeasibilityOptions out;
  if (o != nullptr) {
    out.feasible_tol = o->feasible_tol;
    out.infeasible_floor = o->infeasible_floor;
    out.stall_iterations = o->stall_iterations;
    out.max_iterations = o->max_iterations;
  }
  return out;
}

void fill_feasibility(const e91::FeasibilityReport& r, const e91::HermitianOperator& mx,
                      const e91::HermitianOperator& mz, e91_feasibility_report* out, e91_complex* witness) {
  e91_feasibility_report rep{};
  switch (r.status) {
    case e91::Feasibility::feasible: rep.status = E91_FEASIBLE; break;
    case e91::Feasibility::infeasible: rep.status = E91_INFEASIBLE; break;
    case e91::Feasibility::inconclusive: rep.status = E91_INCONCLUSIVE; break;
  }
  rep.residual = r.residual;
  rep.iterations = r.iterations;
  rep.has_witness = r.witness.has_value() ? 1 : 0;
  if (r.witness) {
    rep.witness_residual = e91::witness_residual(*r.witness, mx, mz);
    if (witness != nullptr) write_matrix(r.witness->matrix, witness);
  }
  *out = rep;
}

template <class T>
void set_out(T* out, T value, const char* what = "out") {
  deref(out, what) = std::move(value);
}

}  // namespace

extern "C" {

const char* e91_version(void) { return "1.0.0"; }

const char* e91_status_string(e91_status status) {
  switch (status) {
    case E91_OK: return "ok";
    case E91_ERR_INVALID_ARGUMENT: return "invalid argument";
    case E91_ERR_DOMAIN: return "domain error";
    case E91_ERR_OUT_OF_RANGE: return "out of range";
    case E91_ERR_NULL_POINTER: return "null pointer";
    case E91_ERR_BUFFER_TOO_SMALL: return "buffer too small";
    case E91_ERR_ALLOCATION: return "allocation failure";
    case E91_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* e91_last_error(void) { return g_last_error.c_str(); }

uint64_t e91_derive_seed(uint64_t master, uint64_t index) { return e91::derive_seed(master, index); }

const char* e91_buffer_data(const e91_buffer* buf) { return buf == nullptr ? "" : buf->data.c_str(); }
size_t e91_buffer_size(const e91_buffer* buf) { return buf == nullptr ? 0 : buf->data.size(); }
void e91_buffer_free(e91_buffer* buf) { delete buf; }

// --- scalars -------------------------------------------------------------

e91_status e91_binary_entropy(double p, double* out) {
  return guard([&] { set_out(out, e91::binary_entropy(p)); });
}
e91_status e91_asymptotic_rate(double p, double f_ec, double* out) {
  return guard([&] { set_out(out, e91::asymptotic_rate(p, f_ec)); });
}
e91_status e91_qber_threshold(double f_ec, double* out) {
  return guard([&] { set_out(out, e91::qber_threshold(f_ec)); });
}
e91_status e91_device_dependent_rate(double p, double f_ec, double* out) {
  return guard([&] { set_out(out, e91::device_dependent_rate(p, f_ec)); });
}
e91_status e91_delta_s(int64_t l_smp, double eps_prime, double* out) {
  return guard([&] { set_out(out, e91::delta_s(l_smp, eps_prime)); });
}
e91_status e91_mu_statistical(int64_t n, int64_t l_smp, double eps_prime, double* out) {
  return guard([&] { set_out(out, e91::mu_statistical(n, l_smp, eps_prime)); });
}
e91_status e91_mu_prime(int64_t n, int64_t l_smp, double eps, double* out) {
  return guard([&] { set_out(out, e91::mu_prime(n, l_smp, eps)); });
}
e91_status e91_leftover_bound(double hmin, double l, double eps_prime, double* out) {
  return guard([&] { set_out(out, e91::leftover_bound(hmin, l, eps_prime)); });
}
e91_status e91_azuma_tail(int64_t l_smp, double ds, double* out) {
  return guard([&] { set_out(out, e91::azuma_tail(l_smp, ds)); });
}
e91_status e91_syndrome_budget(int64_t n, double f_ec, double p_est, int64_t* out) {
  return guard([&] { set_out(out, e91::syndrome_budget(n, f_ec, p_est)); });
}

e91_status e91_params_make(int64_t n, double q, double delta, double S0, double eps, double eps_cor, double f_ec,
                           int64_t l_syn, e91_params* out) {
  return guard([&] { set_out(out, from_params(e91::make_params(n, q, delta, S0, eps, eps_cor, f_ec, l_syn))); });
}

e91_status e91_params_validate(const e91_params* params) {
  return guard([&] { (void)to_params(params); });
}

e91_status e91_finite_key_length(const e91_params* params, e91_key_length* out) {
  return guard([&] {
    need(out, "out");
    const auto r = e91::finite_key_length(to_params(params));
    const auto& c = r.components;
    *out = {r.l,         r.mu_prime,    r.delta_s,       r.mu,          r.hmin_bound, c.phase_error_arg,
            c.leading,   c.sample_cost, c.syndrome_cost, c.verify_cost, c.pa_cost,    c.raw};
  });
}

e91_status e91_finite_key_length_json(const e91_params* params, e91_buffer** out) {
  return guard([&] {
    need(out, "out");
    const auto r = e91::finite_key_length(to_params(params));
    *out = new e91_buffer{e91::to_json(r).dump()};
  });
}

e91_status e91_hmin_bound(const e91_params* params, double eps_prime, double* out) {
  return guard([&] { set_out(out, e91::hmin_bound_sampled(to_params(params), eps_prime)); });
}

e91_status e91_chernoff_abort_bound(const e91_params* params, e91_abort_bound* out) {
  return guard([&] { set_out(out, from_bound(e91::chernoff_abort_bound(to_params(params)))); });
}

// --- CHSH ----------------------------------------------------------------

e91_status e91_chsh_create(e91_complex alpha, e91_complex beta, e91_chsh** out) {
  return guard([&] {
    need(out, "out");
    *out = new e91_chsh{e91::build_chsh(to_cplx(alpha), to_cplx(beta))};
  });
}

void e91_chsh_free(e91_chsh* h) { delete h; }

e91_status e91_chsh_info_get(const e91_chsh* h, e91_chsh_info* out) {
  return guard([&] {
    const auto& m = deref(h, "chsh").m;
    set_out(out, e91_chsh_info{from_cplx(m.mu), from_cplx(m.nu), m.abs_mu, m.abs_nu, m.phi});
  });
}

e91_status e91_chsh_operator(const e91_chsh* h, e91_complex out[16]) {
  return guard([&] {
    const auto& m = deref(h, "chsh").m;
    need(out, "out");
    write_matrix(m.op.matrix(), out);
  });
}

e91_status e91_chsh_bell_vector(const e91_chsh* h, size_t k, e91_complex out[4], double* eigenvalue) {
  return guard([&] {
    const auto& m = deref(h, "chsh").m;
    need(out, "out");
    need(eigenvalue, "eigenvalue");
    if (k >= 4) throw std::out_of_range("Bell vector index must be < 4");
    for (std::size_t i = 0; i < 4; ++i) out[i] = from_cplx(m.bell_basis[k].amplitudes[i]);
    *eigenvalue = m.bell_eigenvalue(k);
  });
}

e91_status e91_chsh_spectral_residual(const e91_chsh* h, double* out) {
  return guard([&] {
    const auto& m = deref(h, "chsh").m;
    set_out(out, e91::max_abs_diff(e91::spectral_reconstruction(m), m.op.matrix()));
  });
}

e91_status e91_chsh_eigenvalues(const e91_chsh* h, double out[4]) {
  return guard([&] {
    const auto& m = deref(h, "chsh").m;
    need(out, "out");
    const auto es = e91::hermitian_eig(m.op);
    for (std::size_t i = 0; i < 4; ++i) out[i] = es.eigenvalues[i];
  });
}

// --- squash --------------------------------------------------------------

e91_status e91_flip_amplitude(double phi, double* out) {
  return guard([&] { set_out(out, e91::flip_amplitude(phi)); });
}

e91_status e91_squash_create(e91_complex alpha, e91_complex beta, e91_squash** out) {
  return guard([&] {
    need(out, "out");
    *out = new e91_squash{e91::build_squash(to_cplx(alpha), to_cplx(beta))};
  });
}

void e91_squash_free(e91_squash* h) { delete h; }

e91_status e91_squash_parameters(const e91_squash* h, double* flip_amplitude, double* phi) {
  return guard([&] {
    const auto& sq = deref(h, "squash").sq;
    need(flip_amplitude, "flip_amplitude");
    need(phi, "phi");
    *flip_amplitude = sq.flip_amplitude;
    *phi = sq.phi;
  });
}

e91_status e91_squash_kraus_count(const e91_squash* h, size_t* out) {
  return guard([&] { set_out(out, deref(h, "squash").sq.channel.kraus().size()); });
}

e91_status e91_squash_kraus(const e91_squash* h, size_t k, e91_complex out[16]) {
  return guard([&] {
    const auto& kraus = deref(h, "squash").sq.channel.kraus();
    need(out, "out");
    if (k >= kraus.size()) throw std::out_of_range("Kraus index out of range");
    write_matrix(kraus[k], out);
  });
}

e91_status e91_squash_verify(const e91_squash* h, double tol, e91_squash_report* out) {
  return guard([&] {
    const auto r = e91::verify_squash_conditions(deref(h, "squash").sq, tol);
    set_out(out, e91_squash_report{r.cond1_residual, r.cond2_min_eig, r.n_min_eig, r.mprime_gap_min_eig,
                                     r.xx_image_residual, r.tp_residual, r.choi_min_eig, r.pass ? 1 : 0});
  });
}

// --- feasibility ---------------------------------------------------------

void e91_feasibility_options_default(e91_feasibility_options* out) {
  if (out == nullptr) return;
  const e91::FeasibilityOptions d;
  *out = {d.feasible_tol, d.infeasible_floor, d.stall_iterations, d.max_iterations};
}

e91_status e91_squash_feasibility(const e91_complex mx[4], const e91_complex mz[4],
                                  const e91_feasibility_options* options, e91_feasibility_report* out,
                                  e91_complex* witness) {
  return guard([&] {
    need(out, "out");
    const e91::HermitianOperator hx(read_matrix(mx, 2, "mx"));
    const e91::HermitianOperator hz(read_matrix(mz, 2, "mz"));
    const auto r = e91::onepartite_squash_feasibility(hx, hz, to_options(options));
    fill_feasibility(r, hx, hz, out, witness);
  });
}

e91_status e91_nogo_check(e91_complex alpha, const e91_feasibility_options* options, e91_feasibility_report* out) {
  return guard([&] {
    need(out, "out");
    const auto hx = e91::generalized_x(to_cplx(alpha));
    const auto hz = e91::pauli(e91::PauliAxis::z);
    const auto r = e91::onepartite_squash_feasibility(hx, hz, to_options(options));
    fill_feasibility(r, hx, hz, out, nullptr);
  });
}

// --- strategies and runs -------------------------------------------------

e91_status e91_strategy_iid_depolarizing(double p, e91_strategy** out) {
  return guard([&] {
    need(out, "out");
    *out = new e91_strategy{e91::EveStrategy::iid_depolarizing(p)};
  });
}

e91_status e91_strategy_constant_misalignment(e91_complex alpha, e91_complex beta, double p, e91_strategy** out) {
  return guard([&] {
    need(out, "out");
    *out = new e91_strategy{e91::EveStrategy::constant_misalignment(to_cplx(alpha), to_cplx(beta), p)};
  });
}

e91_status e91_strategy_custom(size_t count, const e91_complex* states, const e91_complex* alphas,
                               const e91_complex* betas, e91_strategy** out) {
  return guard([&] {
    need(out, "out");
    need(states, "states");
    need(alphas, "alphas");
    need(betas, "betas");
    std::vector<e91::PulseSource> pulses;
    pulses.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      pulses.push_back({e91::StateDensity(read_matrix(states + 16 * i, 4, "states")), to_cplx(alphas[i]),
                        to_cplx(betas[i]), e91::Frame::reduced});
    }
    *out = new e91_strategy{e91::EveStrategy::custom(std::move(pulses))};
  });
}

void e91_strategy_free(e91_strategy* h) { delete h; }

e91_status e91_strategy_pulse_state(const e91_strategy* h, size_t i, e91_complex out[16]) {
  return guard([&] {
    const auto& eve = deref(h, "strategy").eve;
    need(out, "out");
    write_matrix(eve.source(i).state.matrix(), out);
  });
}

e91_status e91_run_protocol(const e91_params* params, const e91_strategy* strategy, uint64_t seed,
                            const e91_run_options* options, e91_transcript** out) {
  return guard([&] {
    need(out, "out");
    const auto p = to_params(params);
    const auto& eve = deref(strategy, "strategy").eve;
    e91::RunOptions opts;
    if (options != nullptr) {
      if (options->has_p_est) opts.p_est = options->p_est;
      opts.corrupt_bits = options->corrupt_bits;
    }
    *out = new e91_transcript{e91::run_protocol(p, eve, seed, opts)};
  });
}

void e91_transcript_free(e91_transcript* h) { delete h; }

e91_status e91_transcript_summary_get(const e91_transcript* h, e91_transcript_summary* out) {
  return guard([&] {
    const auto& t = deref(h, "transcript").t;
    e91_transcript_summary s{};
    s.abort_reason = E91_ABORT_NONE;
    if (t.abort) {
      switch (*t.abort) {
        case e91::AbortReason::insufficient_pulses: s.abort_reason = E91_ABORT_INSUFFICIENT_PULSES; break;
        case e91::AbortReason::chsh_failed: s.abort_reason = E91_ABORT_CHSH_FAILED; break;
        case e91::AbortReason::verify_failed: s.abort_reason = E91_ABORT_VERIFY_FAILED; break;
      }
    }
    s.has_s_est = t.s_est.has_value() ? 1 : 0;
    s.s_est = t.s_est.value_or(0.0);
    s.has_qber = t.qber.has_value() ? 1 : 0;
    s.qber = t.qber.value_or(0.0);
    s.p_est = t.p_est.value_or(0.0);
    s.syndrome_bits = t.syndrome_bits;
    s.syndrome_within_budget = t.syndrome_within_budget ? 1 : 0;
    s.key_length = t.key_length;
    s.both_smp = t.both_smp;
    s.both_sif = t.both_sif;
    s.keys_equal = t.k_a == t.k_b ? 1 : 0;
    set_out(out, s);
  });
}

e91_status e91_transcript_json(const e91_transcript* h, int include_pulses, e91_buffer** out) {
  return guard([&] {
    const auto& t = deref(h, "transcript").t;
    need(out, "out");
    *out = new e91_buffer{e91::to_json(t, include_pulses != 0).dump()};
  });
}

// --- experiments ---------------------------------------------------------

e91_status e91_noise_experiment(e91_complex alpha, e91_complex beta, const e91_complex rho[16], int64_t l_smp,
                                double ds, int64_t trials, uint64_t seed, e91_noise_report* out) {
  return guard([&] {
    need(out, "out");
    const auto m = e91::build_chsh(to_cplx(alpha), to_cplx(beta));
    const e91::StateDensity state(read_matrix(rho, 4, "rho"));
    e91::Rng rng(seed);
    *out = from_noise(e91::povm_noise_experiment(m, state, l_smp, ds, trials, rng));
  });
}

e91_status e91_noise_experiment_spectrum(const double* probs, const double* values, size_t count, int64_t l_smp,
                                         double ds, int64_t trials, uint64_t seed, e91_noise_report* out) {
  return guard([&] {
    need(out, "out");
    need(probs, "probs");
    need(values, "values");
    e91::Rng rng(seed);
    *out = from_noise(e91::povm_noise_experiment(std::span<const double>(probs, count),
                                                 std::span<const double>(values, count), l_smp, ds, trials, rng));
  });
}

e91_status e91_abort_experiment(const e91_params* params, int64_t trials, uint64_t seed, e91_abort_report* out) {
  return guard([&] {
    need(out, "out");
    const auto r = e91::abort_experiment(to_params(params), trials, seed);
    *out = {r.trials, r.aborts, r.frequency, from_bound(r.bound)};
  });
}

// --- hashing -------------------------------------------------------------

e91_status e91_hash_from_seed(size_t in_len, size_t out_len, uint64_t seed, e91_hash** out) {
  return guard([&] {
    need(out, "out");
    *out = new e91_hash{e91::toeplitz_from_seed(in_len, out_len, seed)};
  });
}

void e91_hash_free(e91_hash* h) { delete h; }

e91_status e91_hash_lengths(const e91_hash* h, size_t* in_len, size_t* out_len) {
  return guard([&] {
    const auto& hh = deref(h, "hash").h;
    need(in_len, "in_len");
    need(out_len, "out_len");
    *in_len = hh.in_len();
    *out_len = hh.out_len();
  });
}

e91_status e91_hash_apply(const e91_hash* h, const uint8_t* in, size_t in_bytes, uint8_t* out, size_t out_bytes) {
  return guard([&] {
    const auto& hh = deref(h, "hash").h;
    need(in, "in");
    need(out, "out");
    const std::size_t need_in = (hh.in_len() + 7) / 8;
    const std::size_t need_out = (hh.out_len() + 7) / 8;
    if (in_bytes != need_in) throw std::invalid_argument("input must hold exactly ceil(in_len/8) bytes");
    if (out_bytes < need_out) throw BufferTooSmall("output buffer shorter than ceil(out_len/8) bytes");
    e91::BitString x(hh.in_len());
    for (std::size_t k = 0; k < hh.in_len(); ++k) x.set(k, (in[k / 8] >> (k % 8)) & 1U);
    const e91::BitString y = hh(x);
    std::memset(out, 0, out_bytes);
    for (std::size_t k = 0; k < hh.out_len(); ++k) {
      if (y.get(k)) out[k / 8] = static_cast<uint8_t>(out[k / 8] | (1U << (k % 8)));
    }
  });
}

}  // extern "C"
