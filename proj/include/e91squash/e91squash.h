/*
 * e91squash: device-independent E91 key distribution analysis.
 *
 * C interface. Objects are opaque handles created by *_create / constructor
 * functions and released with the matching *_free (which accept NULL). Every
 * fallible function returns an e91_status; on failure a description is
 * available from e91_last_error() until the next call on the same thread.
 *
 * Matrices are passed as row-major arrays of e91_complex (4 entries for a
 * qubit, 16 for a qubit pair) in the basis where
 *   X = [[0,-i],[i,0]],  Y = diag(1,-1),  Z = [[0,1],[1,0]].
 */
#ifndef E91SQUASH_E91SQUASH_H
#define E91SQUASH_E91SQUASH_H

#include <stddef.h>
#include <stdint.h>

#if defined(E91SQUASH_BUILDING_LIBRARY)
#define E91_API __attribute__((visibility("default")))
#else
#define E91_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum e91_status {
  E91_OK = 0,
  E91_ERR_INVALID_ARGUMENT = 1, /* precondition violated by the caller */
  E91_ERR_DOMAIN = 2,           /* numerical result outside its valid range */
  E91_ERR_OUT_OF_RANGE = 3,     /* index out of range */
  E91_ERR_NULL_POINTER = 4,
  E91_ERR_BUFFER_TOO_SMALL = 5,
  E91_ERR_ALLOCATION = 6,
  E91_ERR_INTERNAL = 7
} e91_status;

E91_API const char* e91_version(void);
E91_API const char* e91_status_string(e91_status status);
/* Message of the last failure on this thread; "" if none. */
E91_API const char* e91_last_error(void);

/* Seed of independent stream `index` under `master` (run seeds in batches). */
E91_API uint64_t e91_derive_seed(uint64_t master, uint64_t index);

typedef struct e91_complex {
  double re;
  double im;
} e91_complex;

/* ------------------------------------------------------------------------
 * Byte buffers (JSON documents, hex strings). Data is NUL-terminated. */
typedef struct e91_buffer e91_buffer;
E91_API const char* e91_buffer_data(const e91_buffer* buf);
E91_API size_t e91_buffer_size(const e91_buffer* buf);
E91_API void e91_buffer_free(e91_buffer* buf);

/* ------------------------------------------------------------------------
 * Rates and finite-size bounds */
E91_API e91_status e91_binary_entropy(double p, double* out);
E91_API e91_status e91_asymptotic_rate(double p, double f_ec, double* out);
E91_API e91_status e91_qber_threshold(double f_ec, double* out);
E91_API e91_status e91_device_dependent_rate(double p, double f_ec, double* out);
E91_API e91_status e91_delta_s(int64_t l_smp, double eps_prime, double* out);
E91_API e91_status e91_mu_statistical(int64_t n, int64_t l_smp, double eps_prime, double* out);
E91_API e91_status e91_mu_prime(int64_t n, int64_t l_smp, double eps, double* out);
E91_API e91_status e91_leftover_bound(double hmin, double l, double eps_prime, double* out);
E91_API e91_status e91_azuma_tail(int64_t l_smp, double delta_s, double* out);
E91_API e91_status e91_syndrome_budget(int64_t n, double f_ec, double p_est, int64_t* out);

typedef struct e91_params {
  int64_t n;     /* sifted-key length */
  double q;      /* smp label probability, (0, 1/2] */
  double delta;  /* (0, 1) */
  int64_t N;     /* derived: ceil(n/(1-delta)/(1-q)^2) */
  int64_t l_smp; /* derived: ceil(n (q/(1-q))^2) */
  double S0;
  double eps;
  double eps_cor;
  double f_ec;
  int64_t l_syn;
} e91_params;

/* Fills *out, deriving N and l_smp. */
E91_API e91_status e91_params_make(int64_t n, double q, double delta, double S0, double eps, double eps_cor,
                                   double f_ec, int64_t l_syn, e91_params* out);
E91_API e91_status e91_params_validate(const e91_params* params);

typedef struct e91_key_length {
  int64_t l;
  double mu_prime;
  double delta_s;
  double mu;
  double hmin_bound;
  double phase_error_arg;
  double leading;
  double sample_cost;
  double syndrome_cost;
  double verify_cost;
  double pa_cost;
  double raw;
} e91_key_length;

E91_API e91_status e91_finite_key_length(const e91_params* params, e91_key_length* out);
/* JSON form including the reason string; caller frees *out. */
E91_API e91_status e91_finite_key_length_json(const e91_params* params, e91_buffer** out);
E91_API e91_status e91_hmin_bound(const e91_params* params, double eps_prime, double* out);

typedef struct e91_abort_bound {
  double simple_expression;
  double corrected;
  double sif_term;
  double smp_term;
  double sif_mean;
  double smp_mean;
} e91_abort_bound;

E91_API e91_status e91_chernoff_abort_bound(const e91_params* params, e91_abort_bound* out);

/* ------------------------------------------------------------------------
 * CHSH measurement M(alpha, beta) */
typedef struct e91_chsh e91_chsh;

typedef struct e91_chsh_info {
  e91_complex mu;
  e91_complex nu;
  double abs_mu;
  double abs_nu;
  double phi;
} e91_chsh_info;

E91_API e91_status e91_chsh_create(e91_complex alpha, e91_complex beta, e91_chsh** out);
E91_API void e91_chsh_free(e91_chsh* h);
E91_API e91_status e91_chsh_info_get(const e91_chsh* h, e91_chsh_info* out);
/* The 4x4 operator. */
E91_API e91_status e91_chsh_operator(const e91_chsh* h, e91_complex out[16]);
/* Bell vector k (Psi+, Psi-, Phi+, Phi-) and its eigenvalue. */
E91_API e91_status e91_chsh_bell_vector(const e91_chsh* h, size_t k, e91_complex out[4], double* eigenvalue);
/* Max-entry distance between the operator and its Bell-basis reconstruction. */
E91_API e91_status e91_chsh_spectral_residual(const e91_chsh* h, double* out);
/* Numerical eigenvalues, descending. */
E91_API e91_status e91_chsh_eigenvalues(const e91_chsh* h, double out[4]);

/* ------------------------------------------------------------------------
 * Bipartite squash channel */
typedef struct e91_squash e91_squash;

typedef struct e91_squash_report {
  double cond1_residual;
  double cond2_min_eig;
  double n_min_eig;
  double mprime_gap_min_eig;
  double xx_image_residual;
  double tp_residual;
  double choi_min_eig;
  int pass;
} e91_squash_report;

E91_API e91_status e91_flip_amplitude(double phi, double* out);
E91_API e91_status e91_squash_create(e91_complex alpha, e91_complex beta, e91_squash** out);
E91_API void e91_squash_free(e91_squash* h);
E91_API e91_status e91_squash_parameters(const e91_squash* h, double* flip_amplitude, double* phi);
E91_API e91_status e91_squash_kraus_count(const e91_squash* h, size_t* out);
E91_API e91_status e91_squash_kraus(const e91_squash* h, size_t k, e91_complex out[16]);
E91_API e91_status e91_squash_verify(const e91_squash* h, double tol, e91_squash_report* out);

/* ------------------------------------------------------------------------
 * Single-qubit squash feasibility */
typedef enum e91_feasibility {
  E91_FEASIBLE = 0,
  E91_INFEASIBLE = 1,
  E91_INCONCLUSIVE = 2
} e91_feasibility;

typedef struct e91_feasibility_options {
  double feasible_tol;     /* default 1e-7 */
  double infeasible_floor; /* default 1e-4 */
  int stall_iterations;    /* default 500 */
  int64_t max_iterations;  /* default 100000 */
} e91_feasibility_options;

typedef struct e91_feasibility_report {
  e91_feasibility status;
  double residual;
  int64_t iterations;
  int has_witness;
  double witness_residual; /* |F^dagger(X) - Mx|, |F^dagger(Z) - Mz| max; 0 without witness */
} e91_feasibility_report;

E91_API void e91_feasibility_options_default(e91_feasibility_options* out);
/* options may be NULL; witness (16 entries) may be NULL and is written only
 * when the status is E91_FEASIBLE. */
E91_API e91_status e91_squash_feasibility(const e91_complex mx[4], const e91_complex mz[4],
                                          const e91_feasibility_options* options, e91_feasibility_report* out,
                                          e91_complex* witness);
/* Mx = X_alpha, Mz = Z. */
E91_API e91_status e91_nogo_check(e91_complex alpha, const e91_feasibility_options* options,
                                  e91_feasibility_report* out);

/* ------------------------------------------------------------------------
 * Protocol simulation */
typedef struct e91_strategy e91_strategy;

E91_API e91_status e91_strategy_iid_depolarizing(double p, e91_strategy** out);
E91_API e91_status e91_strategy_constant_misalignment(e91_complex alpha, e91_complex beta, double p,
                                                      e91_strategy** out);
/* count pulses: states holds count*16 entries, alphas and betas count each. */
E91_API e91_status e91_strategy_custom(size_t count, const e91_complex* states, const e91_complex* alphas,
                                       const e91_complex* betas, e91_strategy** out);
E91_API void e91_strategy_free(e91_strategy* h);
/* State of pulse i (any i for the iid kinds). */
E91_API e91_status e91_strategy_pulse_state(const e91_strategy* h, size_t i, e91_complex out[16]);

typedef struct e91_run_options {
  int has_p_est;
  double p_est;
  size_t corrupt_bits;
} e91_run_options;

typedef enum e91_abort_reason {
  E91_ABORT_NONE = 0,
  E91_ABORT_INSUFFICIENT_PULSES = 1,
  E91_ABORT_CHSH_FAILED = 2,
  E91_ABORT_VERIFY_FAILED = 3
} e91_abort_reason;

typedef struct e91_transcript_summary {
  e91_abort_reason abort_reason;
  int has_s_est;
  double s_est;
  int has_qber;
  double qber;
  double p_est;
  int64_t syndrome_bits;
  int syndrome_within_budget;
  int64_t key_length;
  int64_t both_smp;
  int64_t both_sif;
  int keys_equal; /* k_A == k_B (vacuously 1 without keys) */
} e91_transcript_summary;

typedef struct e91_transcript e91_transcript;

/* options may be NULL. */
E91_API e91_status e91_run_protocol(const e91_params* params, const e91_strategy* strategy, uint64_t seed,
                                    const e91_run_options* options, e91_transcript** out);
E91_API void e91_transcript_free(e91_transcript* h);
E91_API e91_status e91_transcript_summary_get(const e91_transcript* h, e91_transcript_summary* out);
E91_API e91_status e91_transcript_json(const e91_transcript* h, int include_pulses, e91_buffer** out);

/* ------------------------------------------------------------------------
 * Monte Carlo checks of the concentration and abort bounds */
typedef struct e91_noise_report {
  int64_t trials;
  int64_t l_smp;
  double delta_s;
  int64_t exceed;
  double frequency;
  double azuma_bound;
  double mean_s_g2;
  double mean_s_g3;
  double mean_abs_diff;
  double max_abs_diff;
} e91_noise_report;

E91_API e91_status e91_noise_experiment(e91_complex alpha, e91_complex beta, const e91_complex rho[16],
                                        int64_t l_smp, double delta_s, int64_t trials, uint64_t seed,
                                        e91_noise_report* out);
E91_API e91_status e91_noise_experiment_spectrum(const double* probs, const double* values, size_t count,
                                                 int64_t l_smp, double delta_s, int64_t trials, uint64_t seed,
                                                 e91_noise_report* out);

typedef struct e91_abort_report {
  int64_t trials;
  int64_t aborts;
  double frequency;
  e91_abort_bound bound;
} e91_abort_report;

E91_API e91_status e91_abort_experiment(const e91_params* params, int64_t trials, uint64_t seed,
                                        e91_abort_report* out);

/* ------------------------------------------------------------------------
 * Toeplitz hashing. Bit strings are byte arrays, little-endian within bytes. */
typedef struct e91_hash e91_hash;

E91_API e91_status e91_hash_from_seed(size_t in_len, size_t out_len, uint64_t seed, e91_hash** out);
E91_API void e91_hash_free(e91_hash* h);
E91_API e91_status e91_hash_lengths(const e91_hash* h, size_t* in_len, size_t* out_len);
/* in holds ceil(in_len/8) bytes, out ceil(out_len/8) bytes. */
E91_API e91_status e91_hash_apply(const e91_hash* h, const uint8_t* in, size_t in_bytes, uint8_t* out,
                                  size_t out_bytes);

#ifdef __cplusplus
}
#endif

#endif /* E91SQUASH_E91SQUASH_H */
