#pragma once

// Scalar security formulas: entropies, asymptotic rates, finite-size key
// length and the statistical deviation / abort bounds that enter it.

#include <cstdint>
#include <string>

namespace e91 {

struct ProtocolParams {
  std::int64_t n;      // sifted-key length
  double q;            // probability of the smp label, (0, 1/2]
  double delta;        // pulse-count slack, (0, 1)
  std::int64_t N;      // pulse pairs, ceil(n/(1-delta)/(1-q)^2)
  std::int64_t l_smp;  // sample pairs, ceil(n (q/(1-q))^2)
  double S0;           // CHSH acceptance threshold, <= 1/sqrt2
  double eps;          // security parameter
  double eps_cor;      // correctness parameter
  double f_ec;         // error-correction efficiency, >= 1
  std::int64_t l_syn;  // syndrome budget in bits
};

// Builds a parameter set with N and l_smp derived; throws std::invalid_argument
// on out-of-range inputs.
ProtocolParams make_params(std::int64_t n, double q, double delta, double S0, double eps,
                           double eps_cor, double f_ec, std::int64_t l_syn);
// Checks every field, including that N and l_smp match their derivation.
void validate(const ProtocolParams& p);

std::int64_t derived_pulse_count(std::int64_t n, double q, double delta);
std::int64_t derived_sample_count(std::int64_t n, double q);

// h(p) with h(0) = h(1) = 0; p outside [0,1] throws.
double binary_entropy(double p);

// 1 - h((2+sqrt2)p) - f_ec h(p); p must satisfy (2+sqrt2)p <= 1.
double asymptotic_rate(double p, double f_ec);
// Zero of asymptotic_rate(., f_ec) by bisection to 1e-14.
double qber_threshold(double f_ec);
// 1 - h(p) - f_ec h(p)
double device_dependent_rate(double p, double f_ec);

double delta_s(std::int64_t l_smp, double eps_prime);
double mu_statistical(std::int64_t n, std::int64_t l_smp, double eps_prime);
double mu_prime(std::int64_t n, std::int64_t l_smp, double eps);

struct KeyLengthComponents {
  double phase_error_arg;  // (1+sqrt2)(1/sqrt2 - S0) + mu'
  double leading;          // n (1 - h(phase_error_arg)), 0 when the argument exceeds 1/2
  double sample_cost;      // 2 l_smp
  double syndrome_cost;    // l_syn
  double verify_cost;      // log2(1/eps_cor)
  double pa_cost;          // 2 log2(3/eps)
  double raw;              // leading minus the four costs, before flooring
};

struct KeyLengthReport {
  std::int64_t l;
  double mu_prime;
  double delta_s;     // at eps' = eps/3
  double mu;          // at eps' = eps/3
  double hmin_bound;  // hmin_bound_sampled(params, eps/3)
  KeyLengthComponents components;
  std::string reason;  // empty when l > 0
};

KeyLengthReport finite_key_length(const ProtocolParams& params);

// n(1 - h((1+sqrt2)(1/sqrt2 - (S0 - dS)) + mu)) - 2 l_smp - l_syn - log2(1/eps_cor),
// reported as 0 when the entropy argument exceeds 1/2.
double hmin_bound_sampled(const ProtocolParams& params, double eps_prime);

// 2 eps' + 2^{-(hmin - l)/2}
double leftover_bound(double hmin, double l, double eps_prime);

struct AbortBound {
  double simple_expression;  // 2 exp(-(delta q)^2 / 2)
  double corrected;         // sif_term + smp_term, capped at 1
  double sif_term;          // lower tail of the both-sif count below n
  double smp_term;          // lower tail of the both-smp count below l_smp
  double sif_mean;          // N (1-q)^2
  double smp_mean;          // N q^2
};

AbortBound chernoff_abort_bound(const ProtocolParams& params);

// exp(-l_smp dS^2 / 48)
double azuma_tail(std::int64_t l_smp, double delta_s);

// ceil(f_ec n h(p_est))
std::int64_t syndrome_budget(std::int64_t n, double f_ec, double p_est);

}  // namespace e91
