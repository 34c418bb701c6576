#include "bounds.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace e91 {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kMaxCount = 0x1.0p62;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool in_open_unit(double x) { return x > 0.0 && x < 1.0; }

std::int64_t checked_ceil(long double x, const char* what) {
  require(std::isfinite(static_cast<double>(x)) && x < kMaxCount, what);
  return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

std::int64_t derived_pulse_count(std::int64_t n, double q, double delta) {
  const long double one_q = 1.0L - q;
  return checked_ceil(static_cast<long double>(n) / (1.0L - delta) / (one_q * one_q),
                      "pulse count N overflows");
}

std::int64_t derived_sample_count(std::int64_t n, double q) {
  const long double r = static_cast<long double>(q) / (1.0L - q);
  return checked_ceil(static_cast<long double>(n) * r * r, "sample count overflows");
}

ProtocolParams make_params(std::int64_t n, double q, double delta, double S0, double eps,
                           double eps_cor, double f_ec, std::int64_t l_syn) {
  require(n >= 1, "n must be >= 1");
  require(q > 0.0 && q <= 0.5, "q must lie in (0, 1/2]");
  require(in_open_unit(delta), "delta must lie in (0, 1)");
  ProtocolParams p{n, q, delta, derived_pulse_count(n, q, delta), derived_sample_count(n, q),
                   S0, eps, eps_cor, f_ec, l_syn};
  validate(p);
  return p;
}

void validate(const ProtocolParams& p) {
  require(p.n >= 1, "n must be >= 1");
  require(p.q > 0.0 && p.q <= 0.5, "q must lie in (0, 1/2]");
  require(in_open_unit(p.delta), "delta must lie in (0, 1)");
  require(std::isfinite(p.S0) && p.S0 >= -1.0 && p.S0 <= 1.0 / kSqrt2 + 1e-12,
          "S0 must lie in [-1, 1/sqrt2]");
  require(in_open_unit(p.eps), "eps must lie in (0, 1)");
  require(in_open_unit(p.eps_cor), "eps_cor must lie in (0, 1)");
  require(std::isfinite(p.f_ec) && p.f_ec >= 1.0, "f_ec must be >= 1");
  require(p.l_syn >= 0, "l_syn must be >= 0");
  require(p.N == derived_pulse_count(p.n, p.q, p.delta), "N does not match n, q, delta");
  require(p.l_smp == derived_sample_count(p.n, p.q), "l_smp does not match n, q");
}

double binary_entropy(double p) {
  require(p >= 0.0 && p <= 1.0, "binary_entropy: p outside [0, 1]");
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double asymptotic_rate(double p, double f_ec) {
  require(std::isfinite(f_ec) && f_ec >= 1.0, "asymptotic_rate: f_ec must be >= 1");
  require(p >= 0.0, "asymptotic_rate: p must be >= 0");
  const double x = (2.0 + kSqrt2) * p;
  require(x <= 1.0, "asymptotic_rate: (2+sqrt2) p exceeds 1");
  return 1.0 - binary_entropy(x) - f_ec * binary_entropy(p);
}

double qber_threshold(double f_ec) {
  // Bracket up to where h((2+sqrt2)p) peaks; past it the rate turns up again.
  double lo = 0.0;
  double hi = 0.5 / (2.0 + kSqrt2);
  if (!(asymptotic_rate(lo, f_ec) > 0.0 && asymptotic_rate(hi, f_ec) < 0.0)) {
    throw std::domain_error("qber_threshold: no sign change");
  }
  while (hi - lo > 1e-14) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (asymptotic_rate(mid, f_ec) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double device_dependent_rate(double p, double f_ec) {
  require(p >= 0.0 && p <= 0.5, "device_dependent_rate: p outside [0, 1/2]");
  require(std::isfinite(f_ec) && f_ec >= 1.0, "device_dependent_rate: f_ec must be >= 1");
  return 1.0 - (1.0 + f_ec) * binary_entropy(p);
}

double delta_s(std::int64_t l_smp, double eps_prime) {
  require(l_smp >= 1, "delta_s: l_smp must be >= 1");
  require(eps_prime > 0.0 && eps_prime <= 1.0, "delta_s: eps' must lie in (0, 1]");
  return std::sqrt(48.0 / static_cast<double>(l_smp) * std::log(2.0 / eps_prime));
}

double mu_statistical(std::int64_t n, std::int64_t l_smp, double eps_prime) {
  require(n >= 1 && l_smp >= 1, "mu: n and l_smp must be >= 1");
  require(eps_prime > 0.0 && eps_prime <= 1.0, "mu: eps' must lie in (0, 1]");
  const double nn = static_cast<double>(n);
  const double ls = static_cast<double>(l_smp);
  return std::sqrt((nn + ls) / (nn * ls) * (ls + 1.0) / ls * std::log(2.0 / eps_prime));
}

double mu_prime(std::int64_t n, std::int64_t l_smp, double eps) {
  require(n >= 1 && l_smp >= 1, "mu': n and l_smp must be >= 1");
  require(in_open_unit(eps), "mu': eps must lie in (0, 1)");
  const double nn = static_cast<double>(n);
  const double ls = static_cast<double>(l_smp);
  const double lead = 4.0 * std::sqrt(3.0) * (1.0 + kSqrt2);
  return (lead + std::sqrt((nn + ls) * (ls + 1.0) / (nn * ls))) * std::sqrt(std::log(6.0 / eps) / ls);
}

double hmin_bound_sampled(const ProtocolParams& params, double eps_prime) {
  validate(params);
  const double ds = delta_s(params.l_smp, eps_prime);
  const double mu = mu_statistical(params.n, params.l_smp, eps_prime);
  const double arg = std::max(0.0, (1.0 + kSqrt2) * (1.0 / kSqrt2 - (params.S0 - ds)) + mu);
  if (arg > 0.5) return 0.0;
  const double n = static_cast<double>(params.n);
  return n * (1.0 - binary_entropy(arg)) - 2.0 * static_cast<double>(params.l_smp) -
         static_cast<double>(params.l_syn) - std::log2(1.0 / params.eps_cor);
}

KeyLengthReport finite_key_length(const ProtocolParams& params) {
  validate(params);
  const double eps3 = params.eps / 3.0;
  KeyLengthReport rep{};
  rep.mu_prime = mu_prime(params.n, params.l_smp, params.eps);
  rep.delta_s = delta_s(params.l_smp, eps3);
  rep.mu = mu_statistical(params.n, params.l_smp, eps3);
  rep.hmin_bound = hmin_bound_sampled(params, eps3);

  auto& c = rep.components;
  c.phase_error_arg = std::max(0.0, (1.0 + kSqrt2) * (1.0 / kSqrt2 - params.S0) + rep.mu_prime);
  c.sample_cost = 2.0 * static_cast<double>(params.l_smp);
  c.syndrome_cost = static_cast<double>(params.l_syn);
  c.verify_cost = std::log2(1.0 / params.eps_cor);
  c.pa_cost = 2.0 * std::log2(3.0 / params.eps);

  if (c.phase_error_arg > 0.5) {
    c.leading = 0.0;
    c.raw = 0.0;
    rep.l = 0;
    rep.reason = "phase-error argument exceeds 1/2";
    return rep;
  }
  c.leading = static_cast<double>(params.n) * (1.0 - binary_entropy(c.phase_error_arg));
  c.raw = c.leading - c.sample_cost - c.syndrome_cost - c.verify_cost - c.pa_cost;
  if (c.raw <= 0.0) {
    rep.l = 0;
    rep.reason = "costs exceed the entropy bound";
    return rep;
  }
  rep.l = static_cast<std::int64_t>(std::floor(c.raw));
  if (rep.l == 0) rep.reason = "costs exceed the entropy bound";
  return rep;
}

double leftover_bound(double hmin, double l, double eps_prime) {
  return 2.0 * eps_prime + std::exp2(-0.5 * (hmin - l));
}

AbortBound chernoff_abort_bound(const ProtocolParams& params) {
  validate(params);
  AbortBound b{};
  const double dq = params.delta * params.q;
  b.simple_expression = 2.0 * std::exp(-dq * dq / 2.0);

  const double nn = static_cast<double>(params.N);
  b.sif_mean = nn * (1.0 - params.q) * (1.0 - params.q);
  b.smp_mean = nn * params.q * params.q;
  // Pr[X <= (1-d) m] <= exp(-d^2 m / 2); vacuous when the threshold reaches the mean.
  const auto lower_tail = [](double threshold, double mean) {
    const double d = std::min(1.0, 1.0 - threshold / mean);
    return d <= 0.0 ? 1.0 : std::exp(-d * d * mean / 2.0);
  };
  b.sif_term = lower_tail(static_cast<double>(params.n), b.sif_mean);
  b.smp_term = lower_tail(static_cast<double>(params.l_smp), b.smp_mean);
  b.corrected = std::min(1.0, b.sif_term + b.smp_term);
  return b;
}

double azuma_tail(std::int64_t l_smp, double ds) {
  require(l_smp >= 1, "azuma_tail: l_smp must be >= 1");
  require(std::isfinite(ds), "azuma_tail: delta_s must be finite");
  return std::exp(-static_cast<double>(l_smp) * ds * ds / 48.0);
}

std::int64_t syndrome_budget(std::int64_t n, double f_ec, double p_est) {
  require(n >= 0, "syndrome_budget: n must be >= 0");
  require(std::isfinite(f_ec) && f_ec >= 1.0, "syndrome_budget: f_ec must be >= 1");
  return checked_ceil(static_cast<long double>(f_ec) * static_cast<long double>(n) *
                          binary_entropy(p_est),
                      "syndrome budget overflows");
}

}  // namespace e91
