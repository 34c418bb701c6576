// End-to-end acceptance suite. Uses only the public C interface and prints one
// PASS/FAIL line per criterion with its runtime and the measured quantities.
#include <e91squash/e91squash.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

// Any library failure aborts the criterion with the library's message.
struct LibraryError {
  std::string what;
};

void ok(e91_status s) {
  if (s != E91_OK) throw LibraryError{std::string(e91_status_string(s)) + ": " + e91_last_error()};
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

e91_complex unit(double phase) {
  // Exact at quarter turns so that +-i land on the special points.
  const double t = phase / (kPi / 2);
  if (t == std::round(t)) {
    switch (((static_cast<long>(std::round(t)) % 4) + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return {std::cos(phase), std::sin(phase)};
}

e91_complex grid_point(int k, int g) { return unit(2.0 * kPi * k / g); }

double rate(double p, double f_ec = 1.0) {
  double r = 0.0;
  ok(e91_asymptotic_rate(p, f_ec, &r));
  return r;
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
};

using Chsh = Handle<e91_chsh, e91_chsh_free>;
using Squash = Handle<e91_squash, e91_squash_free>;
using Strategy = Handle<e91_strategy, e91_strategy_free>;
using Transcript = Handle<e91_transcript, e91_transcript_free>;
using Hash = Handle<e91_hash, e91_hash_free>;

// ---------------------------------------------------------------------------

Outcome qber_threshold_criterion() {
  // Scan the rate curve as the CLI does, then refine the sign change by bisection.
  const int steps = 1501;
  const double hi = 0.15;
  double lo_p = -1.0, hi_p = -1.0;
  for (int k = 0; k + 1 < steps; ++k) {
    const double a = hi * k / (steps - 1), b = hi * (k + 1) / (steps - 1);
    if (rate(a) > 0.0 && rate(b) <= 0.0) {
      lo_p = a;
      hi_p = b;
      break;
    }
  }
  if (lo_p < 0.0) return {false, "no sign change on the grid"};
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo_p + hi_p);
    (rate(mid) > 0.0 ? lo_p : hi_p) = mid;
  }
  double lib = 0.0;
  ok(e91_qber_threshold(1.0, &lib));
  const double zero = 0.5 * (lo_p + hi_p);
  const bool pass = std::abs(zero - 0.054) <= 0.001 && std::abs(zero - lib) < 1e-12;
  return {pass, fmt("zero=%.10f library=%.10f target=0.054+-0.001", zero, lib)};
}

Outcome rate_endpoints_criterion() {
  double thr = 0.0;
  ok(e91_qber_threshold(1.0, &thr));
  const double r0 = rate(0.0);
  double prev = r0;
  int violations = 0;
  for (int k = 1; k <= 1000; ++k) {
    const double r = rate(thr * k / 1000.0);
    violations += !(r < prev);
    prev = r;
  }
  return {r0 == 1.0 && violations == 0, fmt("R(0)=%.17g non-decreasing steps=%d R(threshold)=%.3g", r0, violations, prev)};
}

Outcome normalization_criterion() {
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      Chsh h;
      ok(e91_chsh_create(grid_point(i, 64), grid_point(j, 64), &h.p));
      e91_chsh_info info{};
      ok(e91_chsh_info_get(h.p, &info));
      worst = std::max(worst, std::abs(info.abs_mu * info.abs_mu + info.abs_nu * info.abs_nu - 0.5));
    }
  }
  return {worst <= 1e-12, fmt("max | |mu|^2+|nu|^2-1/2 | = %.3g", worst)};
}

Outcome spectral_criterion() {
  double residual = 0.0, max_eig = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      Chsh h;
      ok(e91_chsh_create(grid_point(i, 64), grid_point(j, 64), &h.p));
      double r = 0.0;
      ok(e91_chsh_spectral_residual(h.p, &r));
      residual = std::max(residual, r);
      double eig[4];
      ok(e91_chsh_eigenvalues(h.p, eig));
      for (double e : eig) max_eig = std::max(max_eig, std::abs(e));
    }
  }
  const bool pass = residual <= 1e-10 && max_eig <= 1.0 / kSqrt2 + 1e-12;
  return {pass, fmt("reconstruction residual=%.3g max|eig|-1/sqrt2=%.3g", residual, max_eig - 1.0 / kSqrt2)};
}

Outcome squash_criterion() {
  double c1 = 0.0, c2 = INFINITY, nmin = INFINITY, gap = INFINITY;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      Squash h;
      ok(e91_squash_create(grid_point(i, 64), grid_point(j, 64), &h.p));
      e91_squash_report r{};
      ok(e91_squash_verify(h.p, 1e-9, &r));
      c1 = std::max(c1, r.cond1_residual);
      c2 = std::min(c2, r.cond2_min_eig);
      nmin = std::min(nmin, r.n_min_eig);
      gap = std::min(gap, r.mprime_gap_min_eig);
    }
  }
  const bool pass = c1 <= 1e-12 && c2 >= -1e-9 && nmin >= -1e-9 && gap >= -1e-10;
  return {pass, fmt("cond1=%.3g cond2_min=%.3g N_min=%.3g (M'-M)_min=%.3g", c1, c2, nmin, gap)};
}

Outcome nogo_criterion() {
  // Sixteen points strictly off the imaginary axis, plus the two special points.
  std::vector<std::pair<double, bool>> points;  // phase, expected feasible
  for (int k = 0; k < 16; ++k) points.emplace_back(kPi * (2 * k + 1) / 16.0, false);
  points.emplace_back(kPi / 2, true);
  points.emplace_back(-kPi / 2, true);
  int right = 0, inconclusive = 0;
  for (auto [phase, expect] : points) {
    e91_feasibility_report r{};
    ok(e91_nogo_check(unit(phase), nullptr, &r));
    inconclusive += r.status == E91_INCONCLUSIVE;
    right += (r.status == E91_FEASIBLE) == expect && r.status != E91_INCONCLUSIVE;
  }
  const int total = static_cast<int>(points.size());
  return {right == total && inconclusive == 0, fmt("%d/%d classified as expected, %d inconclusive", right, total, inconclusive)};
}

Outcome simulation_criterion() {
  const int runs = 100;
  e91_params params{};
  ok(e91_params_make(76950, 0.1, 0.05, 0.0, 1e-9, 1e-9, 1.0, 0, &params));
  bool pass = params.N == 100001;
  std::string detail = fmt("N=%lld", static_cast<long long>(params.N));
  for (double p : {0.0, 0.02, 0.05, 0.1}) {
    Strategy s;
    ok(e91_strategy_iid_depolarizing(p, &s.p));
    double s_sum = 0.0, s_sq = 0.0, q_sum = 0.0, q_sq = 0.0;
    // Runs short of pulses abort before estimating; draw replacements for them.
    int done = 0, short_runs = 0;
    for (std::uint64_t r = 0; done < runs; ++r) {
      if (short_runs > runs) return {false, fmt("p=%g: %d runs aborted for lack of pulses", p, short_runs)};
      Transcript t;
      ok(e91_run_protocol(&params, s.p, e91_derive_seed(0xacce97, r), nullptr, &t.p));
      e91_transcript_summary sum{};
      ok(e91_transcript_summary_get(t.p, &sum));
      if (sum.abort_reason == E91_ABORT_INSUFFICIENT_PULSES) {
        ++short_runs;
        continue;
      }
      if (!sum.has_s_est || !sum.has_qber) return {false, fmt("p=%g run %llu produced no estimates", p, static_cast<unsigned long long>(r))};
      ++done;
      s_sum += sum.s_est;
      s_sq += sum.s_est * sum.s_est;
      q_sum += sum.qber;
      q_sq += sum.qber * sum.qber;
    }
    const double s_mean = s_sum / runs, q_mean = q_sum / runs;
    // Standard errors of the means from the run-to-run spread.
    const double s_se = std::sqrt(std::max(0.0, (s_sq - runs * s_mean * s_mean) / (runs - 1)) / runs);
    const double q_se = std::sqrt(std::max(0.0, (q_sq - runs * q_mean * q_mean) / (runs - 1)) / runs);
    const double s_target = (1.0 - 2.0 * p) / kSqrt2;
    const double s_z = std::abs(s_mean - s_target) / s_se;
    const bool q_ok = p == 0.0 ? q_mean == 0.0 : std::abs(q_mean - p) <= 4.0 * q_se;
    pass = pass && s_z <= 4.0 && q_ok;
    detail += fmt(" | p=%g S=%.4f (%.1f sd) QBER=%.4f short=%d", p, s_mean, s_z, q_mean, short_runs);
  }
  return {pass, detail};
}

Outcome convergence_criterion() {
  // Sweep n up to 1e8; the criterion is judged at the last point.
  const double p = 0.0;
  const double target = rate(p);
  std::string detail;
  double gap = 1.0;
  for (std::int64_t n : {INT64_C(100000), INT64_C(1000000), INT64_C(10000000), INT64_C(100000000)}) {
    const double q = std::pow(static_cast<double>(n), -0.4);
    std::int64_t l_syn = 0;
    ok(e91_syndrome_budget(n, 1.0, p, &l_syn));
    e91_params params{};
    ok(e91_params_make(n, q, 0.01, (1.0 - 2.0 * p) / kSqrt2, 1e-9, 1e-9, 1.0, l_syn, &params));
    e91_key_length kl{};
    ok(e91_finite_key_length(&params, &kl));
    const double finite = static_cast<double>(kl.l) / static_cast<double>(params.N);
    gap = std::abs(finite - target);
    detail += fmt("n=%.0e l_smp=%lld mu'=%.3g l/N=%.4f | ", static_cast<double>(n), static_cast<long long>(params.l_smp),
                  kl.mu_prime, finite);
  }
  detail += fmt("R=%.4f gap=%.4f", target, gap);
  return {gap <= 0.01, detail};
}

Outcome hashing_criterion() {
  const std::size_t in_len = 32;
  const int trials = 100000;
  std::uint64_t rng = 0x4a5;
  auto next = [&rng] { return rng = e91_derive_seed(rng, 1); };
  std::uint8_t x[4], xp[4];
  for (auto& b : x) b = static_cast<std::uint8_t>(next());
  std::copy(std::begin(x), std::end(x), xp);
  xp[0] ^= 0x20;  // differ in two bits
  xp[2] ^= 0x02;
  bool pass = true;
  std::string detail;
  for (std::size_t out : {4u, 8u, 12u}) {
    int collisions = 0;
    for (int t = 0; t < trials; ++t) {
      Hash h;
      ok(e91_hash_from_seed(in_len, out, next(), &h.p));
      std::uint8_t a[2] = {}, b[2] = {};
      ok(e91_hash_apply(h.p, x, 4, a, 2));
      ok(e91_hash_apply(h.p, xp, 4, b, 2));
      collisions += a[0] == b[0] && a[1] == b[1];
    }
    const double bound = std::ldexp(1.0, -static_cast<int>(out));
    const double freq = static_cast<double>(collisions) / trials;
    const double limit = bound + 3.0 * std::sqrt(bound * (1.0 - bound) / trials);
    pass = pass && freq <= limit;
    detail += fmt("out=%zu freq=%.5f limit=%.5f | ", out, freq, limit);
  }
  // Linearity on a longer input.
  Hash h;
  ok(e91_hash_from_seed(257, 40, next(), &h.p));
  int nonlinear = 0;
  for (int t = 0; t < 2000; ++t) {
    std::uint8_t u[33], v[33], w[33];
    for (int i = 0; i < 33; ++i) {
      u[i] = static_cast<std::uint8_t>(next());
      v[i] = static_cast<std::uint8_t>(next());
    }
    u[32] &= 1;
    v[32] &= 1;
    for (int i = 0; i < 33; ++i) w[i] = u[i] ^ v[i];
    std::uint8_t hu[5], hv[5], hw[5];
    ok(e91_hash_apply(h.p, u, 33, hu, 5));
    ok(e91_hash_apply(h.p, v, 33, hv, 5));
    ok(e91_hash_apply(h.p, w, 33, hw, 5));
    for (int i = 0; i < 5; ++i) nonlinear += hw[i] != (hu[i] ^ hv[i]);
  }
  pass = pass && nonlinear == 0;
  detail += fmt("linearity violations=%d", nonlinear);
  return {pass, detail};
}

Outcome azuma_criterion() {
  const e91_complex a{0.0, -1.0};
  Chsh h;
  ok(e91_chsh_create(a, a, &h.p));
  // Maximally violating Bell state: the top eigenvector.
  e91_complex best[4]{};
  double top = -INFINITY;
  for (std::size_t k = 0; k < 4; ++k) {
    e91_complex v[4];
    double e = 0.0;
    ok(e91_chsh_bell_vector(h.p, k, v, &e));
    if (e > top) {
      top = e;
      std::copy(v, v + 4, best);
    }
  }
  e91_complex rho[16];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      rho[4 * r + c] = {best[r].re * best[c].re + best[r].im * best[c].im,
                        best[r].im * best[c].re - best[r].re * best[c].im};
  e91_noise_report rep{};
  ok(e91_noise_experiment(a, a, rho, 4800, 0.1, 10000, 0xa2a, &rep));
  const double bound = std::exp(-4800 * 0.1 * 0.1 / 48.0);
  return {rep.frequency <= bound, fmt("exceed=%lld/%lld freq=%.4g bound=%.4g max|dS|=%.4f", static_cast<long long>(rep.exceed),
                                      static_cast<long long>(rep.trials), rep.frequency, bound, rep.max_abs_diff)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "QBER threshold at 5.4%", 1, qber_threshold_criterion},
      {2, "rate endpoints and monotonicity", 1, rate_endpoints_criterion},
      {3, "mu/nu normalization on 64x64 grid", 5, normalization_criterion},
      {4, "CHSH spectral identity on 64x64 grid", 10, spectral_criterion},
      {5, "bipartite squash conditions on 64x64 grid", 30, squash_criterion},
      {6, "single-qubit squash no-go", 60, nogo_criterion},
      {7, "simulated CHSH value and QBER", 120, simulation_criterion},
      {8, "finite rate within 0.01 of asymptotic at n=1e8, q=n^-0.4", 1, convergence_criterion},
      {9, "universal_2 collisions and linearity", 30, hashing_criterion},
      {10, "Azuma concentration at l_smp=4800", 120, azuma_criterion},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const LibraryError& e) {
      o = {false, "library error: " + e.what};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s  %2d  %-58s %8.3fs (budget %gs%s)  %s\n", pass ? "PASS" : "FAIL", c.id, c.name, secs, c.budget_s,
                in_time ? "" : ", exceeded", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
