// Command-line front end. Uses only the public C interface.

#include <e91squash/e91squash.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitVerification = 1;
constexpr int kExitConfig = 2;

// Invalid configuration (exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Any other failure reported by the library.
struct LibraryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(e91_status s, const char* what) {
  if (s == E91_OK) return;
  std::string msg = std::string(what) + ": " + e91_status_string(s) + " (" + e91_last_error() + ")";
  if (s == E91_ERR_INVALID_ARGUMENT) throw ConfigError(msg);
  throw LibraryError(msg);
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using ChshPtr = std::unique_ptr<e91_chsh, Deleter<e91_chsh, e91_chsh_free>>;
using SquashPtr = std::unique_ptr<e91_squash, Deleter<e91_squash, e91_squash_free>>;
using StrategyPtr = std::unique_ptr<e91_strategy, Deleter<e91_strategy, e91_strategy_free>>;
using TranscriptPtr = std::unique_ptr<e91_transcript, Deleter<e91_transcript, e91_transcript_free>>;
using BufferPtr = std::unique_ptr<e91_buffer, Deleter<e91_buffer, e91_buffer_free>>;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

std::string fmt(std::int64_t v) { return std::to_string(v); }

e91_complex unit(double phase) { return {std::cos(phase), std::sin(phase)}; }

// Grid point k of g on the unit circle, with exact values at the quarter turns.
e91_complex circle_point(int k, int g) {
  if ((4 * k) % g == 0) {
    switch ((4 * k / g) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  return unit(2.0 * std::numbers::pi * k / g);
}

ordered_json cjson(e91_complex z) { return {{"re", z.re}, {"im", z.im}}; }

// Output sink with the resolved configuration echoed in front.
class Output {
 public:
  Output(std::string path, std::string format) : path_(std::move(path)), format_(std::move(format)) {}

  const std::string& format() const { return format_; }
  bool csv() const { return format_ == "csv"; }

  void write_json(ordered_json config, ordered_json body) const {
    ordered_json doc;
    doc["config"] = std::move(config);
    for (auto& [k, v] : body.items()) doc[k] = v;
    emit(doc.dump(2) + "\n");
  }

  // rows: header first.
  void write_csv(const ordered_json& config, const std::vector<std::vector<std::string>>& rows,
                 const std::vector<std::string>& footer = {}) const {
    std::ostringstream os;
    for (auto& [k, v] : config.items()) os << "# " << k << " = " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    for (const auto& line : footer) os << "# " << line << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
      os << "\n";
    }
    emit(os.str());
  }

 private:
  void emit(const std::string& text) const {
    if (path_.empty() || path_ == "-") {
      std::cout << text;
      std::cout.flush();
      return;
    }
    std::ofstream f(path_, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open output file " + path_);
    f << text;
    if (!f) throw LibraryError("failed writing " + path_);
  }

  std::string path_;
  std::string format_;
};

struct Common {
  std::string out = "-";
  std::string format;
  std::uint64_t seed = 1;
};

void add_common(CLI::App* sub, Common& c, const std::string& default_format, bool with_seed) {
  c.format = default_format;
  sub->add_option("--out", c.out, "Output file ('-' for stdout)")->capture_default_str();
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  if (with_seed) sub->add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

ordered_json base_config(const std::string& sub, const Common& c, bool with_seed) {
  ordered_json j;
  j["subcommand"] = sub;
  j["version"] = e91_version();
  j["format"] = c.format;
  if (with_seed) j["seed"] = c.seed;
  return j;
}

struct ParamOptions {
  std::int64_t n = 1000000;
  double q = 0.1;
  double delta = 0.01;
  double S0 = 0.69;
  double eps = 1e-9;
  double eps_cor = 1e-9;
  double f_ec = 1.0;
  std::int64_t l_syn = -1;   // derived from qber_budget when negative
  double qber_budget = 0.01;
};

void add_params(CLI::App* sub, ParamOptions& p) {
  sub->add_option("--n", p.n, "Sifted-key length n")->capture_default_str();
  sub->add_option("--q", p.q, "Sample label probability q")->capture_default_str();
  sub->add_option("--delta", p.delta, "Pulse-count slack delta")->capture_default_str();
  sub->add_option("--S0", p.S0, "CHSH threshold S0")->capture_default_str();
  sub->add_option("--eps", p.eps, "Security parameter")->capture_default_str();
  sub->add_option("--eps_cor", p.eps_cor, "Correctness parameter")->capture_default_str();
  sub->add_option("--f_ec", p.f_ec, "Error-correction efficiency")->capture_default_str();
  sub->add_option("--l_syn", p.l_syn, "Syndrome budget in bits (default ceil(f_ec n h(qber_budget)))");
  sub->add_option("--qber_budget", p.qber_budget, "QBER used to size the default syndrome budget")
      ->capture_default_str();
}

e91_params resolve_params(const ParamOptions& o) {
  std::int64_t l_syn = o.l_syn;
  if (l_syn < 0) check(e91_syndrome_budget(o.n, o.f_ec, o.qber_budget, &l_syn), "syndrome budget");
  e91_params p{};
  check(e91_params_make(o.n, o.q, o.delta, o.S0, o.eps, o.eps_cor, o.f_ec, l_syn, &p), "parameters");
  return p;
}

ordered_json params_json(const e91_params& p) {
  return {{"n", p.n},   {"q", p.q},     {"delta", p.delta},     {"N", p.N},       {"l_smp", p.l_smp},
          {"S0", p.S0}, {"eps", p.eps}, {"eps_cor", p.eps_cor}, {"f_ec", p.f_ec}, {"l_syn", p.l_syn}};
}

// --- rate-curve -----------------------------------------------------------

struct RateCurve {
  Common c;
  double p_min = 0.0;
  double p_max = 0.15;
  int steps = 151;
  double f_ec = 1.0;
};

int run_rate_curve(const RateCurve& o, const Output& out) {
  if (!(o.p_min >= 0.0 && o.p_min < o.p_max && o.p_max <= 0.15)) throw ConfigError("need 0 <= p_min < p_max <= 0.15");
  if (o.steps < 2) throw ConfigError("steps must be >= 2");
  double threshold = 0.0;
  check(e91_qber_threshold(o.f_ec, &threshold), "qber threshold");

  ordered_json config = base_config("rate-curve", o.c, false);
  config["p_min"] = o.p_min;
  config["p_max"] = o.p_max;
  config["steps"] = o.steps;
  config["f_ec"] = o.f_ec;

  std::vector<std::vector<std::string>> rows{{"p", "R_ours", "R_device_dependent"}};
  ordered_json jrows = ordered_json::array();
  for (int k = 0; k < o.steps; ++k) {
    const double p = o.p_min + (o.p_max - o.p_min) * k / (o.steps - 1);
    double r = 0.0, dd = 0.0;
    check(e91_asymptotic_rate(p, o.f_ec, &r), "asymptotic rate");
    check(e91_device_dependent_rate(p, o.f_ec, &dd), "device-dependent rate");
    rows.push_back({fmt(p), fmt(r), fmt(dd)});
    jrows.push_back({{"p", p}, {"R_ours", r}, {"R_device_dependent", dd}});
  }
  if (out.csv()) {
    out.write_csv(config, rows, {"qber_threshold = " + fmt(threshold)});
  } else {
    out.write_json(config, {{"qber_threshold", threshold}, {"rows", jrows}});
  }
  return kExitOk;
}

// --- keylength ------------------------------------------------------------

struct KeyLength {
  Common c;
  ParamOptions p;
};

int run_keylength(const KeyLength& o, const Output& out) {
  const e91_params p = resolve_params(o.p);
  e91_buffer* raw = nullptr;
  check(e91_finite_key_length_json(&p, &raw), "key length");
  BufferPtr buf(raw);
  const auto report = ordered_json::parse(e91_buffer_data(buf.get()));
  e91_abort_bound ab{};
  check(e91_chernoff_abort_bound(&p, &ab), "abort bound");

  ordered_json config = base_config("keylength", o.c, false);
  config["params"] = params_json(p);
  if (out.csv()) {
    std::vector<std::vector<std::string>> rows{{"quantity", "value"}};
    rows.push_back({"l", fmt(report["l"].get<std::int64_t>())});
    for (const char* k : {"mu_prime", "delta_s", "mu", "hmin_bound"}) rows.push_back({k, fmt(report[k].get<double>())});
    for (auto& [k, v] : report["components"].items()) rows.push_back({k, fmt(v.get<double>())});
    rows.push_back({"abort_bound_simple", fmt(ab.simple_expression)});
    rows.push_back({"abort_bound_corrected", fmt(ab.corrected)});
    out.write_csv(config, rows, {"reason = " + report["reason"].get<std::string>()});
  } else {
    out.write_json(config, {{"key_length", report},
                            {"abort_bound", {{"simple_expression", ab.simple_expression}, {"corrected", ab.corrected}}}});
  }
  return kExitOk;
}

// --- verify-squash ----------------------------------------------------------

struct VerifySquash {
  Common c;
  int grid = 64;
  double tol = 1e-9;
};

int run_verify_squash(const VerifySquash& o, const Output& out) {
  if (o.grid < 2) throw ConfigError("grid must be >= 2");
  if (!(o.tol > 0.0)) throw ConfigError("tol must be > 0");
  ordered_json config = base_config("verify-squash", o.c, false);
  config["grid"] = o.grid;
  config["tol"] = o.tol;

  std::vector<std::vector<std::string>> rows{{"alpha_re", "alpha_im", "beta_re", "beta_im", "flip_amplitude",
                                              "cond1_residual", "cond2_min_eig", "n_min_eig", "mprime_gap_min_eig",
                                              "pass"}};
  ordered_json cells = ordered_json::array();
  double worst1 = 0.0, worst2 = INFINITY, worstn = INFINITY, worstg = INFINITY;
  int passed = 0;
  for (int i = 0; i < o.grid; ++i) {
    for (int j = 0; j < o.grid; ++j) {
      const e91_complex a = circle_point(i, o.grid);
      const e91_complex b = circle_point(j, o.grid);
      e91_squash* raw = nullptr;
      check(e91_squash_create(a, b, &raw), "squash");
      SquashPtr sq(raw);
      e91_squash_report r{};
      check(e91_squash_verify(sq.get(), o.tol, &r), "verify");
      double amp = 0.0, phi = 0.0;
      check(e91_squash_parameters(sq.get(), &amp, &phi), "squash parameters");
      // Overall pass also requires the M' and N sub-checks.
      const bool ok = r.pass && r.n_min_eig >= -o.tol && r.mprime_gap_min_eig >= -o.tol;
      passed += ok;
      worst1 = std::max(worst1, r.cond1_residual);
      worst2 = std::min(worst2, r.cond2_min_eig);
      worstn = std::min(worstn, r.n_min_eig);
      worstg = std::min(worstg, r.mprime_gap_min_eig);
      rows.push_back({fmt(a.re), fmt(a.im), fmt(b.re), fmt(b.im), fmt(amp), fmt(r.cond1_residual),
                      fmt(r.cond2_min_eig), fmt(r.n_min_eig), fmt(r.mprime_gap_min_eig), ok ? "1" : "0"});
      cells.push_back({{"alpha", cjson(a)},
                       {"beta", cjson(b)},
                       {"flip_amplitude", amp},
                       {"phi", phi},
                       {"cond1_residual", r.cond1_residual},
                       {"cond2_min_eig", r.cond2_min_eig},
                       {"n_min_eig", r.n_min_eig},
                       {"mprime_gap_min_eig", r.mprime_gap_min_eig},
                       {"pass", ok}});
    }
  }
  const int total = o.grid * o.grid;
  const bool all = passed == total;
  if (out.csv()) {
    out.write_csv(config, rows,
                  {"passed = " + std::to_string(passed) + "/" + std::to_string(total),
                   "worst_cond1_residual = " + fmt(worst1), "worst_cond2_min_eig = " + fmt(worst2),
                   "worst_n_min_eig = " + fmt(worstn), "worst_mprime_gap_min_eig = " + fmt(worstg)});
  } else {
    out.write_json(config, {{"all_pass", all},
                            {"passed", passed},
                            {"cells_total", total},
                            {"worst",
                             {{"cond1_residual", worst1},
                              {"cond2_min_eig", worst2},
                              {"n_min_eig", worstn},
                              {"mprime_gap_min_eig", worstg}}},
                            {"cells", cells}});
  }
  return all ? kExitOk : kExitVerification;
}

// --- chsh-spectrum ------------------------------------------------------------

struct ChshSpectrum {
  Common c;
  int grid = 64;
};

int run_chsh_spectrum(const ChshSpectrum& o, const Output& out) {
  if (o.grid < 1) throw ConfigError("grid must be >= 1");
  ordered_json config = base_config("chsh-spectrum", o.c, false);
  config["grid"] = o.grid;

  std::vector<std::vector<std::string>> rows{{"alpha_re", "alpha_im", "beta_re", "beta_im", "abs_mu", "abs_nu", "phi",
                                              "normalization_residual", "spectral_residual", "max_abs_eigenvalue"}};
  ordered_json cells = ordered_json::array();
  double worst_norm = 0.0, worst_spec = 0.0, worst_eig = 0.0;
  for (int i = 0; i < o.grid; ++i) {
    for (int j = 0; j < o.grid; ++j) {
      const e91_complex a = circle_point(i, o.grid);
      const e91_complex b = circle_point(j, o.grid);
      e91_chsh* raw = nullptr;
      check(e91_chsh_create(a, b, &raw), "chsh");
      ChshPtr m(raw);
      e91_chsh_info info{};
      check(e91_chsh_info_get(m.get(), &info), "chsh info");
      double spectral = 0.0;
      check(e91_chsh_spectral_residual(m.get(), &spectral), "spectral residual");
      double eig[4];
      check(e91_chsh_eigenvalues(m.get(), eig), "eigenvalues");
      const double norm = std::abs(info.abs_mu * info.abs_mu + info.abs_nu * info.abs_nu - 0.5);
      const double max_eig = std::max(std::abs(eig[0]), std::abs(eig[3]));
      worst_norm = std::max(worst_norm, norm);
      worst_spec = std::max(worst_spec, spectral);
      worst_eig = std::max(worst_eig, max_eig);
      rows.push_back({fmt(a.re), fmt(a.im), fmt(b.re), fmt(b.im), fmt(info.abs_mu), fmt(info.abs_nu), fmt(info.phi),
                      fmt(norm), fmt(spectral), fmt(max_eig)});
      cells.push_back({{"alpha", cjson(a)},
                       {"beta", cjson(b)},
                       {"mu", cjson(info.mu)},
                       {"nu", cjson(info.nu)},
                       {"phi", info.phi},
                       {"eigenvalues", {eig[0], eig[1], eig[2], eig[3]}},
                       {"normalization_residual", norm},
                       {"spectral_residual", spectral}});
    }
  }
  const bool ok = worst_norm <= 1e-12 && worst_spec <= 1e-10 && worst_eig <= 1.0 / std::numbers::sqrt2 + 1e-12;
  if (out.csv()) {
    out.write_csv(config, rows,
                  {"worst_normalization_residual = " + fmt(worst_norm), "worst_spectral_residual = " + fmt(worst_spec),
                   "max_abs_eigenvalue = " + fmt(worst_eig)});
  } else {
    out.write_json(config, {{"pass", ok},
                            {"worst_normalization_residual", worst_norm},
                            {"worst_spectral_residual", worst_spec},
                            {"max_abs_eigenvalue", worst_eig},
                            {"cells", cells}});
  }
  return ok ? kExitOk : kExitVerification;
}

// --- nogo ---------------------------------------------------------------------

struct Nogo {
  Common c;
  int grid = 20;
};

const char* feasibility_name(e91_feasibility f) {
  switch (f) {
    case E91_FEASIBLE: return "feasible";
    case E91_INFEASIBLE: return "infeasible";
    case E91_INCONCLUSIVE: return "inconclusive";
  }
  return "?";
}

int run_nogo(const Nogo& o, const Output& out) {
  if (o.grid < 1) throw ConfigError("grid must be >= 1");
  ordered_json config = base_config("nogo", o.c, false);
  config["grid"] = o.grid;

  std::vector<std::vector<std::string>> rows{
      {"k", "alpha_re", "alpha_im", "status", "expected", "residual", "iterations", "witness_residual"}};
  ordered_json cells = ordered_json::array();
  ordered_json inconclusive = ordered_json::array();
  bool ok = true;
  for (int k = 0; k < o.grid; ++k) {
    const e91_complex a = circle_point(k, o.grid);
    e91_feasibility_report r{};
    check(e91_nogo_check(a, nullptr, &r), "feasibility");
    const bool special = std::abs(a.re) < 1e-9 && std::abs(std::abs(a.im) - 1.0) < 1e-9;
    const e91_feasibility expected = special ? E91_FEASIBLE : E91_INFEASIBLE;
    ok = ok && r.status == expected;
    if (r.status == E91_INCONCLUSIVE) inconclusive.push_back(k);
    rows.push_back({std::to_string(k), fmt(a.re), fmt(a.im), feasibility_name(r.status), feasibility_name(expected),
                    fmt(r.residual), fmt(r.iterations), fmt(r.witness_residual)});
    cells.push_back({{"k", k},
                     {"alpha", cjson(a)},
                     {"status", feasibility_name(r.status)},
                     {"expected", feasibility_name(expected)},
                     {"residual", r.residual},
                     {"iterations", r.iterations},
                     {"witness_residual", r.witness_residual}});
  }
  if (out.csv()) {
    out.write_csv(config, rows, {std::string("matches_expectation = ") + (ok ? "true" : "false")});
  } else {
    out.write_json(config, {{"matches_expectation", ok}, {"inconclusive", inconclusive}, {"cells", cells}});
  }
  return ok ? kExitOk : kExitVerification;
}

// --- simulate -------------------------------------------------------------------

struct Simulate {
  Common c;
  ParamOptions p;
  std::string strategy = "depolarizing";
  double noise = 0.0;
  double alpha_phase = -std::numbers::pi / 2.0;
  double beta_phase = -std::numbers::pi / 2.0;
  int runs = 10;
  std::string transcript;
  double p_est = -1.0;
  std::size_t corrupt_bits = 0;
};

int run_simulate(const Simulate& o, const Output& out) {
  if (o.runs < 1) throw ConfigError("runs must be >= 1");
  const e91_params p = resolve_params(o.p);
  e91_strategy* sraw = nullptr;
  if (o.strategy == "depolarizing") {
    check(e91_strategy_iid_depolarizing(o.noise, &sraw), "strategy");
  } else {
    check(e91_strategy_constant_misalignment(unit(o.alpha_phase), unit(o.beta_phase), o.noise, &sraw), "strategy");
  }
  StrategyPtr strategy(sraw);
  e91_run_options opts{};
  if (o.p_est >= 0.0) {
    opts.has_p_est = 1;
    opts.p_est = o.p_est;
  }
  opts.corrupt_bits = o.corrupt_bits;

  ordered_json config = base_config("simulate", o.c, true);
  config["params"] = params_json(p);
  config["strategy"] = o.strategy;
  config["noise"] = o.noise;
  if (o.strategy == "misaligned") {
    config["alpha_phase"] = o.alpha_phase;
    config["beta_phase"] = o.beta_phase;
  }
  config["runs"] = o.runs;
  if (opts.has_p_est) config["p_est"] = o.p_est;
  config["corrupt_bits"] = o.corrupt_bits;

  static constexpr const char* kAbortNames[] = {"none", "insufficient_pulses", "chsh_failed", "verify_failed"};
  std::vector<std::vector<std::string>> rows{
      {"run", "seed", "abort", "s_est", "qber", "syndrome_bits", "key_length", "keys_equal"}};
  ordered_json jruns = ordered_json::array();
  double s_sum = 0.0, s_sq = 0.0, q_sum = 0.0, q_sq = 0.0, l_sum = 0.0;
  int s_count = 0, q_count = 0, aborts = 0;
  for (int run = 0; run < o.runs; ++run) {
    const std::uint64_t seed = e91_derive_seed(o.c.seed, static_cast<std::uint64_t>(run));
    e91_transcript* traw = nullptr;
    check(e91_run_protocol(&p, strategy.get(), seed, &opts, &traw), "run");
    TranscriptPtr t(traw);
    e91_transcript_summary s{};
    check(e91_transcript_summary_get(t.get(), &s), "summary");
    if (run == 0 && !o.transcript.empty()) {
      e91_buffer* braw = nullptr;
      check(e91_transcript_json(t.get(), 1, &braw), "transcript json");
      BufferPtr buf(braw);
      std::ofstream f(o.transcript, std::ios::binary | std::ios::trunc);
      if (!f) throw ConfigError("cannot open transcript file " + o.transcript);
      f << e91_buffer_data(buf.get()) << "\n";
    }
    if (s.has_s_est) {
      s_sum += s.s_est;
      s_sq += s.s_est * s.s_est;
      ++s_count;
    }
    if (s.has_qber && s.abort_reason != E91_ABORT_CHSH_FAILED) {
      q_sum += s.qber;
      q_sq += s.qber * s.qber;
      ++q_count;
    }
    if (s.abort_reason != E91_ABORT_NONE) ++aborts;
    l_sum += static_cast<double>(s.key_length);
    const char* abort = kAbortNames[s.abort_reason];
    rows.push_back({std::to_string(run), std::to_string(seed), abort, s.has_s_est ? fmt(s.s_est) : "",
                    s.has_qber ? fmt(s.qber) : "", fmt(s.syndrome_bits), fmt(s.key_length),
                    s.keys_equal ? "1" : "0"});
    jruns.push_back({{"run", run},
                     {"seed", seed},
                     {"abort", abort},
                     {"s_est", s.has_s_est ? ordered_json(s.s_est) : ordered_json(nullptr)},
                     {"qber", s.has_qber ? ordered_json(s.qber) : ordered_json(nullptr)},
                     {"p_est", s.p_est},
                     {"syndrome_bits", s.syndrome_bits},
                     {"syndrome_within_budget", s.syndrome_within_budget != 0},
                     {"key_length", s.key_length},
                     {"keys_equal", s.keys_equal != 0}});
  }
  auto mean_sd = [](double sum, double sq, int count) -> std::pair<double, double> {
    if (count == 0) return {NAN, NAN};
    const double m = sum / count;
    const double var = count > 1 ? std::max(0.0, (sq - count * m * m) / (count - 1)) : 0.0;
    return {m, std::sqrt(var)};
  };
  const auto [s_mean, s_sd] = mean_sd(s_sum, s_sq, s_count);
  const auto [q_mean, q_sd] = mean_sd(q_sum, q_sq, q_count);
  const double abort_rate = static_cast<double>(aborts) / o.runs;
  const double l_mean = l_sum / o.runs;
  if (out.csv()) {
    out.write_csv(config, rows,
                  {"s_mean = " + fmt(s_mean), "s_sd = " + fmt(s_sd), "qber_mean = " + fmt(q_mean),
                   "qber_sd = " + fmt(q_sd), "abort_rate = " + fmt(abort_rate), "key_length_mean = " + fmt(l_mean)});
  } else {
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    out.write_json(config, {{"summary",
                             {{"s_mean", num(s_mean)},
                              {"s_sd", num(s_sd)},
                              {"qber_mean", num(q_mean)},
                              {"qber_sd", num(q_sd)},
                              {"abort_rate", abort_rate},
                              {"key_length_mean", l_mean}}},
                            {"runs", jruns}});
  }
  return kExitOk;
}

// --- bounds-check ---------------------------------------------------------------

struct BoundsCheck {
  Common c;
  ParamOptions p;
  int runs = 1000;
  std::int64_t noise_l_smp = 4800;
  double noise_delta_s = 0.1;
  std::int64_t noise_trials = 10000;
  double noise = 0.0;
};

int run_bounds_check(const BoundsCheck& o, const Output& out) {
  if (o.runs < 1 || o.noise_trials < 1) throw ConfigError("runs and noise_trials must be >= 1");
  const e91_params p = resolve_params(o.p);
  e91_abort_report ab{};
  check(e91_abort_experiment(&p, o.runs, e91_derive_seed(o.c.seed, 0), &ab), "abort experiment");

  // Bell-diagonal input at ideal alignment: the top eigenvector of M(-i,-i) mixed with I/4.
  const e91_complex mi{0.0, -1.0};
  e91_chsh* craw = nullptr;
  check(e91_chsh_create(mi, mi, &craw), "chsh");
  ChshPtr m(craw);
  e91_complex psi[4];
  double ev = 0.0;
  check(e91_chsh_bell_vector(m.get(), 0, psi, &ev), "bell vector");
  if (!(o.noise >= 0.0 && o.noise <= 0.5)) throw ConfigError("noise must lie in [0, 1/2]");
  e91_complex rho[16];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double pr = psi[r].re * psi[c].re + psi[r].im * psi[c].im;
      const double pi = psi[r].im * psi[c].re - psi[r].re * psi[c].im;
      const double w = 1.0 - 2.0 * o.noise;
      rho[4 * r + c] = {w * pr + (r == c ? 2.0 * o.noise / 4.0 : 0.0), w * pi};
    }
  }
  e91_noise_report nr{};
  check(e91_noise_experiment(mi, mi, rho, o.noise_l_smp, o.noise_delta_s, o.noise_trials,
                             e91_derive_seed(o.c.seed, 1), &nr),
        "noise experiment");

  const double sd_abort = std::sqrt(ab.bound.corrected * (1.0 - ab.bound.corrected) / o.runs);
  const bool abort_ok = ab.frequency <= ab.bound.corrected + 3.0 * sd_abort;
  const bool azuma_ok = nr.frequency <= nr.azuma_bound;

  ordered_json config = base_config("bounds-check", o.c, true);
  config["params"] = params_json(p);
  config["runs"] = o.runs;
  config["noise_l_smp"] = o.noise_l_smp;
  config["noise_delta_s"] = o.noise_delta_s;
  config["noise_trials"] = o.noise_trials;
  config["noise"] = o.noise;

  if (out.csv()) {
    std::vector<std::vector<std::string>> rows{{"check", "empirical", "bound", "pass"}};
    rows.push_back({"abort_chernoff", fmt(ab.frequency), fmt(ab.bound.corrected), abort_ok ? "1" : "0"});
    rows.push_back({"abort_simple_expression", fmt(ab.frequency), fmt(ab.bound.simple_expression),
                    ab.frequency <= ab.bound.simple_expression ? "1" : "0"});
    rows.push_back({"azuma", fmt(nr.frequency), fmt(nr.azuma_bound), azuma_ok ? "1" : "0"});
    out.write_csv(config, rows);
  } else {
    out.write_json(config, {{"pass", abort_ok && azuma_ok},
                            {"abort",
                             {{"trials", ab.trials},
                              {"aborts", ab.aborts},
                              {"frequency", ab.frequency},
                              {"bound_corrected", ab.bound.corrected},
                              {"bound_simple_expression", ab.bound.simple_expression},
                              {"sif_term", ab.bound.sif_term},
                              {"smp_term", ab.bound.smp_term},
                              {"pass", abort_ok}}},
                            {"azuma",
                             {{"trials", nr.trials},
                              {"l_smp", nr.l_smp},
                              {"delta_s", nr.delta_s},
                              {"exceed", nr.exceed},
                              {"frequency", nr.frequency},
                              {"bound", nr.azuma_bound},
                              {"mean_s_g2", nr.mean_s_g2},
                              {"mean_s_g3", nr.mean_s_g3},
                              {"mean_abs_diff", nr.mean_abs_diff},
                              {"max_abs_diff", nr.max_abs_diff},
                              {"pass", azuma_ok}}}});
  }
  return abort_ok && azuma_ok ? kExitOk : kExitVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"E91 device-independent QKD analysis toolkit"};
  app.set_config("--config", "", "TOML/INI file with option values (flags override)");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(e91_version()));

  RateCurve rc;
  auto* s_rate = app.add_subcommand("rate-curve", "Asymptotic key rate versus QBER (CSV rows p, R_ours, R_dd)");
  add_common(s_rate, rc.c, "csv", false);
  s_rate->add_option("--p_min", rc.p_min)->capture_default_str();
  s_rate->add_option("--p_max", rc.p_max)->capture_default_str();
  s_rate->add_option("--steps,--grid", rc.steps, "Number of grid points")->capture_default_str();
  s_rate->add_option("--f_ec", rc.f_ec)->capture_default_str();

  KeyLength kl;
  auto* s_key = app.add_subcommand("keylength", "Finite-size secret key length");
  add_common(s_key, kl.c, "json", false);
  add_params(s_key, kl.p);

  VerifySquash vs;
  auto* s_verify = app.add_subcommand("verify-squash", "Check the bipartite squash channel on an (alpha, beta) grid");
  add_common(s_verify, vs.c, "json", false);
  s_verify->add_option("--grid", vs.grid, "Points per unit circle")->capture_default_str();
  s_verify->add_option("--tol", vs.tol)->capture_default_str();

  ChshSpectrum cs;
  auto* s_chsh = app.add_subcommand("chsh-spectrum", "mu, nu and Bell spectrum of the CHSH operator on a grid");
  add_common(s_chsh, cs.c, "json", false);
  s_chsh->add_option("--grid", cs.grid, "Points per unit circle")->capture_default_str();

  Nogo ng;
  auto* s_nogo = app.add_subcommand("nogo", "Single-qubit squash feasibility over alpha on the unit circle");
  add_common(s_nogo, ng.c, "json", false);
  s_nogo->add_option("--grid", ng.grid, "Points on the unit circle")->capture_default_str();

  Simulate sm;
  sm.p.n = 76950;
  sm.p.delta = 0.05;
  sm.p.S0 = 0.0;
  auto* s_sim = app.add_subcommand("simulate", "Monte Carlo runs of the protocol");
  add_common(s_sim, sm.c, "csv", true);
  add_params(s_sim, sm.p);
  s_sim->add_option("--strategy", sm.strategy)->check(CLI::IsMember({"depolarizing", "misaligned"}))->capture_default_str();
  s_sim->add_option("--noise", sm.noise, "Depolarizing parameter p")->capture_default_str();
  s_sim->add_option("--alpha_phase", sm.alpha_phase, "arg(alpha) for the misaligned strategy")->capture_default_str();
  s_sim->add_option("--beta_phase", sm.beta_phase, "arg(beta) for the misaligned strategy")->capture_default_str();
  s_sim->add_option("--runs", sm.runs)->capture_default_str();
  s_sim->add_option("--transcript", sm.transcript, "Write the first run's transcript JSON here");
  s_sim->add_option("--p_est", sm.p_est, "QBER estimate for the syndrome (default: from S)");
  s_sim->add_option("--corrupt_bits", sm.corrupt_bits, "Bits flipped in Bob's corrected key")->capture_default_str();

  BoundsCheck bc;
  bc.p.n = 7290;
  bc.p.delta = 0.1;
  bc.p.S0 = 0.0;
  auto* s_bounds = app.add_subcommand("bounds-check", "Monte Carlo checks of the abort and concentration bounds");
  add_common(s_bounds, bc.c, "json", true);
  add_params(s_bounds, bc.p);
  s_bounds->add_option("--runs", bc.runs, "Abort-experiment trials")->capture_default_str();
  s_bounds->add_option("--noise_l_smp", bc.noise_l_smp)->capture_default_str();
  s_bounds->add_option("--noise_delta_s", bc.noise_delta_s)->capture_default_str();
  s_bounds->add_option("--noise_trials", bc.noise_trials)->capture_default_str();
  s_bounds->add_option("--noise", bc.noise, "Depolarizing parameter of the tested state")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*s_rate) return run_rate_curve(rc, Output(rc.c.out, rc.c.format));
    if (*s_key) return run_keylength(kl, Output(kl.c.out, kl.c.format));
    if (*s_verify) return run_verify_squash(vs, Output(vs.c.out, vs.c.format));
    if (*s_chsh) return run_chsh_spectrum(cs, Output(cs.c.out, cs.c.format));
    if (*s_nogo) return run_nogo(ng, Output(ng.c.out, ng.c.format));
    if (*s_sim) return run_simulate(sm, Output(sm.c.out, sm.c.format));
    if (*s_bounds) return run_bounds_check(bc, Output(bc.c.out, bc.c.format));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitVerification;
  }
  return kExitConfig;
}
