#include "serialize.hpp"

#include <stdexcept>

namespace e91 {

namespace {

using nlohmann::json;

char label_char(Label l) { return l == Label::smp ? 'm' : 's'; }

char basis_char(Basis c) {
  switch (c) {
    case Basis::z: return 'z';
    case Basis::x: return 'x';
    case Basis::z_prime: return 'p';
  }
  return '?';
}

json hash_json(const std::optional<HashDescriptor>& h) {
  if (!h) return nullptr;
  return {{"seed", h->seed}, {"in_len", h->in_len}, {"out_len", h->out_len}};
}

json bits_json(const BitString& b) { return {{"len", b.size()}, {"hex", b.to_hex()}}; }

}  // namespace

json to_json(Cplx z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json to_json(const ProtocolParams& p) {
  return {{"n", p.n},         {"q", p.q},   {"delta", p.delta},     {"N", p.N},       {"l_smp", p.l_smp},
          {"S0", p.S0},       {"eps", p.eps}, {"eps_cor", p.eps_cor}, {"f_ec", p.f_ec}, {"l_syn", p.l_syn}};
}

ProtocolParams params_from_json(const json& j) {
  ProtocolParams p = make_params(j.at("n").get<std::int64_t>(), j.at("q").get<double>(), j.at("delta").get<double>(),
                                 j.at("S0").get<double>(), j.at("eps").get<double>(), j.at("eps_cor").get<double>(),
                                 j.at("f_ec").get<double>(), j.at("l_syn").get<std::int64_t>());
  if (j.contains("N") && j.at("N").get<std::int64_t>() != p.N) throw std::invalid_argument("params: N is inconsistent");
  if (j.contains("l_smp") && j.at("l_smp").get<std::int64_t>() != p.l_smp) {
    throw std::invalid_argument("params: l_smp is inconsistent");
  }
  return p;
}

json to_json(const KeyLengthReport& r) {
  const auto& c = r.components;
  return {{"l", r.l},
          {"mu_prime", r.mu_prime},
          {"delta_s", r.delta_s},
          {"mu", r.mu},
          {"hmin_bound", r.hmin_bound},
          {"components",
           {{"phase_error_arg", c.phase_error_arg},
            {"leading", c.leading},
            {"sample_cost", c.sample_cost},
            {"syndrome_cost", c.syndrome_cost},
            {"verify_cost", c.verify_cost},
            {"pa_cost", c.pa_cost},
            {"raw", c.raw}}},
          {"reason", r.reason}};
}

json to_json(const AbortBound& b) {
  return {{"simple_expression", b.simple_expression}, {"corrected", b.corrected}, {"sif_term", b.sif_term},
          {"smp_term", b.smp_term},                 {"sif_mean", b.sif_mean},   {"smp_mean", b.smp_mean}};
}

json to_json(const SquashReport& r) {
  return {{"cond1_residual", r.cond1_residual},
          {"cond2_min_eig", r.cond2_min_eig},
          {"n_min_eig", r.n_min_eig},
          {"mprime_gap_min_eig", r.mprime_gap_min_eig},
          {"xx_image_residual", r.xx_image_residual},
          {"tp_residual", r.tp_residual},
          {"choi_min_eig", r.choi_min_eig},
          {"pass", r.pass}};
}

json to_json(const NoiseReport& r) {
  return {{"trials", r.trials},         {"l_smp", r.l_smp},         {"delta_s", r.delta_s},
          {"exceed", r.exceed},         {"frequency", r.frequency}, {"azuma_bound", r.azuma_bound},
          {"mean_s_g2", r.mean_s_g2},   {"mean_s_g3", r.mean_s_g3}, {"mean_abs_diff", r.mean_abs_diff},
          {"max_abs_diff", r.max_abs_diff}};
}

json to_json(const AbortExperimentReport& r) {
  return {{"trials", r.trials}, {"aborts", r.aborts}, {"frequency", r.frequency}, {"bound", to_json(r.bound)}};
}

json to_json(const Transcript& t, bool include_pulses) {
  json j;
  j["schema"] = kTranscriptSchema;
  j["seed"] = t.seed;
  j["params"] = to_json(t.params);
  j["strategy"] = {{"kind", std::string(to_string(t.strategy))},
                   {"p", t.strategy_p},
                   {"alpha", to_json(t.strategy_alpha)},
                   {"beta", to_json(t.strategy_beta)}};
  if (include_pulses) {
    std::string la, lb, ba, bb, ra, rb;
    for (auto* s : {&la, &lb, &ba, &bb, &ra, &rb}) s->reserve(t.pulses.size());
    for (const auto& p : t.pulses) {
      la.push_back(label_char(p.label_a));
      lb.push_back(label_char(p.label_b));
      ba.push_back(basis_char(p.basis_a));
      bb.push_back(basis_char(p.basis_b));
      ra.push_back(p.r_a == 1 ? '+' : '-');
      rb.push_back(p.r_b == 1 ? '+' : '-');
    }
    j["pulses"] = {{"count", t.pulses.size()}, {"label_a", la}, {"label_b", lb}, {"basis_a", ba},
                   {"basis_b", bb},            {"r_a", ra},     {"r_b", rb}};
    j["i_smp"] = t.i_smp;
    j["i_sif"] = t.i_sif;
  }
  j["both_smp"] = t.both_smp;
  j["both_sif"] = t.both_sif;
  j["s_est"] = t.s_est ? json(*t.s_est) : json(nullptr);
  j["abort"] = t.abort ? json(std::string(to_string(*t.abort))) : json(nullptr);
  j["qber"] = t.qber ? json(*t.qber) : json(nullptr);
  j["p_est"] = t.p_est ? json(*t.p_est) : json(nullptr);
  j["syndrome_bits"] = t.syndrome_bits;
  j["syndrome_within_budget"] = t.syndrome_within_budget;
  j["u"] = bits_json(t.u);
  j["u_bob_raw"] = bits_json(t.u_bob_raw);
  j["u_corrected"] = bits_json(t.u_corrected);
  j["f_cor"] = hash_json(t.f_cor);
  j["tag_a"] = bits_json(t.tag_a);
  j["tag_b"] = bits_json(t.tag_b);
  j["key_length"] = t.key_length;
  j["f_pa"] = hash_json(t.f_pa);
  j["k_a"] = bits_json(t.k_a);
  j["k_b"] = bits_json(t.k_b);
  return j;
}

}  // namespace e91
