#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "squash.hpp"

using namespace e91;

namespace {

const Cplx I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
constexpr double kSqrt2 = std::numbers::sqrt2;

Cplx grid_point(int k, int g) { return std::polar(1.0, 2.0 * kPi * k / g); }

HermitianOperator zi() { return tensor(pauli(PauliAxis::z), HermitianOperator::identity(2)); }

}  // namespace

TEST_CASE("flip amplitude") {
  CHECK(flip_amplitude(0.0) == 0.0);
  CHECK(flip_amplitude(kPi / 4) == 1.0);
  CHECK(flip_amplitude(-kPi / 4) == -1.0);
  const double knee = std::asin(1.0 / (2.0 * (1.0 + kSqrt2)));
  CHECK(knee == doctest::Approx(0.2086166903091486).epsilon(1e-15));
  CHECK(flip_amplitude(knee) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(flip_amplitude(-knee) == doctest::Approx(-0.5).epsilon(1e-15));
  // Saturates once (1+sqrt2)|sin phi| reaches 1.
  CHECK(flip_amplitude(std::asin(1.0 / (1.0 + kSqrt2)) + 1e-3) == 1.0);
  CHECK_THROWS_AS(flip_amplitude(kPi / 4 + 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(flip_amplitude(NAN), std::invalid_argument);
}

TEST_CASE("squash map at ideal alignment sends X(x)X to Y(x)Y") {
  const auto sq = build_squash(-I, -I);
  CHECK(sq.flip_amplitude == 1.0);
  const auto xx = tensor(pauli(PauliAxis::x), pauli(PauliAxis::x));
  const auto yy = tensor(pauli(PauliAxis::y), pauli(PauliAxis::y));
  CHECK(max_abs_diff(adjoint_apply(sq.channel, xx).matrix(), yy.matrix()) < 1e-14);
  CHECK(max_abs_diff(adjoint_apply(sq.channel, zi()).matrix(), zi().matrix()) < 1e-15);
  const auto r = verify_squash_conditions(sq, 1e-9);
  CHECK(r.pass);
  CHECK(r.cond1_residual <= 1e-12);
}

TEST_CASE("squash map at alpha = beta = 1 is a balanced flip") {
  const auto sq = build_squash(1.0, 1.0);
  CHECK(sq.phi == 0.0);
  CHECK(sq.flip_amplitude == 0.0);
  REQUIRE(sq.channel.kraus().size() == 2);
  const auto& k = sq.channel.kraus();
  const double w0 = (k[0].adjoint() * k[0]).trace().real() / 4.0;
  const double w1 = (k[1].adjoint() * k[1]).trace().real() / 4.0;
  CHECK(w0 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(w1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(verify_squash_conditions(sq, 1e-9).pass);
}

TEST_CASE("condition 1 holds exactly for random detector parameters") {
  Rng rng(77);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto sq = build_squash(std::polar(1.0, 2 * kPi * rng.uniform()), std::polar(1.0, 2 * kPi * rng.uniform()));
    worst = std::max(worst, max_abs_diff(adjoint_apply(sq.channel, zi()).matrix(), zi().matrix()));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("squash conditions over the 64x64 grid") {
  double c1 = 0.0, c2 = INFINITY, nmin = INFINITY, gap = INFINITY, tp = 0.0, cp = INFINITY, xx = 0.0;
  int passed = 0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const auto r = verify_squash_conditions(build_squash(grid_point(i, 64), grid_point(j, 64)), 1e-9);
      passed += r.pass;
      c1 = std::max(c1, r.cond1_residual);
      c2 = std::min(c2, r.cond2_min_eig);
      nmin = std::min(nmin, r.n_min_eig);
      gap = std::min(gap, r.mprime_gap_min_eig);
      tp = std::max(tp, r.tp_residual);
      cp = std::min(cp, r.choi_min_eig);
      xx = std::max(xx, r.xx_image_residual);
    }
  }
  CHECK(passed == 64 * 64);
  CHECK(c1 <= 1e-12);
  CHECK(c2 >= -1e-9);
  CHECK(nmin >= -1e-9);
  CHECK(gap >= -1e-10);
  CHECK(tp <= 1e-10);
  CHECK(cp >= -1e-10);
  CHECK(xx <= 1e-12);
}

TEST_CASE("Choi round trip preserves the channel") {
  const auto sq = build_squash(grid_point(3, 11), grid_point(7, 19));
  const auto j = choi_matrix(sq.channel);
  CHECK(j.in_dim == 4);
  CHECK(j.out_dim == 4);
  CHECK(j.tp_residual() < 1e-14);
  CHECK(min_eigenvalue(j.matrix) >= -1e-12);
  const auto back = channel_from_choi(j);
  CHECK(back.completeness_residual() < 1e-12);
  Rng rng(1);
  for (int t = 0; t < 5; ++t) {
    ComplexMatrix o(4, 4);
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 4; ++c) o(r, c) = Cplx(rng.uniform(), rng.uniform());
    const auto h = HermitianOperator::from_computed(hermitian_part(o));
    CHECK(max_abs_diff(adjoint_apply(back, h).matrix(), adjoint_apply(sq.channel, h).matrix()) < 1e-10);
  }
  // Not positive: rejected.
  ChoiMatrix bad = choi_matrix(QuantumChannel::identity(2));
  bad.matrix(0, 0) = -0.5;
  bad.matrix(3, 3) = 1.5;
  CHECK_THROWS(channel_from_choi(bad));
}

TEST_CASE("single-qubit squash feasibility") {
  const auto z = pauli(PauliAxis::z);
  SUBCASE("identity witness at alpha = -i") {
    const auto mx = generalized_x(-I);
    const auto r = onepartite_squash_feasibility(mx, z);
    CHECK(r.status == Feasibility::feasible);
    REQUIRE(r.witness.has_value());
    CHECK(witness_residual(*r.witness, mx, z) <= 1e-6);
  }
  SUBCASE("Z conjugation witness at alpha = i") {
    const auto mx = generalized_x(I);
    const auto r = onepartite_squash_feasibility(mx, z);
    CHECK(r.status == Feasibility::feasible);
    REQUIRE(r.witness.has_value());
    CHECK(witness_residual(*r.witness, mx, z) <= 1e-6);
  }
  SUBCASE("no squash map off the special points") {
    for (double ph : {kPi / 4, 0.0, kPi, 0.1, -kPi / 2 + 0.05, 3.0}) {
      const auto r = onepartite_squash_feasibility(generalized_x(std::polar(1.0, ph)), z);
      CHECK_MESSAGE(r.status == Feasibility::infeasible, "phase " << ph);
      CHECK(r.residual > 1e-4);
      CHECK_FALSE(r.witness.has_value());
    }
  }
  SUBCASE("operators outside [-1, 1] are rejected") {
    const auto big = HermitianOperator(2.0 * pauli(PauliAxis::y).matrix());
    CHECK_THROWS_AS(onepartite_squash_feasibility(big, z), std::invalid_argument);
    CHECK_THROWS_AS(onepartite_squash_feasibility(tensor(z, z), z), std::invalid_argument);
  }
  SUBCASE("an iteration cap below convergence reports inconclusive") {
    FeasibilityOptions opt;
    opt.max_iterations = 3;
    const auto r = onepartite_squash_feasibility(generalized_x(-I), z, opt);
    CHECK(r.status == Feasibility::inconclusive);
    CHECK(r.iterations == 3);
  }
  CHECK(to_string(Feasibility::feasible) == "feasible");
  CHECK(to_string(Feasibility::infeasible) == "infeasible");
  CHECK(to_string(Feasibility::inconclusive) == "inconclusive");
}
