#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "chsh.hpp"

using namespace e91;

namespace {

const Cplx I{0.0, 1.0};
constexpr double kPi = std::numbers::pi;
constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

Cplx grid_point(int k, int g) { return std::polar(1.0, 2.0 * kPi * k / g); }

StateDensity random_state(Rng& rng) {
  ComplexMatrix a(4, 4);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) a(r, c) = Cplx(rng.uniform() - 0.5, rng.uniform() - 0.5);
  ComplexMatrix rho = a * a.adjoint();
  rho *= 1.0 / rho.trace().real();
  return StateDensity(hermitian_part(rho));
}

}  // namespace

TEST_CASE("CHSH at ideal alignment") {
  const auto m = build_chsh(-I, -I);
  CHECK(m.abs_mu == doctest::Approx(kInvSqrt2).epsilon(1e-15));
  CHECK(m.abs_nu == doctest::Approx(0.0));
  CHECK(m.phi == doctest::Approx(kPi / 4).epsilon(1e-15));
  const auto ev = hermitian_eig(m.op);
  CHECK(ev.eigenvalues[0] == doctest::Approx(kInvSqrt2).epsilon(1e-14));
  CHECK(ev.eigenvalues[3] == doctest::Approx(-kInvSqrt2).epsilon(1e-14));
}

TEST_CASE("CHSH with both x settings collapsed onto Z") {
  const auto m = build_chsh(1.0, 1.0);
  const auto zz = tensor(pauli(PauliAxis::z), pauli(PauliAxis::z));
  CHECK(max_abs_diff(m.op.matrix(), 0.5 * zz.matrix()) < 1e-15);
  CHECK(m.abs_mu == doctest::Approx(0.5));
  CHECK(m.abs_nu == doctest::Approx(0.5));
  CHECK(m.phi == doctest::Approx(0.0));
  const auto mp = mprime(m);
  CHECK(max_abs_diff(mp.op.matrix(), 0.5 * ComplexMatrix::identity(4)) < 1e-14);
}

TEST_CASE("normalization, spectrum and M' closed form over a 64x64 grid") {
  const auto yy = tensor(pauli(PauliAxis::y), pauli(PauliAxis::y)).matrix();
  const auto id = ComplexMatrix::identity(4);
  double worst_norm = 0.0, worst_recon = 0.0, worst_eig = 0.0, worst_closed = 0.0, worst_gap = 0.0;
  for (int i = 0; i < 64; ++i) {
    for (int j = 0; j < 64; ++j) {
      const auto m = build_chsh(grid_point(i, 64), grid_point(j, 64));
      worst_norm = std::max(worst_norm, std::abs(m.abs_mu * m.abs_mu + m.abs_nu * m.abs_nu - 0.5));
      worst_recon = std::max(worst_recon, max_abs_diff(spectral_reconstruction(m), m.op.matrix()));
      const auto ev = hermitian_eig(m.op);
      worst_eig = std::max({worst_eig, std::abs(ev.eigenvalues.front()), std::abs(ev.eigenvalues.back())});
      const auto mp = mprime(m);
      const ComplexMatrix closed = 0.5 * (std::cos(m.phi) * id + std::sin(m.phi) * yy);
      worst_closed = std::max(worst_closed, max_abs_diff(mp.op.matrix(), closed));
      worst_gap = std::min(worst_gap, min_eigenvalue(mp.op.matrix() - m.op.matrix()));
      REQUIRE(std::abs(m.phi) <= kPi / 4 + 1e-12);
    }
  }
  CHECK(worst_norm <= 1e-12);
  CHECK(worst_recon <= 1e-10);
  CHECK(worst_eig <= kInvSqrt2 + 1e-12);
  CHECK(worst_closed <= 1e-10);
  CHECK(worst_gap >= -1e-10);
}

TEST_CASE("Bell vectors are orthonormal eigenvectors with the stated eigenvalues") {
  for (auto [a, b] : {std::pair{-I, -I}, std::pair{Cplx(1.0), Cplx(1.0)}, std::pair{grid_point(5, 17), grid_point(11, 13)},
                      std::pair{Cplx(-1.0), Cplx(-1.0)}}) {
    const auto m = build_chsh(a, b);
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& v = m.bell_basis[k].amplitudes;
      for (std::size_t r = 0; r < 4; ++r) {
        Cplx mv = 0.0;
        for (std::size_t c = 0; c < 4; ++c) mv += m.op(r, c) * v[c];
        REQUIRE(std::abs(mv - m.bell_eigenvalue(k) * v[r]) < 1e-12);
      }
      for (std::size_t l = 0; l < 4; ++l) {
        Cplx ip = 0.0;
        for (std::size_t r = 0; r < 4; ++r) ip += std::conj(m.bell_basis[k].amplitudes[r]) * m.bell_basis[l].amplitudes[r];
        REQUIRE(std::abs(ip - (k == l ? 1.0 : 0.0)) < 1e-14);
      }
    }
    CHECK_THROWS_AS(m.bell_eigenvalue(4), std::out_of_range);
  }
}

TEST_CASE("degenerate Bell phases default to one") {
  // At alpha = beta = -i, nu vanishes.
  const auto m = build_chsh(-I, -I);
  CHECK(m.abs_nu == 0.0);
  CHECK(m.bell_basis[2].amplitudes[2] == Cplx(kInvSqrt2, 0.0));
}

TEST_CASE("CHSH POVM") {
  const auto m = build_chsh(-I, -I);
  const auto [ep, em] = chsh_povm(m);
  CHECK(max_abs_diff(ep.matrix() + em.matrix(), ComplexMatrix::identity(4)) == 0.0);
  CHECK(min_eigenvalue(ep) == doctest::Approx(0.5 * (1.0 - kInvSqrt2)).epsilon(1e-13));
  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto rho = random_state(rng);
    CHECK(expectation(ep.matrix(), rho.matrix()) + expectation(em.matrix(), rho.matrix()) ==
          doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("POVM statistics equal the uniform mixture of local basis pairs") {
  {
    const auto r = povm_equals_local_mixture(build_chsh(grid_point(3, 7), grid_point(2, 9)),
                                             StateDensity::maximally_mixed(4));
    CHECK(r.difference <= 1e-12);
    CHECK(r.prob_povm == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r.prob_mixture == doctest::Approx(0.5).epsilon(1e-13));
  }
  {
    const auto m = build_chsh(-I, -I);
    const auto r = povm_equals_local_mixture(m, StateDensity::pure(m.bell_basis[0].amplitudes));
    CHECK(r.prob_povm == doctest::Approx(0.5 * (1.0 + kInvSqrt2)).epsilon(1e-13));
    CHECK(r.prob_mixture == doctest::Approx(0.5 * (1.0 + kInvSqrt2)).epsilon(1e-13));
  }
  Rng rng(123);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto m = build_chsh(std::polar(1.0, 2 * kPi * rng.uniform()), std::polar(1.0, 2 * kPi * rng.uniform()));
    worst = std::max(worst, povm_equals_local_mixture(m, random_state(rng)).difference);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("Bell test sign convention") {
  CHECK(bell_test_t(Basis::x, Basis::x) == 1);
  CHECK(bell_test_t(Basis::z, Basis::x) == 0);
  CHECK(bell_test_t(Basis::x, Basis::z) == 0);
  CHECK(bell_test_t(Basis::z, Basis::z) == 0);
  CHECK(chsh_sign(1, 1, Basis::x, Basis::x) == -1);
  CHECK(chsh_sign(1, -1, Basis::x, Basis::x) == 1);
  CHECK(chsh_sign(-1, -1, Basis::z, Basis::x) == 1);
  CHECK(chsh_sign(1, -1, Basis::z, Basis::z) == -1);
  CHECK_THROWS_AS(chsh_sign(0, 1, Basis::z, Basis::z), std::invalid_argument);
}

TEST_CASE("invalid detector parameters") {
  CHECK_THROWS_AS(build_chsh(Cplx(2.0, 0.0), -I), std::invalid_argument);
  CHECK_THROWS_AS(build_chsh(-I, Cplx(NAN, 0.0)), std::invalid_argument);
}
