#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <nlsq/cv_algebra.hpp>
#include <nlsq/dynamics.hpp>
#include <nlsq/metrology_bounds.hpp>
#include <nlsq/moment_engine.hpp>
#include <nlsq/spectrum.hpp>

#include "support/random_states.hpp"

using namespace nlsq;
using namespace nlsq::testing;

namespace {

CMatrix psd_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(a);
  const RVector ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

// Uhlmann fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double uhlmann_fidelity(const CMatrix& rho, const CMatrix& sigma) {
  const CMatrix s = psd_sqrt(rho);
  return std::pow(psd_sqrt(s * sigma * s).trace().real(), 2);
}

// QFI from the Bures distance between rho and exp(-iH dt) rho exp(iH dt).
double bures_qfi(const QuantumState& st, const HermitianOperator& h, double dt) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
  const CVector phase = (cplx(0.0, -dt) * es.eigenvalues().cast<cplx>()).array().exp();
  const CMatrix u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  const CMatrix rho = st.density();
  const double f = uhlmann_fidelity(rho, u * rho * u.adjoint());
  return 8.0 * (1.0 - std::sqrt(f)) / (dt * dt);
}

QuantumState ghz(const DickeBasis& b) {
  CVector v = CVector::Zero(b.dim());
  v[0] = v[b.n_particles()] = 1.0 / std::sqrt(2.0);
  return QuantumState::pure(v, b.tag());
}

CMatrix rotation(const DickeBasis& b, const Eigen::Vector3d& axis, double angle) {
  const HermitianOperator jn = spin_component(b, axis.normalized());
  return UnitaryPropagator(jn).unitary(angle);
}

}  // namespace

TEST_SUITE("metrology_bounds") {

TEST_CASE("QFI examples") {
  for (int n : {1, 4, 17}) {
    const DickeBasis b(n);
    const SpinOperators s = build_spin_operators(b);
    const QuantumState css = coherent_spin_state_z(b);
    CHECK(qfi(css, s.jx) == doctest::Approx(n).epsilon(1e-12));
    CHECK(qfi(css, s.jy) == doctest::Approx(n).epsilon(1e-12));
    CHECK(std::abs(qfi(css, s.jz)) < 1e-12);
    CHECK(qfi(ghz(b), s.jz) == doctest::Approx(double(n) * n).epsilon(1e-12));
    // The mixed-state formula agrees on pure input.
    CHECK(qfi_mixed(ghz(b), s.jz) == doctest::Approx(double(n) * n).epsilon(1e-10));
  }
  for (int n = 0; n <= 6; ++n) {
    const FockBasis fb(default_cutoff(n));
    CHECK(qfi(fock_state(fb, n), build_quadratures(fb).x) ==
          doctest::Approx(4.0 * n + 2.0).epsilon(1e-12));
  }
}

TEST_CASE("maximally mixed state has zero QFI") {
  const DickeBasis b(5);
  const QuantumState mm = QuantumState::mixed(CMatrix::Identity(6, 6) / 6.0, b.tag());
  CHECK(std::abs(qfi(mm, build_spin_operators(b).jx)) < 1e-12);
}

TEST_CASE("mixed QFI matches the Bures-fidelity oracle") {
  const int n = 6;
  const DickeBasis b(n);
  const CMatrix rho = 0.9 * ghz(b).density() + 0.1 * CMatrix::Identity(n + 1, n + 1) / (n + 1.0);
  const QuantumState st = QuantumState::mixed(rho, b.tag());
  const HermitianOperator jz = build_spin_operators(b).jz;
  const double oracle = bures_qfi(st, jz, 1e-4);
  CHECK(qfi(st, jz) == doctest::Approx(oracle).epsilon(1e-5));
  CHECK(qfi(st, jz) < n * n);

  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const BasisTag tag{BasisKind::fock, 3 + trial % 4};
    const QuantumState r = random_mixed_state(rng, tag);
    const HermitianOperator h = random_hermitian(rng, tag, "H");
    CHECK(qfi(r, h) == doctest::Approx(bures_qfi(r, h, 1e-4)).epsilon(1e-5));
  }
}

TEST_CASE("QFI is invariant under shifts of the generator") {
  std::mt19937_64 rng(2);
  const BasisTag tag{BasisKind::fock, 5};
  const QuantumState pure = random_pure_state(rng, tag);
  const QuantumState mixed = random_mixed_state(rng, tag);
  const HermitianOperator h = random_hermitian(rng, tag, "H");
  const HermitianOperator shifted(h.matrix() + 3.7 * CMatrix::Identity(5, 5), "H+c", 1, tag);
  CHECK(qfi(pure, shifted) == doctest::Approx(qfi(pure, h)).epsilon(1e-12));
  CHECK(qfi(mixed, shifted) == doctest::Approx(qfi(mixed, h)).epsilon(1e-12));
}

TEST_CASE("QFI of a mixture never exceeds the average") {
  std::mt19937_64 rng(4);
  const BasisTag tag{BasisKind::fock, 4};
  for (int trial = 0; trial < 20; ++trial) {
    const QuantumState a = random_pure_state(rng, tag);
    const QuantumState c = random_mixed_state(rng, tag);
    const HermitianOperator h = random_hermitian(rng, tag, "H");
    const QuantumState mix = QuantumState::mixed(0.3 * a.density() + 0.7 * c.density(), tag);
    CHECK(qfi(mix, h) <= 0.3 * qfi(a, h) + 0.7 * qfi(c, h) + 1e-10);
  }
}

TEST_CASE("spin QFI matrix and f_max") {
  const int n = 10;
  const DickeBasis b(n);
  const QuantumState css = coherent_spin_state_z(b);
  const Eigen::Matrix3d f = spin_qfi_matrix(css, b);
  CHECK((f - Eigen::Vector3d(n, n, 0).asDiagonal().toDenseMatrix()).cwiseAbs().maxCoeff() < 1e-12);
  const DirectionalFisher d = f_max_density(css, b);
  CHECK(d.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(d.direction[2]) < 1e-12);

  const DirectionalFisher g = f_max_density(ghz(b), b);
  CHECK(g.value == doctest::Approx(n).epsilon(1e-12));
  CHECK(std::abs(std::abs(g.direction[2]) - 1.0) < 1e-12);

  // Quadratic form of the matrix reproduces the directional QFI.
  std::mt19937_64 rng(8);
  const QuantumState twisted = TwistingEvolver(b, TwistingModel::oat).evolve(css, 0.3);
  const Eigen::Matrix3d ft = spin_qfi_matrix(twisted, b);
  const QuantumState noisy = QuantumState::mixed(
      0.8 * twisted.density() + 0.2 * CMatrix::Identity(n + 1, n + 1) / (n + 1.0), b.tag());
  const Eigen::Matrix3d fn = spin_qfi_matrix(noisy, b);
  std::normal_distribution<double> g3;
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d u = Eigen::Vector3d(g3(rng), g3(rng), g3(rng)).normalized();
    CHECK(u.dot(ft * u) == doctest::Approx(qfi(twisted, spin_component(b, u))).epsilon(1e-10));
    CHECK(u.dot(fn * u) == doctest::Approx(qfi(noisy, spin_component(b, u))).epsilon(1e-10));
  }
}

TEST_CASE("f_max is invariant under collective rotations") {
  const int n = 8;
  const DickeBasis b(n);
  const QuantumState twisted =
      TwistingEvolver(b, TwistingModel::oat).evolve(coherent_spin_state_z(b), 0.4);
  const double base = f_max_density(twisted, b).value;
  CHECK(base > 1.0);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector3d axis(g(rng), g(rng), g(rng));
    const QuantumState rot = twisted.transformed(rotation(b, axis, g(rng)));
    CHECK(f_max_density(rot, b).value == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("classical Fisher information") {
  const int n = 12;
  const DickeBasis b(n);
  const SpinOperators s = build_spin_operators(b);
  const QuantumState css = coherent_spin_state_z(b);

  // Rotation about x read out in Jy: the binomial statistics carry N.
  CHECK(classical_fisher(css, s.jx, s.jy, 0.3) == doctest::Approx(n).epsilon(1e-6));
  // An observable commuting with the generator carries nothing.
  CHECK(std::abs(classical_fisher(css, s.jz, s.jz, 0.2)) < 1e-8);

  const QuantumState g = ghz(b);
  const HermitianOperator parity = parity_operator(b);
  for (double theta : {std::numbers::pi / (2 * n), std::numbers::pi / (3 * n)}) {
    CHECK(classical_fisher(g, s.jz, parity, theta) == doctest::Approx(double(n) * n).epsilon(1e-6));
  }

  const ClassicalFisherResult r = classical_fisher_detailed(css, s.jx, s.jy, 0.3);
  CHECK(r.richardson_rel_change < 1e-4);
  CHECK(r.half_step_value == doctest::Approx(r.value).epsilon(1e-6));
}

TEST_CASE("Fisher chain chi^-2 <= F <= F_Q") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> th(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const BasisTag tag{BasisKind::fock, 3 + trial % 5};
    const QuantumState st =
        trial % 3 == 0 ? random_mixed_state(rng, tag) : random_pure_state(rng, tag);
    const HermitianOperator h = random_hermitian(rng, tag, "H");
    const HermitianOperator x = random_hermitian(rng, tag, "X");
    const FisherReport r = fisher_chain(st, h, x, th(rng));
    CHECK(r.chain_holds(1e-6));
    CHECK(r.chi2_inv >= 0.0);
  }

  const int n = 16;
  const DickeBasis b(n);
  const SpinOperators s = build_spin_operators(b);
  const TwistingEvolver ev(b, TwistingModel::oat);
  for (double tau : {0.05, 0.2, 0.7}) {
    const QuantumState st = ev.evolve(coherent_spin_state_z(b), tau);
    const MomentData md = moment_data(st, build_spin_family(b, 1));
    const GeneratorChoice gen = optimize_generator(md, std::vector<std::size_t>{0, 1, 2});
    const RVector m = optimal_measurement(md, gen.n);
    const FisherReport r =
        fisher_chain(st, spin_component(b, gen.n), spin_component(b, m), 0.0);
    CHECK(r.chi2_inv == doctest::Approx(gen.lambda_max).epsilon(1e-8));
    CHECK(r.chain_holds(1e-6));
  }
}

TEST_CASE("shot-noise limits") {
  CHECK(shot_noise_limit_spin(16) == 16.0);
  CHECK(shot_noise_limit_cv() == 2.0);
  CHECK(shot_noise_limit(DickeBasis(7).tag()) == 7.0);
  CHECK(shot_noise_limit(FockBasis(9).tag()) == 2.0);
}

}
