#include <doctest.h>

#include <array>
#include <cmath>

#include <nlsq/spin_algebra.hpp>

#include "support/random_states.hpp"

using namespace nlsq;
using nlsq::testing::max_abs;

TEST_SUITE("spin_algebra") {

TEST_CASE("single spin-1/2 is Pauli/2") {
  const SpinOperators s = build_spin_operators(DickeBasis(1));
  CHECK(s.jz.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(s.jz.matrix()(1, 1).real() == doctest::Approx(-0.5));
  CHECK(s.jx.matrix()(0, 1).real() == doctest::Approx(0.5));
  CHECK(s.jx.matrix()(1, 0).real() == doctest::Approx(0.5));
  CHECK(std::abs(s.jy.matrix()(0, 1) - cplx(0.0, -0.5)) < 1e-15);
}

TEST_CASE("N = 0 is rejected") { CHECK_THROWS_AS(DickeBasis(0), InvalidArgument); }

TEST_CASE("su(2) commutation relations and Casimir for N <= 40") {
  for (int n = 1; n <= 40; ++n) {
    const DickeBasis b(n);
    const SpinOperators s = build_spin_operators(b);
    const std::array<const CMatrix*, 3> j = {&s.jx.matrix(), &s.jy.matrix(), &s.jz.matrix()};
    const cplx i(0.0, 1.0);
    for (int a = 0; a < 3; ++a) {
      const int bb = (a + 1) % 3;
      const int c = (a + 2) % 3;
      CHECK(max_abs(commutator(*j[a], *j[bb]) - i * (*j[c])) <= 1e-10);
    }
    const CMatrix cas = (*j[0]) * (*j[0]) + (*j[1]) * (*j[1]) + (*j[2]) * (*j[2]);
    CHECK(max_abs(cas - b.j() * (b.j() + 1.0) * CMatrix::Identity(b.dim(), b.dim())) <= 1e-10);
  }
}

TEST_CASE("Jz is diagonal and descending") {
  const DickeBasis b(6);
  const CMatrix jz = build_spin_operators(b).jz.matrix();
  CHECK(max_abs(jz - CMatrix(jz.diagonal().asDiagonal())) == 0.0);
  for (int i = 0; i < b.dim(); ++i) CHECK(jz(i, i).real() == doctest::Approx(3.0 - i));
}

TEST_CASE("symmetric_product of (Jx, Jy) is the half anticommutator") {
  const SpinOperators s = build_spin_operators(DickeBasis(5));
  const std::array<HermitianOperator, 2> xy = {s.jx, s.jy};
  const HermitianOperator p = symmetric_product(xy);
  const CMatrix ref = 0.5 * (s.jx.matrix() * s.jy.matrix() + s.jy.matrix() * s.jx.matrix());
  CHECK(max_abs(p.matrix() - ref) < 1e-13);
  CHECK(p.degree() == 2);
}

TEST_CASE("symmetric_product of one operator is the operator") {
  const SpinOperators s = build_spin_operators(DickeBasis(3));
  const std::array<HermitianOperator, 1> z = {s.jz};
  CHECK(max_abs(symmetric_product(z).matrix() - s.jz.matrix()) == 0.0);
}

TEST_CASE("symmetric_product is invariant under permutation of its inputs") {
  const SpinOperators s = build_spin_operators(DickeBasis(4));
  const std::array<HermitianOperator, 3> a = {s.jx, s.jy, s.jy};
  const std::array<HermitianOperator, 3> b = {s.jy, s.jx, s.jy};
  const std::array<HermitianOperator, 3> c = {s.jy, s.jy, s.jx};
  const CMatrix pa = symmetric_product(a).matrix();
  CHECK(max_abs(pa - symmetric_product(b).matrix()) < 1e-12);
  CHECK(max_abs(pa - symmetric_product(c).matrix()) < 1e-12);
}

TEST_CASE("symmetric_product rejects mixed bases") {
  const SpinOperators a = build_spin_operators(DickeBasis(2));
  const SpinOperators b = build_spin_operators(DickeBasis(3));
  const std::array<HermitianOperator, 2> ops = {a.jx, b.jx};
  CHECK_THROWS_AS(symmetric_product(ops), InvalidArgument);
}

TEST_CASE("family sizes follow the monomial count") {
  const DickeBasis b(4);
  CHECK(build_spin_family(b, 1).size() == 3);
  CHECK(build_spin_family(b, 2).size() == 9);
  CHECK(build_spin_family(b, 3).size() == 19);
  CHECK(spin_family_size(5) == 55);
  CHECK_THROWS_AS(build_spin_family(b, 0), InvalidArgument);
}

TEST_CASE("family starts with Jx, Jy, Jz and is a prefix extension") {
  const DickeBasis b(7);
  const SpinOperators s = build_spin_operators(b);
  const OperatorFamily f3 = build_spin_family(b, 3);
  const OperatorFamily f4 = build_spin_family(b, 4);
  CHECK(max_abs(f4[0].matrix() - s.jx.matrix()) == 0.0);
  CHECK(max_abs(f4[1].matrix() - s.jy.matrix()) == 0.0);
  CHECK(max_abs(f4[2].matrix() - s.jz.matrix()) == 0.0);
  for (std::size_t k = 0; k < f3.size(); ++k) {
    CHECK(max_abs(f3[k].matrix() - f4[k].matrix()) == 0.0);
    CHECK(f3[k].label() == f4[k].label());
  }
  CHECK(f4.monomial_index().size() == f4.size());
  CHECK(f4.linear_slots() == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("family members equal the generic ordering average") {
  // Independent route: average over all d! orderings of the factor list.
  const DickeBasis b(5);
  const SpinOperators s = build_spin_operators(b);
  const OperatorFamily fam = build_spin_family(b, 4);
  for (const auto& [deg, pos] : fam.monomial_index()) {
    std::vector<HermitianOperator> factors;
    for (int i = 0; i < deg.x; ++i) factors.push_back(s.jx);
    for (int i = 0; i < deg.y; ++i) factors.push_back(s.jy);
    for (int i = 0; i < deg.z; ++i) factors.push_back(s.jz);
    const HermitianOperator ref = symmetric_product(factors);
    const double scale = std::max(1.0, max_abs(ref.matrix()));
    CHECK(max_abs(fam[pos].matrix() - ref.matrix()) <= 1e-12 * scale);
    CHECK(fam[pos].degree() == deg.total());
  }
}

TEST_CASE("quadratic family holds Jx^2, Jy^2 and Jz^2") {
  const DickeBasis b(3);
  const SpinOperators s = build_spin_operators(b);
  const OperatorFamily fam = build_spin_family(b, 2);
  const auto& idx = fam.monomial_index();
  CHECK(max_abs(fam[idx.at({2, 0, 0})].matrix() - s.jx.matrix() * s.jx.matrix()) < 1e-13);
  CHECK(max_abs(fam[idx.at({0, 2, 0})].matrix() - s.jy.matrix() * s.jy.matrix()) < 1e-13);
  CHECK(max_abs(fam[idx.at({0, 0, 2})].matrix() - s.jz.matrix() * s.jz.matrix()) < 1e-13);
}

TEST_CASE("parity operator") {
  SUBCASE("involution") {
    for (int n = 1; n <= 12; ++n) {
      const DickeBasis b(n);
      const CMatrix p = parity_operator(b).matrix();
      CHECK(max_abs(p * p - CMatrix::Identity(b.dim(), b.dim())) < 1e-12);
    }
  }
  SUBCASE("N=1 has eigenvalues +1 and -1") {
    const CMatrix p = parity_operator(DickeBasis(1)).matrix();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
    CHECK(es.eigenvalues()[0] == doctest::Approx(-1.0));
    CHECK(es.eigenvalues()[1] == doctest::Approx(1.0));
  }
  SUBCASE("N=2 trace from the Jx spectrum matches the matrix trace") {
    const DickeBasis b(2);
    // J=1, m_x in {1, 0, -1}: (-1)^(J - m_x) = {+1, -1, +1}.
    CHECK(parity_operator(b).matrix().trace().real() == doctest::Approx(1.0));
  }
  SUBCASE("equals the all-qubit spin flip on the symmetric subspace") {
    // (-1)^((1 - sigma_x)/2) = sigma_x per qubit, so P maps |j, m> to |j, -m>.
    for (int n = 1; n <= 10; ++n) {
      const DickeBasis b(n);
      const CMatrix flip = CMatrix::Identity(b.dim(), b.dim()).rowwise().reverse();
      CHECK(max_abs(parity_operator(b).matrix() - flip) < 1e-12);
    }
  }
}

TEST_CASE("every family member is Hermitian to 1e-12") {
  const OperatorFamily fam = build_spin_family(DickeBasis(20), 5);
  for (const auto& op : fam) {
    CHECK(max_abs(op.matrix() - op.matrix().adjoint()) <= HermitianOperator::kHermiticityTol);
  }
}

TEST_CASE("non-Hermitian matrices are rejected") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianOperator(m, "bad", 0, BasisTag{BasisKind::dicke, 1}), InvalidArgument);
}

}
