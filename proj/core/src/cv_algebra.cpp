#include "nlsq/cv_algebra.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "nlsq/diagnostics.hpp"

namespace nlsq {

FockBasis::FockBasis(int cutoff) : cutoff_(cutoff) {
  if (cutoff < 2) throw InvalidArgument("Fock cutoff must be >= 2");
}

QuadratureDirection::QuadratureDirection(double n1, double n2) : n1_(n1), n2_(n2) {
  if (std::abs(n1 * n1 + n2 * n2 - 1.0) > 1e-12) {
    throw InvalidArgument("quadrature direction must be a unit vector");
  }
}

QuadratureDirection QuadratureDirection::from_phase(double phi) {
  const double n1 = std::sin(phi);
  const double n2 = -std::cos(phi);
  const double norm = std::hypot(n1, n2);
  return {n1 / norm, n2 / norm};
}

Quadratures build_quadratures(const FockBasis& basis) {
  const int dim = basis.dim();
  CMatrix a = CMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  const CMatrix ad = a.adjoint();
  const double s = 1.0 / std::sqrt(2.0);
  CMatrix x = s * (a + ad);
  CMatrix p = cplx(0.0, s) * (ad - a);
  return {HermitianOperator(std::move(x), "x", 1, basis.tag()),
          HermitianOperator(std::move(p), "p", 1, basis.tag())};
}

OperatorFamily build_cv_second_order_family(const FockBasis& basis) {
  const Quadratures q = build_quadratures(basis);
  std::vector<HermitianOperator> ops = {q.x, q.p};
  const std::array<HermitianOperator, 2> xx = {q.x, q.x};
  const std::array<HermitianOperator, 2> xp = {q.x, q.p};
  const std::array<HermitianOperator, 2> pp = {q.p, q.p};
  ops.push_back(symmetric_product(xx));
  ops.push_back(symmetric_product(xp));
  ops.push_back(symmetric_product(pp));
  return {std::move(ops), basis.tag()};
}

OperatorFamily build_cv_third_order_family(const FockBasis& basis) {
  if (basis.cutoff() < 4) throw InvalidArgument("third-order family needs cutoff >= 4");
  const Quadratures q = build_quadratures(basis);
  std::vector<HermitianOperator> ops = {q.x, q.p};
  const std::array<HermitianOperator, 3> xxx = {q.x, q.x, q.x};
  const std::array<HermitianOperator, 3> xxp = {q.x, q.x, q.p};
  const std::array<HermitianOperator, 3> xpp = {q.x, q.p, q.p};
  const std::array<HermitianOperator, 3> ppp = {q.p, q.p, q.p};
  ops.push_back(symmetric_product(xxx));
  ops.push_back(symmetric_product(xxp));
  ops.push_back(symmetric_product(xpp));
  ops.push_back(symmetric_product(ppp));
  return {std::move(ops), basis.tag()};
}

HermitianOperator quadrature(const FockBasis& basis, const QuadratureDirection& direction) {
  const Quadratures q = build_quadratures(basis);
  CMatrix m = direction.n1() * q.x.matrix() + direction.n2() * q.p.matrix();
  return {std::move(m), "q_n", 1, basis.tag()};
}

QuantumState fock_state(const FockBasis& basis, int n) {
  if (n < 0 || n >= basis.cutoff()) {
    throw InvalidArgument("Fock state |" + std::to_string(n) + "> outside cutoff " +
                          std::to_string(basis.cutoff()));
  }
  CVector v = CVector::Zero(basis.dim());
  v[n] = 1.0;
  return QuantumState::pure(std::move(v), basis.tag());
}

CoherentStateResult coherent_state(const FockBasis& basis, cplx alpha) {
  const double mean_n = std::norm(alpha);
  if (mean_n > basis.cutoff() / 4.0) {
    throw InvalidArgument("|alpha|^2 exceeds cutoff/4; increase the cutoff");
  }
  CVector v(basis.dim());
  // Amplitudes built recursively: c_n = c_{n-1} * alpha / sqrt(n).
  cplx c = std::exp(-0.5 * mean_n);
  for (int n = 0; n < basis.dim(); ++n) {
    if (n > 0) c *= alpha / std::sqrt(static_cast<double>(n));
    v[n] = c;
  }
  const double loss = 1.0 - v.squaredNorm();
  if (loss > 1e-10) {
    std::ostringstream msg;
    msg << "coherent state truncated at D=" << basis.cutoff() << " lost probability " << loss
        << "; renormalized";
    warn(msg.str());
  }
  v.normalize();
  return {QuantumState::pure(std::move(v), basis.tag()), loss};
}

int minimum_exact_cutoff(int n, int order) { return n + order + 1; }

int default_cutoff(int n) { return n + 8; }

}  // namespace nlsq
