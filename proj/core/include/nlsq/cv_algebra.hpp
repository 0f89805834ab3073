#pragma once

#include "nlsq/operators.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

/// Single bosonic mode truncated to |0>, ..., |D-1>.
class FockBasis {
 public:
  explicit FockBasis(int cutoff);

  [[nodiscard]] int cutoff() const { return cutoff_; }
  [[nodiscard]] int dim() const { return cutoff_; }
  [[nodiscard]] BasisTag tag() const { return {BasisKind::fock, cutoff_}; }

 private:
  int cutoff_;
};

/// Direction (n1, n2) of the quadrature q_n = n1 x + n2 p.
class QuadratureDirection {
 public:
  QuadratureDirection(double n1, double n2);
  /// n1 = sin(phi), n2 = -cos(phi).
  static QuadratureDirection from_phase(double phi);

  [[nodiscard]] double n1() const { return n1_; }
  [[nodiscard]] double n2() const { return n2_; }
  [[nodiscard]] Eigen::Vector2d vector() const { return {n1_, n2_}; }

 private:
  double n1_;
  double n2_;
};

struct Quadratures {
  HermitianOperator x;
  HermitianOperator p;
};

Quadratures build_quadratures(const FockBasis& basis);

/// (x, p, x^2, (xp+px)/2, p^2).
OperatorFamily build_cv_second_order_family(const FockBasis& basis);

/// (x, p, x^3, (px^2+xpx+x^2p)/3, (xp^2+pxp+p^2x)/3, p^3).
OperatorFamily build_cv_third_order_family(const FockBasis& basis);

HermitianOperator quadrature(const FockBasis& basis, const QuadratureDirection& direction);

QuantumState fock_state(const FockBasis& basis, int n);

struct CoherentStateResult {
  QuantumState state;
  /// 1 - (norm of the truncated amplitudes)^2 before renormalization.
  double truncation_loss;
};

/// Truncated coherent state |alpha>, renormalized after truncation.
/// Warns when the truncation loss exceeds 1e-10.
CoherentStateResult coherent_state(const FockBasis& basis, cplx alpha);

/// Smallest cutoff for which the order-3 family acts exactly on |n>.
int minimum_exact_cutoff(int n, int order);

/// Cutoff used when none is given: n + 8.
int default_cutoff(int n);

}  // namespace nlsq
