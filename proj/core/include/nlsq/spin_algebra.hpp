#pragma once

#include <array>

#include "nlsq/operators.hpp"

namespace nlsq {

/// Symmetric subspace of N qubits. Basis index i carries J_z eigenvalue
/// m = j - i, so the ordering is descending in m.
class DickeBasis {
 public:
  explicit DickeBasis(int n_particles);

  [[nodiscard]] int n_particles() const { return n_; }
  [[nodiscard]] int dim() const { return n_ + 1; }
  [[nodiscard]] double j() const { return 0.5 * n_; }
  [[nodiscard]] double m(int index) const { return j() - index; }
  [[nodiscard]] BasisTag tag() const { return {BasisKind::dicke, n_}; }

 private:
  int n_;
};

struct SpinOperators {
  HermitianOperator jx;
  HermitianOperator jy;
  HermitianOperator jz;

  [[nodiscard]] std::array<const HermitianOperator*, 3> components() const {
    return {&jx, &jy, &jz};
  }
};

SpinOperators build_spin_operators(const DickeBasis& basis);

/// Number of monomials with 1 <= d_x + d_y + d_z <= order.
std::size_t spin_family_size(int order);

/// All fully symmetrized monomials in (Jx, Jy, Jz) of total degree 1..order,
/// sorted by total degree, then lexicographically in (d_x, d_y, d_z) with
/// larger exponents of earlier components first. The first three members
/// are Jx, Jy, Jz.
OperatorFamily build_spin_family(const DickeBasis& basis, int order);

/// (-1)^(J - Jx) expressed in the Dicke basis.
HermitianOperator parity_operator(const DickeBasis& basis);

/// n_x Jx + n_y Jy + n_z Jz.
HermitianOperator spin_component(const DickeBasis& basis, const Eigen::Vector3d& direction);

}  // namespace nlsq
