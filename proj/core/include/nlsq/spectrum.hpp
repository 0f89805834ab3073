#pragma once

#include <vector>

#include "nlsq/operators.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

/// Eigendecomposition of a Hermitian operator with degenerate eigenvalues
/// merged into projectors.
struct ObservableSpectrum {
  static constexpr double kClusterTol = 1e-9;

  /// One entry per distinct outcome, ascending.
  std::vector<double> values;
  /// Column range [offsets[i], offsets[i+1]) of `vectors` spans outcome i.
  std::vector<Eigen::Index> offsets;
  /// Orthonormal eigenvectors, grouped by outcome.
  CMatrix vectors;

  [[nodiscard]] std::size_t outcomes() const { return values.size(); }
  /// p(x) = Tr(Pi_x rho) for every outcome.
  [[nodiscard]] std::vector<double> probabilities(const QuantumState& state) const;
};

/// Eigenvalues within `tol * max(1, spread)` of their cluster's first
/// member are treated as one outcome.
ObservableSpectrum observable_spectrum(const HermitianOperator& op,
                                       double tol = ObservableSpectrum::kClusterTol);

/// Hermitian generator diagonalized once, exponentiated per parameter.
class UnitaryPropagator {
 public:
  explicit UnitaryPropagator(const HermitianOperator& generator);
  explicit UnitaryPropagator(const CMatrix& hermitian);

  /// exp(-i t H).
  [[nodiscard]] CMatrix unitary(double t) const;
  /// exp(-i t H) |psi> using two matrix-vector products.
  [[nodiscard]] CVector apply(const CVector& psi, double t) const;
  [[nodiscard]] QuantumState apply(const QuantumState& state, double t) const;

  [[nodiscard]] const RVector& eigenvalues() const { return eigenvalues_; }
  [[nodiscard]] const CMatrix& eigenvectors() const { return eigenvectors_; }

 private:
  RVector eigenvalues_;
  CMatrix eigenvectors_;
};

}  // namespace nlsq
