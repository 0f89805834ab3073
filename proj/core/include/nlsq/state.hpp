#pragma once

#include <optional>

#include "nlsq/operators.hpp"
#include "nlsq/types.hpp"

namespace nlsq {

/// A pure state vector or a density operator in a tagged basis.
///
/// Mixed states are stored together with their spectral decomposition,
/// so every expectation value can be evaluated as a weighted sum over
/// pure components. Pure states have a single component of weight one.
class QuantumState {
 public:
  static constexpr double kNormTol = 1e-12;
  static constexpr double kPsdTol = 1e-10;

  static QuantumState pure(CVector vector, BasisTag basis);
  static QuantumState mixed(CMatrix density, BasisTag basis);
  /// Rank-1 density operator built from a pure vector.
  static QuantumState mixed_from_pure(const CVector& vector, BasisTag basis);

  [[nodiscard]] bool is_pure() const { return pure_; }
  [[nodiscard]] const BasisTag& basis() const { return basis_; }
  [[nodiscard]] Eigen::Index dim() const { return weights_.size() > 0 ? components_.rows() : 0; }

  /// Pure vector; throws for mixed states.
  [[nodiscard]] const CVector& vector() const;
  /// Density operator (built on demand for pure states).
  [[nodiscard]] CMatrix density() const;

  /// Spectral weights (descending) and the matching orthonormal columns.
  [[nodiscard]] const RVector& weights() const { return weights_; }
  [[nodiscard]] const CMatrix& components() const { return components_; }

  [[nodiscard]] double expectation(const CMatrix& op) const;
  [[nodiscard]] double expectation(const HermitianOperator& op) const;
  [[nodiscard]] double variance(const HermitianOperator& op) const;

  /// Applies a unitary: |psi> -> U|psi>, rho -> U rho U^dagger.
  [[nodiscard]] QuantumState transformed(const CMatrix& unitary) const;

 private:
  QuantumState(bool pure, BasisTag basis, RVector weights, CMatrix components,
               std::optional<CVector> vector);

  bool pure_ = true;
  BasisTag basis_;
  RVector weights_;
  CMatrix components_;
  std::optional<CVector> vector_;
};

/// |<a|b>|^2 for pure states, Tr(rho sigma) otherwise.
double overlap_fidelity(const QuantumState& a, const QuantumState& b);

}  // namespace nlsq
