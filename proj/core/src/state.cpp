#include "nlsq/state.hpp"

#include <Eigen/Eigenvalues>

namespace nlsq {

QuantumState::QuantumState(bool pure, BasisTag basis, RVector weights, CMatrix components,
                           std::optional<CVector> vector)
    : pure_(pure),
      basis_(basis),
      weights_(std::move(weights)),
      components_(std::move(components)),
      vector_(std::move(vector)) {}

QuantumState QuantumState::pure(CVector vector, BasisTag basis) {
  if (vector.size() != basis.dim()) {
    throw InvalidArgument("state vector length does not match " + to_string(basis));
  }
  const double norm = vector.norm();
  if (std::abs(norm - 1.0) > kNormTol) {
    throw InvalidArgument("state vector is not normalized (norm " + std::to_string(norm) + ")");
  }
  CMatrix comp = vector;
  RVector w = RVector::Ones(1);
  return {true, basis, std::move(w), std::move(comp), std::move(vector)};
}

QuantumState QuantumState::mixed(CMatrix density, BasisTag basis) {
  if (density.rows() != basis.dim() || density.cols() != basis.dim()) {
    throw InvalidArgument("density matrix shape does not match " + to_string(basis));
  }
  if ((density - density.adjoint()).cwiseAbs().maxCoeff() > kNormTol) {
    throw InvalidArgument("density matrix is not Hermitian");
  }
  const double trace = density.trace().real();
  if (std::abs(trace - 1.0) > kNormTol) {
    throw InvalidArgument("density matrix trace is " + std::to_string(trace));
  }
  CMatrix herm = 0.5 * (density + density.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(herm);
  const RVector& evals = es.eigenvalues();
  if (evals.minCoeff() < -kPsdTol) {
    throw InvalidArgument("density matrix has negative eigenvalue " +
                          std::to_string(evals.minCoeff()));
  }
  // Descending order; clip rounding-level negatives to zero.
  const Eigen::Index n = evals.size();
  RVector w(n);
  CMatrix comp(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    w[i] = std::max(0.0, evals[n - 1 - i]);
    comp.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return {false, basis, std::move(w), std::move(comp), std::nullopt};
}

QuantumState QuantumState::mixed_from_pure(const CVector& vector, BasisTag basis) {
  const QuantumState p = pure(vector, basis);
  return mixed(p.density(), basis);
}

const CVector& QuantumState::vector() const {
  if (!vector_) throw InvalidArgument("state is mixed; no state vector");
  return *vector_;
}

CMatrix QuantumState::density() const {
  if (vector_) return (*vector_) * vector_->adjoint();
  return components_ * weights_.cast<cplx>().asDiagonal() * components_.adjoint();
}

double QuantumState::expectation(const CMatrix& op) const {
  if (op.rows() != components_.rows()) throw InvalidArgument("operator dimension mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    sum += weights_[i] * components_.col(i).dot(op * components_.col(i)).real();
  }
  return sum;
}

double QuantumState::expectation(const HermitianOperator& op) const {
  require_same_basis(op.basis(), basis_, "expectation");
  return expectation(op.matrix());
}

double QuantumState::variance(const HermitianOperator& op) const {
  require_same_basis(op.basis(), basis_, "variance");
  const double mean = expectation(op);
  double var = 0.0;
  const CMatrix shifted =
      op.matrix() - mean * CMatrix::Identity(op.dim(), op.dim());
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    var += weights_[i] * (shifted * components_.col(i)).squaredNorm();
  }
  return var;
}

QuantumState QuantumState::transformed(const CMatrix& unitary) const {
  if (pure_) {
    CVector v = unitary * vector();
    v.normalize();
    return pure(std::move(v), basis_);
  }
  CMatrix comp = unitary * components_;
  return {false, basis_, weights_, std::move(comp), std::nullopt};
}

double overlap_fidelity(const QuantumState& a, const QuantumState& b) {
  require_same_basis(a.basis(), b.basis(), "overlap_fidelity");
  if (a.is_pure() && b.is_pure()) return std::norm(a.vector().dot(b.vector()));
  return (a.density() * b.density()).trace().real();
}

}  // namespace nlsq
