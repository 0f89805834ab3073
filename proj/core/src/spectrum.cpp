#include "nlsq/spectrum.hpp"

#include <Eigen/Eigenvalues>

namespace nlsq {

std::vector<double> ObservableSpectrum::probabilities(const QuantumState& state) const {
  if (state.dim() != vectors.rows()) throw InvalidArgument("probabilities: dimension mismatch");
  // Amplitudes of every pure component on every eigenvector.
  const CMatrix amps = vectors.adjoint() * state.components();
  const RVector& w = state.weights();
  std::vector<double> p(values.size(), 0.0);
  for (std::size_t x = 0; x < values.size(); ++x) {
    double sum = 0.0;
    for (Eigen::Index r = offsets[x]; r < offsets[x + 1]; ++r) {
      for (Eigen::Index i = 0; i < w.size(); ++i) sum += w[i] * std::norm(amps(r, i));
    }
    p[x] = sum;
  }
  return p;
}

ObservableSpectrum observable_spectrum(const HermitianOperator& op, double tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
  const RVector& evals = es.eigenvalues();
  const double scale = std::max(1.0, evals.cwiseAbs().maxCoeff());
  const double abs_tol = tol * scale;

  ObservableSpectrum spec;
  spec.vectors = es.eigenvectors();
  Eigen::Index start = 0;
  const Eigen::Index n = evals.size();
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && evals[end] - evals[start] <= abs_tol) ++end;
    spec.values.push_back(evals.segment(start, end - start).mean());
    spec.offsets.push_back(start);
    start = end;
  }
  spec.offsets.push_back(n);
  return spec;
}

UnitaryPropagator::UnitaryPropagator(const HermitianOperator& generator)
    : UnitaryPropagator(generator.matrix()) {}

UnitaryPropagator::UnitaryPropagator(const CMatrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
  if (es.info() != Eigen::Success) throw NumericalError("generator eigendecomposition failed");
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
}

namespace {

CVector phases(const RVector& evals, double t) {
  CVector ph(evals.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) ph[i] = std::polar(1.0, -t * evals[i]);
  return ph;
}

}  // namespace

CMatrix UnitaryPropagator::unitary(double t) const {
  return eigenvectors_ * phases(eigenvalues_, t).asDiagonal() * eigenvectors_.adjoint();
}

CVector UnitaryPropagator::apply(const CVector& psi, double t) const {
  const CVector coeffs = eigenvectors_.adjoint() * psi;
  return eigenvectors_ * phases(eigenvalues_, t).cwiseProduct(coeffs);
}

QuantumState UnitaryPropagator::apply(const QuantumState& state, double t) const {
  if (state.is_pure()) {
    CVector out = apply(state.vector(), t);
    out.normalize();
    return QuantumState::pure(std::move(out), state.basis());
  }
  return state.transformed(unitary(t));
}

}  // namespace nlsq
