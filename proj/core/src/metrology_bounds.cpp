#include "nlsq/metrology_bounds.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "nlsq/diagnostics.hpp"
#include "nlsq/moment_engine.hpp"
#include "nlsq/spectrum.hpp"

namespace nlsq {

namespace {

constexpr double kQfiModeFloor = 1e-12;

// 2 sum (l_i - l_j)^2 / (l_i + l_j) Re(<i|A|j><j|B|i>)
double spectral_qfi_entry(const RVector& w, const CMatrix& a, const CMatrix& b) {
  double sum = 0.0;
  const Eigen::Index n = w.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double s = w[i] + w[j];
      if (s <= kQfiModeFloor) continue;
      const double d = w[i] - w[j];
      if (d == 0.0) continue;
      sum += d * d / s * (a(i, j) * b(j, i)).real();
    }
  }
  return 2.0 * sum;
}

QuantumState as_full_rank_decomposition(const QuantumState& state) {
  return state.is_pure() ? QuantumState::mixed_from_pure(state.vector(), state.basis()) : state;
}

}  // namespace

double qfi_pure(const QuantumState& state, const HermitianOperator& generator) {
  if (!state.is_pure()) throw InvalidArgument("qfi_pure needs a pure state");
  return 4.0 * state.variance(generator);
}

double qfi_mixed(const QuantumState& state, const HermitianOperator& generator) {
  require_same_basis(state.basis(), generator.basis(), "qfi_mixed");
  const QuantumState full = as_full_rank_decomposition(state);
  const CMatrix& v = full.components();
  const CMatrix h = v.adjoint() * generator.matrix() * v;
  return spectral_qfi_entry(full.weights(), h, h);
}

double qfi(const QuantumState& state, const HermitianOperator& generator) {
  return state.is_pure() ? qfi_pure(state, generator) : qfi_mixed(state, generator);
}

Eigen::Matrix3d spin_qfi_matrix(const QuantumState& state, const DickeBasis& basis) {
  require_same_basis(state.basis(), basis.tag(), "spin_qfi_matrix");
  const SpinOperators s = build_spin_operators(basis);
  Eigen::Matrix3d f;
  if (state.is_pure()) {
    const OperatorFamily fam({s.jx, s.jy, s.jz}, basis.tag());
    f = 4.0 * covariance_matrix(state, fam);
    return f;
  }
  const CMatrix& v = state.components();
  const std::array<CMatrix, 3> rot = {v.adjoint() * s.jx.matrix() * v,
                                      v.adjoint() * s.jy.matrix() * v,
                                      v.adjoint() * s.jz.matrix() * v};
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      f(a, b) = spectral_qfi_entry(state.weights(), rot[a], rot[b]);
      f(b, a) = f(a, b);
    }
  }
  return f;
}

DirectionalFisher f_max_density(const QuantumState& state, const DickeBasis& basis) {
  const Eigen::Matrix3d f = spin_qfi_matrix(state, basis);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(f);
  DirectionalFisher out;
  out.value = std::max(0.0, es.eigenvalues()[2]) / basis.n_particles();
  out.direction = es.eigenvectors().col(2);
  for (int i = 0; i < 3; ++i) {
    if (std::abs(out.direction[i]) > 1e-12) {
      if (out.direction[i] < 0.0) out.direction = -out.direction;
      break;
    }
  }
  return out;
}

namespace {

double fisher_from_probabilities(const std::vector<double>& lo, const std::vector<double>& mid,
                                 const std::vector<double>& hi, double dtheta, double floor) {
  double f = 0.0;
  for (std::size_t x = 0; x < mid.size(); ++x) {
    if (mid[x] < floor) continue;
    const double dp = (hi[x] - lo[x]) / (2.0 * dtheta);
    f += dp * dp / mid[x];
  }
  return f;
}

}  // namespace

ClassicalFisherResult classical_fisher_detailed(const QuantumState& state,
                                                const HermitianOperator& generator,
                                                const HermitianOperator& observable, double theta,
                                                const ClassicalFisherOptions& options) {
  require_same_basis(state.basis(), generator.basis(), "classical_fisher");
  require_same_basis(state.basis(), observable.basis(), "classical_fisher");
  if (!(options.dtheta > 0.0)) throw InvalidArgument("classical_fisher needs dtheta > 0");

  const ObservableSpectrum spec = observable_spectrum(observable, options.cluster_tol);
  const UnitaryPropagator prop(generator);
  auto probs = [&](double t) { return spec.probabilities(prop.apply(state, t)); };

  const std::vector<double> mid = probs(theta);
  const double h = options.dtheta;
  ClassicalFisherResult r;
  r.value = fisher_from_probabilities(probs(theta - h), mid, probs(theta + h), h,
                                      options.probability_floor);
  r.half_step_value = fisher_from_probabilities(probs(theta - 0.5 * h), mid,
                                                probs(theta + 0.5 * h), 0.5 * h,
                                                options.probability_floor);
  const double denom = std::max(std::abs(r.value), 1e-300);
  r.richardson_rel_change = std::abs(r.half_step_value - r.value) / denom;
  if (r.value > 0.0 && r.richardson_rel_change > options.richardson_tol) {
    std::ostringstream msg;
    msg << "classical Fisher information not converged in the finite-difference step (relative "
           "change "
        << r.richardson_rel_change << " on halving dtheta=" << h << ")";
    warn(msg.str());
  }
  return r;
}

double classical_fisher(const QuantumState& state, const HermitianOperator& generator,
                        const HermitianOperator& observable, double theta, double dtheta) {
  ClassicalFisherOptions opts;
  opts.dtheta = dtheta;
  return classical_fisher_detailed(state, generator, observable, theta, opts).value;
}

double shot_noise_limit_spin(int n_particles) {
  if (n_particles < 1) throw InvalidArgument("shot-noise limit needs N >= 1");
  return static_cast<double>(n_particles);
}

double shot_noise_limit_cv() { return 2.0; }

double shot_noise_limit(const BasisTag& basis) {
  return basis.kind == BasisKind::dicke ? shot_noise_limit_spin(basis.size)
                                        : shot_noise_limit_cv();
}

bool FisherReport::chain_holds(double rel_slack) const {
  return chi2_inv <= classical_fisher + rel_slack * qfi &&
         classical_fisher <= qfi * (1.0 + rel_slack);
}

FisherReport fisher_chain(const QuantumState& state, const HermitianOperator& generator,
                          const HermitianOperator& observable, double theta,
                          const ClassicalFisherOptions& options) {
  FisherReport r;
  const QuantumState rotated = UnitaryPropagator(generator).apply(state, theta);
  try {
    r.chi2_inv = 1.0 / chi2_error_propagation(rotated, generator, observable);
  } catch (const ZeroSensitivity&) {
    r.chi2_inv = 0.0;
  }
  r.classical_fisher =
      classical_fisher_detailed(state, generator, observable, theta, options).value;
  r.qfi = qfi(state, generator);
  return r;
}

}  // namespace nlsq
