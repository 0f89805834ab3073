#pragma once

#include "nlsq/operators.hpp"
#include "nlsq/spin_algebra.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

/// 4 (Delta H)^2.
double qfi_pure(const QuantumState& state, const HermitianOperator& generator);

/// 2 sum_{ij} (l_i - l_j)^2 / (l_i + l_j) |<i|H|j>|^2 over pairs with
/// l_i + l_j above 1e-12.
double qfi_mixed(const QuantumState& state, const HermitianOperator& generator);

/// Dispatches on the state kind.
double qfi(const QuantumState& state, const HermitianOperator& generator);

/// 3x3 quantum Fisher matrix of (Jx, Jy, Jz).
Eigen::Matrix3d spin_qfi_matrix(const QuantumState& state, const DickeBasis& basis);

struct DirectionalFisher {
  double value = 0.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
};

/// max_n F_Q[rho, J_n] / N and the maximizing unit direction.
DirectionalFisher f_max_density(const QuantumState& state, const DickeBasis& basis);

struct ClassicalFisherOptions {
  double dtheta = 1e-5;
  double cluster_tol = 1e-9;
  double probability_floor = 1e-12;
  /// Relative change tolerated when the step is halved before warning.
  double richardson_tol = 1e-4;
};

struct ClassicalFisherResult {
  double value = 0.0;
  double half_step_value = 0.0;
  double richardson_rel_change = 0.0;
};

ClassicalFisherResult classical_fisher_detailed(const QuantumState& state,
                                                const HermitianOperator& generator,
                                                const HermitianOperator& observable, double theta,
                                                const ClassicalFisherOptions& options = {});

/// Fisher information of the counting statistics of `observable` at theta,
/// by central finite differences of p(x|theta).
double classical_fisher(const QuantumState& state, const HermitianOperator& generator,
                        const HermitianOperator& observable, double theta, double dtheta = 1e-5);

/// N for N qubits, 2 for a single bosonic mode.
double shot_noise_limit(const BasisTag& basis);
double shot_noise_limit_spin(int n_particles);
double shot_noise_limit_cv();

struct FisherReport {
  double chi2_inv = 0.0;
  double classical_fisher = 0.0;
  double qfi = 0.0;

  /// chi2_inv <= F + slack * F_Q <= F_Q (1 + slack).
  [[nodiscard]] bool chain_holds(double rel_slack = 1e-8) const;
};

/// All three quantities for the state rotated to theta.
FisherReport fisher_chain(const QuantumState& state, const HermitianOperator& generator,
                          const HermitianOperator& observable, double theta = 0.0,
                          const ClassicalFisherOptions& options = {});

}  // namespace nlsq
