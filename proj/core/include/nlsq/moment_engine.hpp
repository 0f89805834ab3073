#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "nlsq/diagnostics.hpp"
#include "nlsq/operators.hpp"
#include "nlsq/spin_algebra.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

struct MomentOptions {
  /// Covariance eigen-directions below kernel_rel_tol * lambda_max are
  /// treated as kernel and excluded from the pseudo-inverse.
  double kernel_rel_tol = 1e-10;
  /// Same cut for the factored route, applied to eigenvalues sigma^2 of
  /// the equilibrated covariance obtained from singular values sigma.
  double factor_kernel_rel_tol = 1e-20;
  /// Kernel directions v with ||C v|| > robertson_tol * ||C|| raise a flag.
  double robertson_tol = 1e-8;
  /// Imaginary parts of expectation values above this (relative to the
  /// operator scale) raise a flag.
  double imag_residue_tol = 1e-10;
};

/// Covariance and commutator matrices of a family in one state.
///
/// When built from a state, `factor` holds the real-stacked centered
/// columns W = [Re; Im] of sqrt(w_i) (H_k - <H_k>)|psi_i>, so that
/// gamma = W^T W and c = 2 W^T J W with J = [[0, I], [-I, 0]]. The moment
/// matrix is then evaluated from an SVD of W rather than an
/// eigendecomposition of gamma, which keeps the retained subspace accurate
/// to machine precision in the singular values.
struct MomentInputs {
  RMatrix gamma;
  RMatrix c;
  RMatrix factor;
  /// Per-operator scale used to equilibrate gamma before thresholding:
  /// the reciprocal centered-column norm sqrt(gamma_kk), floored at 1e-10
  /// times the operator's norm bound.
  RVector scale;
  IntegrityReport integrity;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(gamma.rows()); }
  /// Moments of the first `count` family members.
  [[nodiscard]] MomentInputs leading(std::size_t count) const;
};

struct MomentData {
  RMatrix gamma;
  RMatrix c;
  RMatrix m_matrix;
  /// Generalized inverse of gamma on its retained subspace.
  RMatrix gamma_pinv;
  /// Retained eigen-directions of the equilibrated covariance, as columns.
  RMatrix retained_dims;
  /// All eigenvalues of the equilibrated covariance, ascending.
  RVector gamma_eigs;
  RVector scale;
  IntegrityReport integrity;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(gamma.rows()); }
};

/// Gamma_kl = 1/2 <{H_k, H_l}> - <H_k><H_l>.
RMatrix covariance_matrix(const QuantumState& state, const OperatorFamily& family);

/// C_kl = -i <[H_k, H_l]>.
RMatrix commutator_matrix(const QuantumState& state, const OperatorFamily& family);

MomentInputs measure_moments(const QuantumState& state, const OperatorFamily& family,
                             const MomentOptions& options = {});

/// M = C^T Gamma^+ C with a thresholded spectral pseudo-inverse.
///
/// Gamma is first equilibrated as S Gamma S with S = diag(scale) (identity
/// when `scale` is empty); eigen-directions of the equilibrated matrix below
/// kernel_rel_tol * lambda_max are dropped and Gamma^+ = S (S Gamma S)^+ S.
/// By Robertson's inequality the kernel of Gamma is contained in the kernel
/// of C, so the quadratic forms of M do not depend on the choice of
/// generalized inverse. A kernel direction carrying a commutator column
/// raises an integrity flag.
MomentData moment_matrix(const RMatrix& gamma, const RMatrix& c, const RVector& scale = {},
                         const MomentOptions& options = {});

MomentData moment_data(const MomentInputs& inputs, const MomentOptions& options = {});
MomentData moment_data(const QuantumState& state, const OperatorFamily& family,
                       const MomentOptions& options = {});

RMatrix principal_submatrix(const RMatrix& matrix, std::span<const std::size_t> slots);

/// Embeds slot coefficients into a full-length family vector.
RVector pad_coefficients(const RVector& slot_coeffs, std::span<const std::size_t> slots,
                         std::size_t family_size);

struct GeneratorChoice {
  /// Unit vector over the generator slots.
  RVector n;
  double lambda_max = 0.0;
};

/// Top eigenpair of the principal submatrix of M on `slots`.
///
/// Degenerate top eigenspaces (relative gap below 1e-9) are resolved by
/// projecting the slot unit vectors onto the eigenspace and keeping the
/// smallest index with the largest projection. The sign is fixed so the
/// first nonzero coefficient is positive.
GeneratorChoice optimize_generator(const MomentData& md, std::span<const std::size_t> slots);

/// Unit vector along Gamma^+ C n. Throws ZeroSensitivity when Gamma^+ C n
/// vanishes.
RVector optimal_measurement(const MomentData& md, const RVector& n_full);

struct SqueezingResult {
  /// Optimized inverse squeezing parameter n^T M n.
  double chi2_inv = 0.0;
  /// F_SN / chi2_inv (infinite when chi2_inv is zero).
  double xi2 = 0.0;
  RVector m_coeffs;
  /// Generator direction over the generator slots.
  RVector n_coeffs;
  double lambda_max = 0.0;
  /// Set when no accessible observable carries signal for the generator.
  bool insensitive = false;
  IntegrityReport integrity;

  [[nodiscard]] double xi2_inv() const { return insensitive ? 0.0 : 1.0 / xi2; }
};

/// Optimized inverse squeezing parameter for a fixed generator direction.
/// `slots` defaults to the degree-1 members of the family; `f_sn` defaults
/// to the shot-noise limit of the family's basis.
SqueezingResult chi2_inverse_opt(const MomentData& md, const RVector& n_coeffs,
                                 std::span<const std::size_t> slots, double f_sn);
SqueezingResult chi2_inverse_opt(const QuantumState& state, const OperatorFamily& family,
                                 const RVector& n_coeffs,
                                 std::optional<std::vector<std::size_t>> slots = std::nullopt,
                                 std::optional<double> f_sn = std::nullopt);

/// chi^2 = Var(X) / |<[X, H]>|^2. Throws ZeroSensitivity when the
/// commutator expectation vanishes.
double chi2_error_propagation(const QuantumState& state, const HermitianOperator& generator,
                              const HermitianOperator& observable);

/// xi^2 = F_SN / chi2_inv.
double xi2_opt(double chi2_inv, double f_sn);

/// Generator and measurement jointly optimized over `slots`:
/// xi^2 = f_sn / lambda_max of the principal submatrix.
SqueezingResult optimized_squeezing(const MomentData& md, std::span<const std::size_t> slots,
                                    double f_sn);

/// xi^2_(K) = N / lambda_max(M~[rho, J^(K)]).
SqueezingResult xi2_spin_order_k(const QuantumState& state, const DickeBasis& basis, int order,
                                 const MomentOptions& options = {});

/// Largest integer k with xi2_inv > k (0 when none). Values within 1e-9
/// relative above an integer count as that integer.
int entanglement_bound(double xi2_inv);

}  // namespace nlsq
