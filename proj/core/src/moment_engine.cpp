#include "nlsq/moment_engine.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "nlsq/metrology_bounds.hpp"

namespace nlsq {

namespace {

constexpr double kDegeneracyRelTol = 1e-9;
constexpr double kUnitNormTol = 1e-8;
constexpr double kColumnFloor = 1e-10;

void require_square_pair(const RMatrix& gamma, const RMatrix& c) {
  if (gamma.rows() != gamma.cols() || c.rows() != c.cols() || gamma.rows() != c.rows()) {
    throw InvalidArgument("covariance and commutator matrices must be square and equal-sized");
  }
  if (gamma.rows() == 0) throw InvalidArgument("empty moment matrices");
}

// Centered, weight-scaled columns (H_k - <H_k>) sqrt(w_i) |psi_i>, stacked
// over pure components; its Gram matrix carries both moment matrices.
struct CenteredColumns {
  CMatrix columns;
  RVector means;
  double imag_residue = 0.0;
};

CenteredColumns centered_columns(const QuantumState& state, const OperatorFamily& family,
                                 const RVector& norms) {
  require_same_basis(state.basis(), family.basis(), "moment evaluation");
  const RVector& w = state.weights();
  const CMatrix& comps = state.components();
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) active.push_back(i);
  }
  const Eigen::Index dim = comps.rows();
  const auto k_count = static_cast<Eigen::Index>(family.size());

  CenteredColumns out;
  out.columns.resize(dim * static_cast<Eigen::Index>(active.size()), k_count);
  out.means.resize(k_count);
  CVector applied(dim);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const CMatrix& h = family[static_cast<std::size_t>(k)].matrix();
    cplx mean = 0.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Eigen::Index i = active[a];
      applied.noalias() = h * comps.col(i);
      mean += w[i] * comps.col(i).dot(applied);
      out.columns.col(k).segment(static_cast<Eigen::Index>(a) * dim, dim) = applied;
    }
    out.means[k] = mean.real();
    const double scale = norms[k] > 0.0 ? norms[k] : 1.0;
    out.imag_residue = std::max(out.imag_residue, std::abs(mean.imag()) / scale);
    for (std::size_t a = 0; a < active.size(); ++a) {
      const Eigen::Index i = active[a];
      auto seg = out.columns.col(k).segment(static_cast<Eigen::Index>(a) * dim, dim);
      seg -= mean.real() * comps.col(i);
      seg *= std::sqrt(w[i]);
    }
  }
  return out;
}

RVector operator_norms(const OperatorFamily& family) {
  RVector norms(static_cast<Eigen::Index>(family.size()));
  for (std::size_t k = 0; k < family.size(); ++k) {
    norms[static_cast<Eigen::Index>(k)] = family[k].norm_bound();
  }
  return norms;
}

double frobenius(const RMatrix& m) { return m.norm(); }

}  // namespace

MomentInputs MomentInputs::leading(std::size_t count) const {
  if (count == 0 || count > size()) throw InvalidArgument("leading block size out of range");
  const auto n = static_cast<Eigen::Index>(count);
  MomentInputs out;
  out.gamma = gamma.topLeftCorner(n, n);
  out.c = c.topLeftCorner(n, n);
  out.scale = scale.head(n);
  if (factor.size() > 0) out.factor = factor.leftCols(n);
  out.integrity = integrity;
  return out;
}

MomentInputs measure_moments(const QuantumState& state, const OperatorFamily& family,
                             const MomentOptions& options) {
  const RVector norms = operator_norms(family);
  const CenteredColumns cols = centered_columns(state, family, norms);
  const CMatrix gram = cols.columns.adjoint() * cols.columns;

  MomentInputs in;
  const RMatrix re = gram.real();
  const RMatrix im = gram.imag();
  in.gamma = 0.5 * (re + re.transpose());
  in.c = im - im.transpose();
  // Column equilibration: unit-norm centered columns, floored relative to
  // the operator norm so rounding-level columns stay below the kernel cut.
  in.scale.resize(norms.size());
  for (Eigen::Index k = 0; k < norms.size(); ++k) {
    const double col = cols.columns.col(k).norm();
    const double floor = kColumnFloor * norms[k];
    const double ref = std::max(col, floor);
    in.scale[k] = ref > 0.0 ? 1.0 / ref : 1.0;
  }
  in.factor.resize(2 * cols.columns.rows(), cols.columns.cols());
  in.factor.topRows(cols.columns.rows()) = cols.columns.real();
  in.factor.bottomRows(cols.columns.rows()) = cols.columns.imag();
  in.integrity.max_imag_residue = cols.imag_residue;
  if (cols.imag_residue > options.imag_residue_tol) {
    std::ostringstream msg;
    msg << "imaginary residue " << cols.imag_residue << " in operator expectation values";
    in.integrity.flags.push_back(msg.str());
  }
  return in;
}

RMatrix covariance_matrix(const QuantumState& state, const OperatorFamily& family) {
  return measure_moments(state, family).gamma;
}

RMatrix commutator_matrix(const QuantumState& state, const OperatorFamily& family) {
  return measure_moments(state, family).c;
}

MomentData moment_matrix(const RMatrix& gamma, const RMatrix& c, const RVector& scale,
                         const MomentOptions& options) {
  require_square_pair(gamma, c);
  const Eigen::Index n = gamma.rows();
  const double gscale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
  const double cscale = std::max(1.0, c.cwiseAbs().maxCoeff());
  if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * gscale) {
    throw InvalidArgument("covariance matrix is not symmetric");
  }
  if ((c + c.transpose()).cwiseAbs().maxCoeff() > 1e-10 * cscale) {
    throw InvalidArgument("commutator matrix is not skew-symmetric");
  }
  RVector s = scale.size() == 0 ? RVector::Ones(n) : scale;
  if (s.size() != n) throw InvalidArgument("scale vector length mismatch");

  MomentData md;
  md.gamma = 0.5 * (gamma + gamma.transpose());
  md.c = 0.5 * (c - c.transpose());
  md.scale = s;

  const RMatrix gs = s.asDiagonal() * md.gamma * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(gs);
  if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  md.gamma_eigs = es.eigenvalues();
  const double lmax = std::max(0.0, md.gamma_eigs.maxCoeff());
  if (md.gamma_eigs.minCoeff() < -1e-10 * std::max(1.0, lmax)) {
    std::ostringstream msg;
    msg << "covariance matrix has negative eigenvalue " << md.gamma_eigs.minCoeff();
    md.integrity.flags.push_back(msg.str());
  }
  const double threshold = options.kernel_rel_tol * lmax;

  const RMatrix cs = s.asDiagonal() * md.c * s.asDiagonal();
  const double cnorm = frobenius(cs);
  RMatrix pinv_scaled = RMatrix::Zero(n, n);
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = es.eigenvectors().col(i);
    if (lmax > 0.0 && md.gamma_eigs[i] > threshold) {
      pinv_scaled.noalias() += (v * v.transpose()) / md.gamma_eigs[i];
      kept.push_back(i);
    } else if (cnorm > 0.0) {
      const double ratio = (cs * v).norm() / cnorm;
      md.integrity.kernel_commutator_ratio = std::max(md.integrity.kernel_commutator_ratio, ratio);
    }
  }
  if (md.integrity.kernel_commutator_ratio > options.robertson_tol) {
    std::ostringstream msg;
    msg << "covariance kernel carries commutator weight (ratio "
        << md.integrity.kernel_commutator_ratio << " > " << options.robertson_tol
        << "); Robertson bound violated";
    md.integrity.flags.push_back(msg.str());
  }
  md.retained_dims.resize(n, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    md.retained_dims.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(kept[i]);
  }
  md.gamma_pinv = s.asDiagonal() * pinv_scaled * s.asDiagonal();
  const RMatrix m = md.c.transpose() * md.gamma_pinv * md.c;
  md.m_matrix = 0.5 * (m + m.transpose());
  return md;
}

namespace {

// Same contract as moment_matrix, evaluated from the factor W with
// gamma = W^T W and c = 2 W^T J W. With the thin SVD W S = U Sigma V^T of
// the equilibrated factor, S C S restricted to the retained subspace gives
// M = S^-1 B^T B S^-1 with B = 2 U_r^T J W S, which needs no division by
// small singular values.
MomentData moment_matrix_factored(const MomentInputs& in, const MomentOptions& options) {
  const Eigen::Index n = in.gamma.rows();
  const RVector& s = in.scale;
  if (in.factor.cols() != n || s.size() != n) throw InvalidArgument("factor shape mismatch");

  MomentData md;
  md.gamma = 0.5 * (in.gamma + in.gamma.transpose());
  md.c = 0.5 * (in.c - in.c.transpose());
  md.scale = s;

  const RMatrix ws = in.factor * s.asDiagonal();
  const Eigen::Index half = ws.rows() / 2;
  RMatrix jws(ws.rows(), n);
  jws.topRows(half) = ws.bottomRows(half);
  jws.bottomRows(half) = -ws.topRows(half);

  Eigen::BDCSVD<RMatrix> svd(ws, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const RVector& sigma = svd.singularValues();
  const RMatrix& v = svd.matrixV();

  // Eigenvalues of S gamma S are sigma^2, padded with zeros; stored ascending.
  md.gamma_eigs = RVector::Zero(n);
  for (Eigen::Index i = 0; i < sigma.size(); ++i) md.gamma_eigs[n - 1 - i] = sigma[i] * sigma[i];
  const double lmax = sigma.size() > 0 ? sigma[0] * sigma[0] : 0.0;
  const double threshold = options.factor_kernel_rel_tol * lmax;

  Eigen::Index rank = 0;
  while (rank < sigma.size() && lmax > 0.0 && sigma[rank] * sigma[rank] > threshold) ++rank;

  const RMatrix cs = s.asDiagonal() * md.c * s.asDiagonal();
  const double cnorm = cs.norm();
  if (cnorm > 0.0) {
    for (Eigen::Index i = rank; i < n; ++i) {
      const double ratio = (cs * v.col(i)).norm() / cnorm;
      md.integrity.kernel_commutator_ratio = std::max(md.integrity.kernel_commutator_ratio, ratio);
    }
  }
  if (md.integrity.kernel_commutator_ratio > options.robertson_tol) {
    std::ostringstream msg;
    msg << "covariance kernel carries commutator weight (ratio "
        << md.integrity.kernel_commutator_ratio << " > " << options.robertson_tol
        << "); Robertson bound violated";
    md.integrity.flags.push_back(msg.str());
  }

  md.retained_dims = v.leftCols(rank);
  const RVector inv_sq = sigma.head(rank).cwiseAbs2().cwiseInverse();
  md.gamma_pinv = s.asDiagonal() * (md.retained_dims * inv_sq.asDiagonal() *
                                    md.retained_dims.transpose()) *
                  s.asDiagonal();
  const RMatrix b = 2.0 * svd.matrixU().leftCols(rank).transpose() * jws;
  const RVector s_inv = s.cwiseInverse();
  const RMatrix m = s_inv.asDiagonal() * (b.transpose() * b) * s_inv.asDiagonal();
  md.m_matrix = 0.5 * (m + m.transpose());
  return md;
}

}  // namespace

MomentData moment_data(const MomentInputs& inputs, const MomentOptions& options) {
  MomentData md = inputs.factor.size() > 0
                      ? moment_matrix_factored(inputs, options)
                      : moment_matrix(inputs.gamma, inputs.c, inputs.scale, options);
  IntegrityReport merged = inputs.integrity;
  merged.merge(md.integrity);
  md.integrity = std::move(merged);
  return md;
}

MomentData moment_data(const QuantumState& state, const OperatorFamily& family,
                       const MomentOptions& options) {
  return moment_data(measure_moments(state, family, options), options);
}

RMatrix principal_submatrix(const RMatrix& matrix, std::span<const std::size_t> slots) {
  const auto n = static_cast<Eigen::Index>(slots.size());
  RMatrix sub(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const auto i = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(a)]);
      const auto j = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(b)]);
      if (i >= matrix.rows() || j >= matrix.cols()) throw InvalidArgument("slot out of range");
      sub(a, b) = matrix(i, j);
    }
  }
  return sub;
}

RVector pad_coefficients(const RVector& slot_coeffs, std::span<const std::size_t> slots,
                         std::size_t family_size) {
  if (static_cast<std::size_t>(slot_coeffs.size()) != slots.size()) {
    throw InvalidArgument("coefficient count does not match generator slots");
  }
  RVector full = RVector::Zero(static_cast<Eigen::Index>(family_size));
  for (std::size_t a = 0; a < slots.size(); ++a) {
    if (slots[a] >= family_size) throw InvalidArgument("slot out of range");
    full[static_cast<Eigen::Index>(slots[a])] += slot_coeffs[static_cast<Eigen::Index>(a)];
  }
  return full;
}

GeneratorChoice optimize_generator(const MomentData& md, std::span<const std::size_t> slots) {
  if (slots.empty()) throw InvalidArgument("optimize_generator needs at least one slot");
  const RMatrix sub = principal_submatrix(md.m_matrix, slots);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(sub);
  const RVector& evals = es.eigenvalues();
  const Eigen::Index n = evals.size();
  const double lmax = evals[n - 1];
  const double tol = kDegeneracyRelTol * std::max(std::abs(lmax), 1e-300);

  Eigen::Index first = n - 1;
  while (first > 0 && lmax - evals[first - 1] <= tol) --first;
  const RMatrix basis = es.eigenvectors().rightCols(n - first);

  RVector best;
  double best_norm = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const RVector coords = basis.row(i).transpose();
    const double norm = coords.norm();
    if (norm > best_norm * (1.0 + 1e-12)) {
      best_norm = norm;
      best = basis * coords;
    }
  }
  best /= best.norm();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(best[i]) > 1e-12) {
      if (best[i] < 0.0) best = -best;
      break;
    }
  }
  return {best, std::max(lmax, 0.0)};
}

RVector optimal_measurement(const MomentData& md, const RVector& n_full) {
  if (n_full.size() != md.c.rows()) throw InvalidArgument("generator vector length mismatch");
  const RVector cn = md.c * n_full;
  const double cnorm = frobenius(md.c);
  if (cnorm == 0.0 || cn.norm() <= 1e-12 * cnorm * n_full.norm()) {
    throw ZeroSensitivity("no accessible observable carries signal for this generator");
  }
  RVector m = md.gamma_pinv * cn;
  const double norm = m.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ZeroSensitivity("commutator signal lies entirely in the covariance kernel");
  }
  return m / norm;
}

SqueezingResult chi2_inverse_opt(const MomentData& md, const RVector& n_coeffs,
                                 std::span<const std::size_t> slots, double f_sn) {
  const double nn = n_coeffs.norm();
  if (!(nn > 0.0)) throw InvalidArgument("generator direction must be nonzero");
  if (std::abs(nn - 1.0) > kUnitNormTol) {
    throw InvalidArgument("generator direction must be a unit vector");
  }
  if (!(f_sn > 0.0)) throw InvalidArgument("shot-noise limit must be positive");

  SqueezingResult r;
  r.integrity = md.integrity;
  r.n_coeffs = n_coeffs;
  r.lambda_max = std::max(0.0, Eigen::SelfAdjointEigenSolver<RMatrix>(
                                   principal_submatrix(md.m_matrix, slots),
                                   Eigen::EigenvaluesOnly)
                                   .eigenvalues()
                                   .maxCoeff());
  const RVector n_full = pad_coefficients(n_coeffs, slots, md.size());
  try {
    r.m_coeffs = optimal_measurement(md, n_full);
  } catch (const ZeroSensitivity&) {
    r.insensitive = true;
    r.chi2_inv = 0.0;
    r.xi2 = std::numeric_limits<double>::infinity();
    r.m_coeffs = RVector::Zero(static_cast<Eigen::Index>(md.size()));
    r.integrity.notes.push_back("generator is insensitive within this operator family");
    return r;
  }
  r.chi2_inv = std::max(0.0, n_full.dot(md.m_matrix * n_full));
  if (!(r.chi2_inv > 0.0)) {
    r.insensitive = true;
    r.xi2 = std::numeric_limits<double>::infinity();
    r.integrity.notes.push_back("generator is insensitive within this operator family");
    return r;
  }
  r.xi2 = xi2_opt(r.chi2_inv, f_sn);
  return r;
}

SqueezingResult chi2_inverse_opt(const QuantumState& state, const OperatorFamily& family,
                                 const RVector& n_coeffs,
                                 std::optional<std::vector<std::size_t>> slots,
                                 std::optional<double> f_sn) {
  const std::vector<std::size_t> s = slots ? *slots : family.linear_slots();
  const MomentData md = moment_data(state, family);
  return chi2_inverse_opt(md, n_coeffs, s, f_sn ? *f_sn : shot_noise_limit(family.basis()));
}

double chi2_error_propagation(const QuantumState& state, const HermitianOperator& generator,
                              const HermitianOperator& observable) {
  require_same_basis(state.basis(), generator.basis(), "chi2_error_propagation");
  require_same_basis(state.basis(), observable.basis(), "chi2_error_propagation");
  const RVector& w = state.weights();
  const CMatrix& comps = state.components();
  // -i <[X, H]> = 2 Im <X psi | H psi>
  double signal = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w[i] == 0.0) continue;
    const CVector xv = observable.matrix() * comps.col(i);
    const CVector hv = generator.matrix() * comps.col(i);
    signal += w[i] * 2.0 * xv.dot(hv).imag();
  }
  const double scale = observable.norm_bound() * generator.norm_bound();
  if (std::abs(signal) <= 1e-12 * scale) {
    throw ZeroSensitivity("observable '" + observable.label() +
                          "' carries no signal for generator '" + generator.label() + "'");
  }
  return state.variance(observable) / (signal * signal);
}

double xi2_opt(double chi2_inv, double f_sn) {
  if (!(chi2_inv > 0.0)) throw InvalidArgument("xi2_opt needs a positive inverse chi^2");
  return f_sn / chi2_inv;
}

SqueezingResult optimized_squeezing(const MomentData& md, std::span<const std::size_t> slots,
                                    double f_sn) {
  const GeneratorChoice gen = optimize_generator(md, slots);
  SqueezingResult r = chi2_inverse_opt(md, gen.n, slots, f_sn);
  r.lambda_max = gen.lambda_max;
  return r;
}

SqueezingResult xi2_spin_order_k(const QuantumState& state, const DickeBasis& basis, int order,
                                 const MomentOptions& options) {
  require_same_basis(state.basis(), basis.tag(), "xi2_spin_order_k");
  const OperatorFamily family = build_spin_family(basis, order);
  const MomentData md = moment_data(state, family, options);
  const std::array<std::size_t, 3> slots = {0, 1, 2};
  return optimized_squeezing(md, slots, shot_noise_limit_spin(basis.n_particles()));
}

namespace {
constexpr double kEntanglementSlack = 1e-9;
}  // namespace

int entanglement_bound(double xi2_inv) {
  if (!(xi2_inv > 0.0) || !std::isfinite(xi2_inv)) return 0;
  // Rounding noise must not push a shot-noise value of exactly 1 over the line.
  const double x = xi2_inv - kEntanglementSlack * std::max(1.0, xi2_inv);
  return std::max(0, static_cast<int>(std::ceil(x)) - 1);
}

}  // namespace nlsq
