#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "nlsq_cli/commands.hpp"

namespace nlsq::cli {

namespace {

using nlohmann::ordered_json;

ordered_json to_json(const RMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json to_json(const RVector& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

ordered_json to_json(const IntegrityReport& r) {
  ordered_json j;
  j["flagged"] = r.flagged();
  j["max_imag_residue"] = r.max_imag_residue;
  j["kernel_commutator_ratio"] = r.kernel_commutator_ratio;
  j["notes"] = r.notes;
  return j;
}

std::vector<std::string> labels_of(const OperatorFamily& family) {
  std::vector<std::string> out;
  for (const HermitianOperator& op : family) out.push_back(op.label());
  return out;
}

QuantumState prepare(const DickeBasis& basis, TwistingModel model, double tau) {
  return TwistingEvolver(basis, model).evolve(coherent_spin_state_z(basis), tau);
}

std::optional<Eigen::Vector3d> parse_direction(const std::string& spec) {
  if (spec == "x") return Eigen::Vector3d::UnitX();
  if (spec == "y") return Eigen::Vector3d::UnitY();
  if (spec == "z") return Eigen::Vector3d::UnitZ();
  if (spec.find(',') == std::string::npos) return std::nullopt;
  std::istringstream in(spec);
  Eigen::Vector3d v;
  char sep = 0;
  if (!(in >> v[0] >> sep >> v[1] >> sep >> v[2]) || !in.eof() || !(v.norm() > 0.0)) {
    throw UsageError("malformed direction '" + spec + "' (expected x, y, z or a,b,c)");
  }
  return v.normalized();
}

std::string direction_label(const Eigen::Vector3d& v) {
  std::ostringstream out;
  out << "J(" << format_number(v[0]) << ',' << format_number(v[1]) << ',' << format_number(v[2])
      << ')';
  return out.str();
}

double family_chi2_inv(const FockBasis& basis, int n, int order, const RVector& dir,
                       IntegrityReport* integrity, RVector* m_out) {
  const OperatorFamily family =
      order == 3 ? build_cv_third_order_family(basis) : build_cv_second_order_family(basis);
  const MomentData md = moment_data(fock_state(basis, n), family);
  const std::array<std::size_t, 2> slots = {0, 1};
  const SqueezingResult r = chi2_inverse_opt(md, dir, slots, shot_noise_limit_cv());
  if (integrity != nullptr) integrity->merge(r.integrity);
  if (m_out != nullptr) *m_out = r.m_coeffs;
  return r.chi2_inv;
}

}  // namespace

FockReport run_fock(const FockConfig& config) {
  if (config.n < 0) throw UsageError("--n must be >= 0 for Fock states");
  if (config.order != 2 && config.order != 3) throw UsageError("--order must be 2 or 3");
  const int minimum = minimum_exact_cutoff(config.n, config.order);
  const int cutoff = config.cutoff.value_or(std::max(default_cutoff(config.n), minimum));
  if (cutoff < minimum) {
    throw UsageError("cutoff " + std::to_string(cutoff) + " is below " + std::to_string(minimum) +
                     ": the order-" + std::to_string(config.order) +
                     " family is not exact on |" + std::to_string(config.n) +
                     "> and the result would not converge");
  }
  const QuadratureDirection dir = QuadratureDirection::from_phase(config.phi);
  FockReport rep;
  rep.n = config.n;
  rep.order = config.order;
  rep.cutoff = cutoff;
  rep.direction = dir.vector();
  const FockBasis basis(cutoff);
  rep.labels = labels_of(config.order == 3 ? build_cv_third_order_family(basis)
                                           : build_cv_second_order_family(basis));
  rep.chi2_inv =
      family_chi2_inv(basis, config.n, config.order, dir.vector(), &rep.integrity, &rep.m_coeffs);
  rep.xi2 = rep.chi2_inv > 0.0 ? xi2_opt(rep.chi2_inv, shot_noise_limit_cv())
                               : std::numeric_limits<double>::infinity();
  rep.chi2_inv_doubled = family_chi2_inv(FockBasis(2 * cutoff), config.n, config.order,
                                         dir.vector(), nullptr, nullptr);
  rep.cutoff_rel_change =
      std::abs(rep.chi2_inv_doubled - rep.chi2_inv) / std::max(std::abs(rep.chi2_inv), 1e-300);
  if (rep.cutoff_rel_change > 1e-9) {
    std::ostringstream msg;
    msg << "chi2_inv changes by " << rep.cutoff_rel_change << " (relative) when the cutoff is "
        << "doubled; raise --cutoff";
    warn(msg.str());
  }
  return rep;
}

void write_fock(std::ostream& out, const FockReport& r, OutputFormat format) {
  if (format == OutputFormat::json) {
    ordered_json j;
    j["n"] = r.n;
    j["order"] = r.order;
    j["cutoff"] = r.cutoff;
    j["direction"] = {r.direction[0], r.direction[1]};
    j["chi2_inv"] = r.chi2_inv;
    j["xi2"] = r.xi2;
    j["labels"] = r.labels;
    j["m_opt"] = to_json(r.m_coeffs);
    j["chi2_inv_doubled_cutoff"] = r.chi2_inv_doubled;
    j["cutoff_rel_change"] = r.cutoff_rel_change;
    j["integrity"] = to_json(r.integrity);
    out << j.dump(2) << '\n';
    return;
  }
  if (format != OutputFormat::text) throw UsageError("fock writes text or json");
  out << "fock N=" << r.n << " order=" << r.order << " cutoff=" << r.cutoff << '\n';
  out << "direction " << format_number(r.direction[0]) << ' ' << format_number(r.direction[1])
      << '\n';
  out << "chi2_inv " << format_number(r.chi2_inv) << '\n';
  out << "xi2 " << format_number(r.xi2) << '\n';
  out << "m_opt";
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    out << ' ' << r.labels[i] << '=' << format_number(r.m_coeffs[static_cast<Eigen::Index>(i)]);
  }
  out << '\n';
  out << "cutoff_check cutoff=" << 2 * r.cutoff << " chi2_inv=" << format_number(r.chi2_inv_doubled)
      << " rel_change=" << format_number(r.cutoff_rel_change) << '\n';
}

AnalyzeReport run_analyze(const AnalyzeConfig& config) {
  if (config.n_particles < 1) throw UsageError("--n must be >= 1");
  if (config.order < 1 || config.order > 6) throw UsageError("--kmax must be in 1..6");
  if (!std::isfinite(config.tau)) throw UsageError("--tau must be finite");
  const DickeBasis basis(config.n_particles);
  const OperatorFamily family = build_spin_family(basis, config.order);
  AnalyzeReport rep;
  rep.config = config;
  rep.labels = labels_of(family);
  rep.moments = moment_data(prepare(basis, config.model, config.tau), family);
  const std::array<std::size_t, 3> slots = {0, 1, 2};
  rep.m_tilde = principal_submatrix(rep.moments.m_matrix, slots);
  const SqueezingResult r =
      optimized_squeezing(rep.moments, slots, shot_noise_limit_spin(config.n_particles));
  rep.lambda_max = r.lambda_max;
  rep.n_opt = r.n_coeffs;
  rep.m_opt = r.m_coeffs;
  rep.xi2_inv = r.xi2_inv();
  rep.moments.integrity.merge(r.integrity);
  return rep;
}

std::string analyze_json(const AnalyzeReport& r) {
  ordered_json j;
  j["model"] = to_string(r.config.model);
  j["n"] = r.config.n_particles;
  j["tau"] = r.config.tau;
  j["kmax"] = r.config.order;
  j["labels"] = r.labels;
  j["gamma"] = to_json(r.moments.gamma);
  j["c"] = to_json(r.moments.c);
  j["m"] = to_json(r.moments.m_matrix);
  j["m_tilde"] = to_json(r.m_tilde);
  j["lambda_max"] = r.lambda_max;
  j["n_opt"] = to_json(r.n_opt);
  j["m_opt"] = to_json(r.m_opt);
  j["xi2_inv"] = r.xi2_inv;
  j["retained_rank"] = r.moments.retained_dims.cols();
  j["integrity"] = to_json(r.moments.integrity);
  return j.dump(2) + "\n";
}

EstimateOutcome run_estimate(const EstimateConfig& config) {
  if (config.n_particles < 1) throw UsageError("--n must be >= 1");
  if (config.mu < 1) throw UsageError("--mu must be >= 1");
  if (config.trials < 2) throw UsageError("--trials must be >= 2");
  const DickeBasis basis(config.n_particles);
  const QuantumState state = prepare(basis, config.model, config.tau);

  const OperatorFamily linear = build_spin_family(basis, 1);
  const std::array<std::size_t, 3> slots = {0, 1, 2};
  std::optional<MomentData> md;
  auto moments = [&]() -> const MomentData& {
    if (!md) md = moment_data(state, linear);
    return *md;
  };

  EstimateOutcome out;
  Eigen::Vector3d n;
  if (config.generator == "opt") {
    const RVector g = optimize_generator(moments(), slots).n;
    n = Eigen::Vector3d(g[0], g[1], g[2]);
  } else if (auto d = parse_direction(config.generator)) {
    n = *d;
  } else {
    throw UsageError("unknown generator '" + config.generator + "'");
  }
  const HermitianOperator generator = spin_component(basis, n);
  out.generator_label = direction_label(n);

  std::optional<HermitianOperator> observable;
  if (config.observable == "parity") {
    observable.emplace(parity_operator(basis));
    out.observable_label = "P";
  } else if (config.observable == "opt") {
    const RVector m = optimal_measurement(moments(), n);
    const Eigen::Vector3d mv(m[0], m[1], m[2]);
    observable.emplace(spin_component(basis, mv));
    out.observable_label = direction_label(mv);
  } else if (auto d = parse_direction(config.observable)) {
    observable.emplace(spin_component(basis, *d));
    out.observable_label = direction_label(*d);
  } else {
    throw UsageError("unknown observable '" + config.observable + "'");
  }

  EstimatorOptions opts;
  opts.workers = resolve_workers(config.workers);
  opts.window_half_width = config.window;
  out.report = simulate_moment_estimator(state, generator, *observable, config.theta, config.mu,
                                         config.trials, config.seed, opts);
  return out;
}

void write_estimate(std::ostream& out, const EstimateOutcome& o, OutputFormat format) {
  const EstimatorReport& r = o.report;
  if (format == OutputFormat::json) {
    ordered_json j;
    j["generator"] = o.generator_label;
    j["observable"] = o.observable_label;
    j["theta_true"] = r.theta_true;
    j["mu"] = r.mu;
    j["trials"] = r.trials;
    j["chi2"] = r.chi2;
    j["predicted_variance"] = r.predicted_variance;
    j["empirical_variance"] = r.empirical_variance;
    j["ratio"] = r.ratio;
    j["mean_estimate"] = r.mean_estimate;
    j["window_half_width"] = r.window_half_width;
    j["clamped"] = r.clamped;
    j["central_limit_warning"] = r.central_limit_warning;
    out << j.dump(2) << '\n';
    return;
  }
  if (format != OutputFormat::text) throw UsageError("estimate writes text or json");
  out << "generator " << o.generator_label << '\n'
      << "observable " << o.observable_label << '\n'
      << "theta_true " << format_number(r.theta_true) << '\n'
      << "mu " << r.mu << '\n'
      << "trials " << r.trials << '\n'
      << "chi2 " << format_number(r.chi2) << '\n'
      << "predicted_variance " << format_number(r.predicted_variance) << '\n'
      << "empirical_variance " << format_number(r.empirical_variance) << '\n'
      << "ratio " << format_number(r.ratio) << '\n'
      << "mean_estimate " << format_number(r.mean_estimate) << '\n'
      << "window_half_width " << format_number(r.window_half_width) << '\n'
      << "clamped " << r.clamped << '\n';
}

}  // namespace nlsq::cli
