#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <mutex>
#include <optional>
#include <thread>

#include <json.hpp>

#include "nlsq_cli/commands.hpp"

namespace nlsq::cli {

namespace {

constexpr std::size_t kSpinSlots[] = {0, 1, 2};

SweepRecord evaluate_point(const QuantumState& state, const DickeBasis& basis,
                           const MomentInputs& inputs_kmax, const SweepConfig& config,
                           const HermitianOperator* parity, const HermitianOperator* jz) {
  SweepRecord rec;
  const double n = shot_noise_limit_spin(basis.n_particles());
  double best = 0.0;
  rec.integrity.merge(inputs_kmax.integrity);
  for (int k = 1; k <= config.k_max; ++k) {
    const MomentData md = moment_data(inputs_kmax.leading(spin_family_size(k)));
    const SqueezingResult r = optimized_squeezing(md, kSpinSlots, n);
    rec.xi2_inv_by_k.push_back(r.xi2_inv());
    rec.n_opt_by_k.emplace_back(r.n_coeffs[0], r.n_coeffs[1], r.n_coeffs[2]);
    rec.integrity.merge(md.integrity);
    best = std::max(best, r.xi2_inv());
  }
  if (parity != nullptr) {
    double v = 0.0;
    try {
      v = 1.0 / chi2_error_propagation(state, *jz, *parity) / n;
    } catch (const ZeroSensitivity&) {
    }
    rec.xi2_inv_parity = v;
    best = std::max(best, v);
  }
  if (config.include_qfi) rec.f_max = f_max_density(state, basis).value;
  rec.ent_bound = std::min(entanglement_bound(best), basis.n_particles() - 1);
  return rec;
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  if (name == "text") return OutputFormat::text;
  throw UsageError("unknown format '" + name + "' (expected csv, json or text)");
}

unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NLSQ_WORKERS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) {
      throw UsageError(std::string("NLSQ_WORKERS must be a positive integer, got '") + env + "'");
    }
    return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string format_number(double value) {
  if (value == 0.0) value = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::vector<double> tau_grid(double start, double end, int steps) {
  std::vector<double> grid(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    grid[static_cast<std::size_t>(i)] =
        i == steps - 1 ? end : start + (end - start) * i / (steps - 1);
  }
  return grid;
}

void validate(const SweepConfig& c) {
  if (c.n_particles < 1) throw UsageError("--n must be >= 1");
  if (c.k_max < 1 || c.k_max > 6) throw UsageError("--kmax must be in 1..6");
  if (c.steps < 2) throw UsageError("--steps must be >= 2");
  if (!std::isfinite(c.tau_start) || !std::isfinite(c.tau_end) || !(c.tau_start < c.tau_end)) {
    throw UsageError("need finite --tau-start < --tau-end");
  }
  if (c.format == OutputFormat::text) throw UsageError("sweep writes csv or json");
}

SweepResult run_sweep(const SweepConfig& config) {
  validate(config);
  if (config.model == TwistingModel::oat && config.n_particles % 2 != 0) {
    warn("odd N under one-axis twisting: the GHZ point at tau=pi/2 and the revival at tau=pi "
         "only occur for even N");
  }
  const DickeBasis basis(config.n_particles);
  const TwistingEvolver evolver(basis, config.model);
  const OperatorFamily family = build_spin_family(basis, config.k_max);
  const QuantumState initial = coherent_spin_state_z(basis);
  std::optional<HermitianOperator> parity;
  std::optional<HermitianOperator> jz;
  if (config.include_parity) {
    parity.emplace(parity_operator(basis));
    jz.emplace(build_spin_operators(basis).jz);
  }

  const std::vector<double> grid = tau_grid(config.tau_start, config.tau_end, config.steps);
  SweepResult result;
  result.records.resize(grid.size());

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      try {
        const QuantumState st = evolver.evolve(initial, grid[i]);
        SweepRecord rec = evaluate_point(st, basis, measure_moments(st, family), config,
                                         parity ? &*parity : nullptr, jz ? &*jz : nullptr);
        rec.tau = grid[i];
        result.records[i] = std::move(rec);
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const unsigned workers =
      std::min<unsigned>(resolve_workers(config.workers), static_cast<unsigned>(grid.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (error) std::rethrow_exception(error);
  for (const SweepRecord& r : result.records) result.integrity.merge(r.integrity);
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepConfig& config, const SweepResult& result) {
  out << "tau";
  for (int k = 1; k <= config.k_max; ++k) out << ",xi2inv_k" << k;
  if (config.include_parity) out << ",xi2inv_parity";
  if (config.include_qfi) out << ",f_max";
  out << ",ent_bound\n";
  for (const SweepRecord& r : result.records) {
    out << format_number(r.tau);
    for (double v : r.xi2_inv_by_k) out << ',' << format_number(v);
    if (r.xi2_inv_parity) out << ',' << format_number(*r.xi2_inv_parity);
    if (r.f_max) out << ',' << format_number(*r.f_max);
    out << ',' << r.ent_bound << '\n';
  }
}

void write_sweep_json(std::ostream& out, const SweepConfig& config, const SweepResult& result) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["model"] = to_string(config.model);
  doc["n"] = config.n_particles;
  doc["kmax"] = config.k_max;
  doc["tau_start"] = config.tau_start;
  doc["tau_end"] = config.tau_end;
  doc["steps"] = config.steps;
  ordered_json records = ordered_json::array();
  for (const SweepRecord& r : result.records) {
    ordered_json j;
    j["tau"] = r.tau;
    j["xi2inv_by_k"] = r.xi2_inv_by_k;
    if (r.xi2_inv_parity) j["xi2inv_parity"] = *r.xi2_inv_parity;
    if (r.f_max) j["f_max"] = *r.f_max;
    ordered_json dirs = ordered_json::array();
    for (const Eigen::Vector3d& d : r.n_opt_by_k) dirs.push_back({d.x(), d.y(), d.z()});
    j["n_opt_by_k"] = std::move(dirs);
    j["ent_bound"] = r.ent_bound;
    records.push_back(std::move(j));
  }
  doc["records"] = std::move(records);
  doc["integrity_flagged"] = result.integrity.flagged();
  out << doc.dump(2) << '\n';
}

}  // namespace nlsq::cli
