#pragma once

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlsq/nlsq.hpp>

namespace nlsq::cli {

/// Bad command-line or config input. Maps to exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIntegrity = 2;

enum class OutputFormat { csv, json, text };

OutputFormat parse_format(const std::string& name);

/// --workers if positive, else NLSQ_WORKERS, else the hardware concurrency.
unsigned resolve_workers(unsigned requested);

/// %.12g, with negative zero printed as 0.
std::string format_number(double value);

/// Uniform grid including both endpoints.
std::vector<double> tau_grid(double start, double end, int steps);

struct SweepConfig {
  TwistingModel model = TwistingModel::oat;
  int n_particles = 16;
  int k_max = 5;
  double tau_start = 0.0;
  double tau_end = std::numbers::pi;
  int steps = 101;
  bool include_parity = false;
  bool include_qfi = false;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  unsigned workers = 0;
};

void validate(const SweepConfig& config);

struct SweepRecord {
  double tau = 0.0;
  std::vector<double> xi2_inv_by_k;
  std::optional<double> xi2_inv_parity;
  std::optional<double> f_max;
  std::vector<Eigen::Vector3d> n_opt_by_k;
  int ent_bound = 0;
  IntegrityReport integrity;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  IntegrityReport integrity;
};

/// Evaluates every grid point. Points run concurrently on a shared evolver
/// and a single K_max family; records come back in tau order.
SweepResult run_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& out, const SweepConfig& config, const SweepResult& result);
void write_sweep_json(std::ostream& out, const SweepConfig& config, const SweepResult& result);

struct FockConfig {
  int n = 0;
  int order = 3;
  std::optional<int> cutoff;
  /// Quadrature angle: n1 = sin(phi), n2 = -cos(phi). pi/2 is x.
  double phi = std::numbers::pi / 2.0;
};

struct FockReport {
  int n = 0;
  int order = 3;
  int cutoff = 0;
  double chi2_inv = 0.0;
  double xi2 = 0.0;
  std::vector<std::string> labels;
  RVector m_coeffs;
  Eigen::Vector2d direction;
  /// Same quantity at twice the cutoff, and the relative change.
  double chi2_inv_doubled = 0.0;
  double cutoff_rel_change = 0.0;
  IntegrityReport integrity;
};

/// Throws UsageError when the cutoff is below minimum_exact_cutoff.
FockReport run_fock(const FockConfig& config);
void write_fock(std::ostream& out, const FockReport& report, OutputFormat format);

struct AnalyzeConfig {
  TwistingModel model = TwistingModel::oat;
  int n_particles = 4;
  double tau = 0.0;
  int order = 2;
};

struct AnalyzeReport {
  AnalyzeConfig config;
  std::vector<std::string> labels;
  MomentData moments;
  RMatrix m_tilde;
  double lambda_max = 0.0;
  RVector n_opt;
  RVector m_opt;
  double xi2_inv = 0.0;
};

AnalyzeReport run_analyze(const AnalyzeConfig& config);
/// Full-precision JSON; doubles round-trip exactly.
std::string analyze_json(const AnalyzeReport& report);

struct EstimateConfig {
  TwistingModel model = TwistingModel::oat;
  int n_particles = 16;
  double tau = 0.0;
  /// x, y, z, opt, or three comma-separated components.
  std::string generator = "opt";
  /// x, y, z, parity, opt, or three comma-separated components.
  std::string observable = "opt";
  double theta = 0.0;
  long mu = 10000;
  long trials = 200;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  double window = 0.0;
};

struct EstimateOutcome {
  EstimatorReport report;
  std::string generator_label;
  std::string observable_label;
};

EstimateOutcome run_estimate(const EstimateConfig& config);
void write_estimate(std::ostream& out, const EstimateOutcome& outcome, OutputFormat format);

/// Full command-line entry point. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlsq::cli
