#pragma once

#include <cstdint>
#include <vector>

#include "nlsq/operators.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

/// <X>(theta) tabulated on a uniform grid, inverted by bracketing and
/// linear interpolation.
class CalibrationCurve {
 public:
  CalibrationCurve(std::vector<double> thetas, std::vector<double> values);

  [[nodiscard]] bool increasing() const { return increasing_; }
  [[nodiscard]] const std::vector<double>& thetas() const { return thetas_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

  /// theta with <X>(theta) = mean. Means outside the tabulated range are
  /// clamped to the window edge and `clamped` is set.
  [[nodiscard]] double invert(double mean, bool* clamped = nullptr) const;

 private:
  std::vector<double> thetas_;
  std::vector<double> values_;
  bool increasing_ = true;
};

/// Tabulates <X>(theta) for rho(theta) = exp(-iH theta) rho exp(iH theta).
/// Throws NumericalError when the curve is not strictly monotonic.
CalibrationCurve calibrate(const QuantumState& state, const HermitianOperator& generator,
                           const HermitianOperator& observable, double theta_lo, double theta_hi,
                           int points = 1001);

struct EstimatorOptions {
  /// Half-width of the calibration window around theta_true. 0 starts at
  /// 8 sigma_predicted and halves until <X>(theta) is monotonic, down to
  /// pi / (2 * spectral width of H).
  double window_half_width = 0.0;
  int grid_points = 1001;
  unsigned workers = 1;
};

struct EstimatorReport {
  double theta_true = 0.0;
  long mu = 0;
  long trials = 0;
  double chi2 = 0.0;
  double predicted_variance = 0.0;
  double empirical_variance = 0.0;
  /// empirical / predicted.
  double ratio = 0.0;
  double mean_estimate = 0.0;
  double window_half_width = 0.0;
  long clamped = 0;
  /// mu too small for the central-limit description of the sample mean.
  bool central_limit_warning = false;
};

/// Method-of-moments phase estimation: each trial averages mu outcomes
/// drawn from p(x|theta_true) and inverts the calibration curve.
/// Trial t draws from its own engine seeded with (seed, t), so results do
/// not depend on the worker count.
EstimatorReport simulate_moment_estimator(const QuantumState& state,
                                          const HermitianOperator& generator,
                                          const HermitianOperator& observable, double theta_true,
                                          long mu, long trials, std::uint64_t seed,
                                          const EstimatorOptions& options = {});

}  // namespace nlsq
