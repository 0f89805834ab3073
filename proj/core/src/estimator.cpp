#include "nlsq/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "nlsq/diagnostics.hpp"
#include "nlsq/moment_engine.hpp"
#include "nlsq/spectrum.hpp"

namespace nlsq {

namespace {

constexpr long kCentralLimitMinSamples = 30;

}  // namespace

CalibrationCurve::CalibrationCurve(std::vector<double> thetas, std::vector<double> values)
    : thetas_(std::move(thetas)), values_(std::move(values)) {
  if (thetas_.size() != values_.size() || thetas_.size() < 2) {
    throw InvalidArgument("calibration curve needs at least two matching points");
  }
  bool up = true;
  bool down = true;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    up = up && values_[i] > values_[i - 1];
    down = down && values_[i] < values_[i - 1];
  }
  if (!up && !down) {
    throw NumericalError("calibration curve is not monotonic in the window; <X>(theta) cannot "
                         "be inverted");
  }
  increasing_ = up;
}

double CalibrationCurve::invert(double mean, bool* clamped) const {
  if (clamped) *clamped = false;
  const std::size_t n = values_.size();
  // Work on an ascending view of the values.
  auto value_at = [&](std::size_t i) { return increasing_ ? values_[i] : values_[n - 1 - i]; };
  auto theta_at = [&](std::size_t i) { return increasing_ ? thetas_[i] : thetas_[n - 1 - i]; };
  if (mean <= value_at(0)) {
    if (clamped) *clamped = mean < value_at(0);
    return theta_at(0);
  }
  if (mean >= value_at(n - 1)) {
    if (clamped) *clamped = mean > value_at(n - 1);
    return theta_at(n - 1);
  }
  std::size_t lo = 0;
  std::size_t hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (value_at(mid) <= mean) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = (mean - value_at(lo)) / (value_at(hi) - value_at(lo));
  return theta_at(lo) + t * (theta_at(hi) - theta_at(lo));
}

CalibrationCurve calibrate(const QuantumState& state, const HermitianOperator& generator,
                           const HermitianOperator& observable, double theta_lo, double theta_hi,
                           int points) {
  require_same_basis(state.basis(), generator.basis(), "calibrate");
  require_same_basis(state.basis(), observable.basis(), "calibrate");
  if (points < 2 || !(theta_hi > theta_lo)) throw InvalidArgument("invalid calibration window");

  const UnitaryPropagator prop(generator);
  const CMatrix& v = prop.eigenvectors();
  const RVector& lam = prop.eigenvalues();
  const CMatrix xr = v.adjoint() * observable.matrix() * v;
  const CMatrix coeffs = v.adjoint() * state.components();
  const RVector& w = state.weights();

  std::vector<double> thetas(static_cast<std::size_t>(points));
  std::vector<double> values(static_cast<std::size_t>(points));
  CVector phi(lam.size());
  for (int g = 0; g < points; ++g) {
    const double theta = theta_lo + (theta_hi - theta_lo) * g / (points - 1);
    double mean = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      for (Eigen::Index a = 0; a < lam.size(); ++a) {
        phi[a] = coeffs(a, i) * std::polar(1.0, -theta * lam[a]);
      }
      mean += w[i] * phi.dot(xr * phi).real();
    }
    thetas[static_cast<std::size_t>(g)] = theta;
    values[static_cast<std::size_t>(g)] = mean;
  }
  return {std::move(thetas), std::move(values)};
}

EstimatorReport simulate_moment_estimator(const QuantumState& state,
                                          const HermitianOperator& generator,
                                          const HermitianOperator& observable, double theta_true,
                                          long mu, long trials, std::uint64_t seed,
                                          const EstimatorOptions& options) {
  if (mu < 1) throw InvalidArgument("mu must be >= 1");
  if (trials < 2) throw InvalidArgument("trials must be >= 2");

  EstimatorReport r;
  r.theta_true = theta_true;
  r.mu = mu;
  r.trials = trials;

  const UnitaryPropagator prop(generator);
  const QuantumState at_truth = prop.apply(state, theta_true);
  r.chi2 = chi2_error_propagation(at_truth, generator, observable);
  r.predicted_variance = r.chi2 / static_cast<double>(mu);

  if (mu < kCentralLimitMinSamples) {
    r.central_limit_warning = true;
    std::ostringstream msg;
    msg << "mu=" << mu << " is below " << kCentralLimitMinSamples
        << "; the central-limit error-propagation formula does not apply";
    warn(msg.str());
  }

  // The default window starts at 8 predicted standard deviations and halves
  // while <X>(theta) is not monotonic across it, stopping at pi / (2 spread(H)).
  double half = options.window_half_width;
  std::optional<CalibrationCurve> curve;
  if (half > 0.0) {
    curve.emplace(calibrate(state, generator, observable, theta_true - half, theta_true + half,
                            options.grid_points));
  } else {
    const double spread = prop.eigenvalues().maxCoeff() - prop.eigenvalues().minCoeff();
    const double floor_half = std::numbers::pi / (2.0 * std::max(spread, 1e-300));
    half = std::min(8.0 * std::sqrt(r.predicted_variance), std::numbers::pi);
    while (!curve) {
      try {
        curve.emplace(calibrate(state, generator, observable, theta_true - half,
                                theta_true + half, options.grid_points));
      } catch (const NumericalError&) {
        if (half <= floor_half) throw;
        half = std::max(0.5 * half, floor_half);
      }
    }
  }
  r.window_half_width = half;

  const ObservableSpectrum spec = observable_spectrum(observable);
  const std::vector<double> probs = spec.probabilities(at_truth);

  std::vector<double> estimates(static_cast<std::size_t>(trials));
  std::vector<char> clamped(static_cast<std::size_t>(trials), 0);
  auto run_trial = [&](long t) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(t >> 32)};
    std::mt19937_64 engine(seq);
    std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
    double sum = 0.0;
    for (long s = 0; s < mu; ++s) sum += spec.values[dist(engine)];
    bool c = false;
    estimates[static_cast<std::size_t>(t)] = curve->invert(sum / static_cast<double>(mu), &c);
    clamped[static_cast<std::size_t>(t)] = c ? 1 : 0;
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (long t = 0; t < trials; ++t) run_trial(t);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < workers; ++k) {
      pool.emplace_back([&, k] {
        for (long t = k; t < trials; t += workers) run_trial(t);
      });
    }
  }

  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  var /= static_cast<double>(trials - 1);
  r.mean_estimate = mean;
  r.empirical_variance = var;
  r.ratio = var / r.predicted_variance;
  for (char c : clamped) r.clamped += c;
  return r;
}

}  // namespace nlsq
