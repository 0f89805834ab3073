#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace nlsq {

using WarningSink = std::function<void(std::string_view)>;

/// Routes library warnings. The default sink writes to stderr.
/// Returns the previous sink.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

/// Numerical-integrity findings attached to a computation.
///
/// Flags never abort a computation; callers decide whether a raised flag
/// is fatal (the CLI maps it to exit code 2).
struct IntegrityReport {
  /// Largest imaginary part discarded when realifying expectation values,
  /// relative to the operator scale.
  double max_imag_residue = 0.0;
  /// max ||C v|| / ||C|| over kernel directions v of the covariance matrix.
  double kernel_commutator_ratio = 0.0;
  std::vector<std::string> flags;
  std::vector<std::string> notes;

  [[nodiscard]] bool flagged() const { return !flags.empty(); }
  void merge(const IntegrityReport& other);
};

}  // namespace nlsq
