#include "nlsq/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <utility>

#include "nlsq/types.hpp"

namespace nlsq {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

WarningSink& current_sink() {
  static WarningSink sink = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return sink;
}

}  // namespace

WarningSink set_warning_sink(WarningSink sink) {
  std::lock_guard lock(sink_mutex());
  return std::exchange(current_sink(), std::move(sink));
}

void warn(std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(message);
}

void IntegrityReport::merge(const IntegrityReport& other) {
  max_imag_residue = std::max(max_imag_residue, other.max_imag_residue);
  kernel_commutator_ratio = std::max(kernel_commutator_ratio, other.kernel_commutator_ratio);
  flags.insert(flags.end(), other.flags.begin(), other.flags.end());
  notes.insert(notes.end(), other.notes.begin(), other.notes.end());
}

std::string to_string(const BasisTag& tag) {
  return (tag.kind == BasisKind::dicke ? "dicke(N=" : "fock(D=") + std::to_string(tag.size) + ")";
}

void require_same_basis(const BasisTag& a, const BasisTag& b, const char* what) {
  if (!(a == b)) {
    throw InvalidArgument(std::string(what) + ": basis mismatch between " + to_string(a) +
                          " and " + to_string(b));
  }
}

}  // namespace nlsq
