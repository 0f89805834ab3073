#pragma once

#include <memory>

#include "nlsq/spectrum.hpp"
#include "nlsq/spin_algebra.hpp"
#include "nlsq/state.hpp"

namespace nlsq {

enum class TwistingModel { oat, tat };

const char* to_string(TwistingModel model);
TwistingModel parse_twisting_model(std::string_view name);

struct EvolutionSpec {
  TwistingModel model = TwistingModel::oat;
  double tau = 0.0;
};

/// The maximal-Jz Dicke state |N/2, N/2>_z.
QuantumState coherent_spin_state_z(const DickeBasis& basis);

/// Jy^2 for one-axis twisting, Jy^2 - (N/2) Jz for twist-and-turn.
HermitianOperator twisting_generator(const DickeBasis& basis, TwistingModel model);

/// Evolution under a fixed twisting generator. The generator is
/// diagonalized at construction and the result is shared read-only
/// across any number of evolve() calls.
class TwistingEvolver {
 public:
  TwistingEvolver(const DickeBasis& basis, TwistingModel model);

  [[nodiscard]] QuantumState evolve(const QuantumState& state, double tau) const;
  [[nodiscard]] TwistingModel model() const { return model_; }
  [[nodiscard]] const DickeBasis& basis() const { return basis_; }

 private:
  DickeBasis basis_;
  TwistingModel model_;
  std::shared_ptr<const UnitaryPropagator> propagator_;
};

QuantumState evolve(const QuantumState& state, const EvolutionSpec& spec);

}  // namespace nlsq
