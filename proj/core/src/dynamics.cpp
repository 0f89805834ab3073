#include "nlsq/dynamics.hpp"

#include <string>

namespace nlsq {

const char* to_string(TwistingModel model) {
  return model == TwistingModel::oat ? "oat" : "tat";
}

TwistingModel parse_twisting_model(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "oat") return TwistingModel::oat;
  if (lower == "tat") return TwistingModel::tat;
  throw InvalidArgument("unknown twisting model '" + std::string(name) + "' (expected oat|tat)");
}

QuantumState coherent_spin_state_z(const DickeBasis& basis) {
  CVector v = CVector::Zero(basis.dim());
  v[0] = 1.0;
  return QuantumState::pure(std::move(v), basis.tag());
}

HermitianOperator twisting_generator(const DickeBasis& basis, TwistingModel model) {
  const SpinOperators s = build_spin_operators(basis);
  CMatrix gen = s.jy.matrix() * s.jy.matrix();
  if (model == TwistingModel::tat) gen -= (0.5 * basis.n_particles()) * s.jz.matrix();
  gen = 0.5 * (gen + gen.adjoint()).eval();
  return {std::move(gen), model == TwistingModel::oat ? "Jy^2" : "Jy^2-(N/2)Jz", 2, basis.tag()};
}

TwistingEvolver::TwistingEvolver(const DickeBasis& basis, TwistingModel model)
    : basis_(basis),
      model_(model),
      propagator_(std::make_shared<const UnitaryPropagator>(twisting_generator(basis, model))) {}

QuantumState TwistingEvolver::evolve(const QuantumState& state, double tau) const {
  require_same_basis(state.basis(), basis_.tag(), "evolve");
  if (!std::isfinite(tau)) throw InvalidArgument("evolution time must be finite");
  return propagator_->apply(state, tau);
}

QuantumState evolve(const QuantumState& state, const EvolutionSpec& spec) {
  if (state.basis().kind != BasisKind::dicke) {
    throw InvalidArgument("twisting evolution requires a Dicke basis state");
  }
  const TwistingEvolver evolver(DickeBasis(state.basis().size), spec.model);
  return evolver.evolve(state, spec.tau);
}

}  // namespace nlsq
