#include "nlsq/operators.hpp"

#include <algorithm>
#include <numeric>

namespace nlsq {

HermitianOperator::HermitianOperator(CMatrix matrix, std::string label, int degree,
                                     BasisTag basis)
    : matrix_(std::move(matrix)), label_(std::move(label)), degree_(degree), basis_(basis) {
  if (matrix_.rows() != matrix_.cols()) {
    throw InvalidArgument("operator '" + label_ + "' is not square");
  }
  if (matrix_.rows() != basis_.dim()) {
    throw InvalidArgument("operator '" + label_ + "' does not match " + to_string(basis_));
  }
  if (degree_ < 0) throw InvalidArgument("negative operator degree");
  const double dev = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
  if (dev > kHermiticityTol) {
    throw InvalidArgument("operator '" + label_ + "' is not Hermitian (deviation " +
                          std::to_string(dev) + ")");
  }
}

double HermitianOperator::norm_bound() const {
  return matrix_.cwiseAbs().rowwise().sum().maxCoeff();
}

OperatorFamily::OperatorFamily(std::vector<HermitianOperator> operators, BasisTag basis,
                               std::map<MultiDegree, std::size_t> monomial_index)
    : operators_(std::move(operators)), basis_(basis), monomial_index_(std::move(monomial_index)) {
  if (operators_.empty()) throw InvalidArgument("empty operator family");
  for (const auto& op : operators_) require_same_basis(op.basis(), basis_, "OperatorFamily");
  for (const auto& [deg, pos] : monomial_index_) {
    if (pos >= operators_.size()) throw InvalidArgument("monomial index out of range");
  }
}

std::vector<std::size_t> OperatorFamily::linear_slots() const {
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < operators_.size(); ++i) {
    if (operators_[i].degree() == 1) slots.push_back(i);
  }
  return slots;
}

OperatorFamily OperatorFamily::prefix(std::size_t count) const {
  if (count == 0 || count > operators_.size()) {
    throw InvalidArgument("family prefix length out of range");
  }
  std::vector<HermitianOperator> ops(operators_.begin(), operators_.begin() + count);
  std::map<MultiDegree, std::size_t> index;
  for (const auto& [deg, pos] : monomial_index_) {
    if (pos < count) index.emplace(deg, pos);
  }
  return {std::move(ops), basis_, std::move(index)};
}

CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

HermitianOperator symmetric_product(std::span<const HermitianOperator> ops) {
  if (ops.empty()) throw InvalidArgument("symmetric_product of an empty list");
  const BasisTag basis = ops.front().basis();
  int degree = 0;
  std::string label = "sym(";
  for (std::size_t i = 0; i < ops.size(); ++i) {
    require_same_basis(ops[i].basis(), basis, "symmetric_product");
    degree += ops[i].degree();
    label += (i ? "," : "") + ops[i].label();
  }
  label += ")";
  if (ops.size() == 1) return ops.front();

  std::vector<std::size_t> order(ops.size());
  std::iota(order.begin(), order.end(), 0);
  const Eigen::Index dim = ops.front().dim();
  CMatrix sum = CMatrix::Zero(dim, dim);
  long count = 0;
  do {
    CMatrix prod = ops[order[0]].matrix();
    for (std::size_t k = 1; k < order.size(); ++k) prod = prod * ops[order[k]].matrix();
    sum += prod;
    ++count;
  } while (std::next_permutation(order.begin(), order.end()));
  sum /= static_cast<double>(count);
  CMatrix herm = 0.5 * (sum + sum.adjoint());
  return {std::move(herm), std::move(label), degree, basis};
}

HermitianOperator linear_combination(const OperatorFamily& family, const RVector& coeffs,
                                     std::string label) {
  if (static_cast<std::size_t>(coeffs.size()) != family.size()) {
    throw InvalidArgument("coefficient vector length does not match family size");
  }
  const Eigen::Index dim = family.basis().dim();
  CMatrix sum = CMatrix::Zero(dim, dim);
  int degree = 0;
  for (std::size_t k = 0; k < family.size(); ++k) {
    if (coeffs[k] == 0.0) continue;
    sum += coeffs[k] * family[k].matrix();
    degree = std::max(degree, family[k].degree());
  }
  CMatrix herm = 0.5 * (sum + sum.adjoint());
  return {std::move(herm), std::move(label), degree, family.basis()};
}

}  // namespace nlsq
