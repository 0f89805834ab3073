#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nlsq/types.hpp"

namespace nlsq {

/// Dense complex Hermitian matrix with a label and its monomial degree.
/// Degree is 0 for operators that are not polynomials in the generators
/// (parity, projectors, user-supplied matrices).
class HermitianOperator {
 public:
  static constexpr double kHermiticityTol = 1e-12;

  HermitianOperator(CMatrix matrix, std::string label, int degree, BasisTag basis);

  [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] int degree() const { return degree_; }
  [[nodiscard]] const BasisTag& basis() const { return basis_; }
  [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }

  /// Max absolute row sum; an upper bound on the spectral norm.
  [[nodiscard]] double norm_bound() const;

 private:
  CMatrix matrix_;
  std::string label_;
  int degree_ = 0;
  BasisTag basis_;
};

/// Exponents (d_x, d_y, d_z) of a monomial in three generators.
struct MultiDegree {
  int x = 0;
  int y = 0;
  int z = 0;

  [[nodiscard]] int total() const { return x + y + z; }
  friend auto operator<=>(const MultiDegree&, const MultiDegree&) = default;
};

/// Ordered accessible set (H_1, ..., H_K) sharing one basis.
class OperatorFamily {
 public:
  OperatorFamily(std::vector<HermitianOperator> operators, BasisTag basis,
                 std::map<MultiDegree, std::size_t> monomial_index = {});

  [[nodiscard]] std::size_t size() const { return operators_.size(); }
  [[nodiscard]] const HermitianOperator& operator[](std::size_t i) const { return operators_[i]; }
  [[nodiscard]] auto begin() const { return operators_.begin(); }
  [[nodiscard]] auto end() const { return operators_.end(); }
  [[nodiscard]] const std::vector<HermitianOperator>& operators() const { return operators_; }
  [[nodiscard]] const BasisTag& basis() const { return basis_; }
  [[nodiscard]] const std::map<MultiDegree, std::size_t>& monomial_index() const {
    return monomial_index_;
  }

  /// Indices of the degree-1 members, the default generator candidates.
  [[nodiscard]] std::vector<std::size_t> linear_slots() const;

  /// The first `count` members (monomial index filtered accordingly).
  [[nodiscard]] OperatorFamily prefix(std::size_t count) const;

 private:
  std::vector<HermitianOperator> operators_;
  BasisTag basis_;
  std::map<MultiDegree, std::size_t> monomial_index_;
};

/// Average of the operator product over all orderings of `ops`.
/// Degree of the result is the sum of the input degrees.
HermitianOperator symmetric_product(std::span<const HermitianOperator> ops);

/// Real linear combination sum_k coeffs[k] * family[k].
HermitianOperator linear_combination(const OperatorFamily& family, const RVector& coeffs,
                                     std::string label = "combination");

/// A - B as a complex matrix.
CMatrix commutator(const CMatrix& a, const CMatrix& b);

}  // namespace nlsq
