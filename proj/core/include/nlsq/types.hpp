#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace nlsq {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Invalid arguments, violated preconditions and mismatched bases.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A quantity is undefined because the observable carries no signal for
/// the generator (vanishing commutator expectation).
class ZeroSensitivity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a numerical procedure cannot produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BasisKind { dicke, fock };

/// Identifies the Hilbert space an operator or state lives in.
/// For Dicke bases `size` is the particle number N (dimension N+1);
/// for Fock bases it is the cutoff D (dimension D).
struct BasisTag {
  BasisKind kind = BasisKind::dicke;
  int size = 0;

  [[nodiscard]] int dim() const { return kind == BasisKind::dicke ? size + 1 : size; }
  friend bool operator==(const BasisTag&, const BasisTag&) = default;
};

std::string to_string(const BasisTag& tag);

void require_same_basis(const BasisTag& a, const BasisTag& b, const char* what);

}  // namespace nlsq
