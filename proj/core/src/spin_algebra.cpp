#include "nlsq/spin_algebra.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace nlsq {

DickeBasis::DickeBasis(int n_particles) : n_(n_particles) {
  if (n_particles < 1) throw InvalidArgument("Dicke basis needs N >= 1");
}

SpinOperators build_spin_operators(const DickeBasis& basis) {
  const int dim = basis.dim();
  const double j = basis.j();
  CMatrix jz = CMatrix::Zero(dim, dim);
  CMatrix jplus = CMatrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = basis.m(i);
    jz(i, i) = m;
    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>, and |m+1> sits at index i-1.
    if (i > 0) jplus(i - 1, i) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  }
  const CMatrix jminus = jplus.adjoint();
  CMatrix jx = 0.5 * (jplus + jminus);
  CMatrix jy = cplx(0.0, -0.5) * (jplus - jminus);
  const BasisTag tag = basis.tag();
  return {HermitianOperator(std::move(jx), "Jx", 1, tag),
          HermitianOperator(std::move(jy), "Jy", 1, tag),
          HermitianOperator(std::move(jz), "Jz", 1, tag)};
}

std::size_t spin_family_size(int order) {
  std::size_t total = 0;
  for (int d = 1; d <= order; ++d) total += static_cast<std::size_t>((d + 1) * (d + 2) / 2);
  return total;
}

namespace {

std::string monomial_label(const MultiDegree& d) {
  if (d.total() == 1) return d.x ? "Jx" : (d.y ? "Jy" : "Jz");
  std::string label = "sym(";
  bool first = true;
  auto add = [&](const char* name, int power) {
    if (power == 0) return;
    if (!first) label += " ";
    first = false;
    label += name;
    if (power > 1) label += "^" + std::to_string(power);
  };
  add("Jx", d.x);
  add("Jy", d.y);
  add("Jz", d.z);
  return label + ")";
}

std::vector<MultiDegree> monomials_of_degree(int d) {
  std::vector<MultiDegree> out;
  for (int x = d; x >= 0; --x) {
    for (int y = d - x; y >= 0; --y) out.push_back({x, y, d - x - y});
  }
  return out;
}

}  // namespace

OperatorFamily build_spin_family(const DickeBasis& basis, int order) {
  if (order < 1) throw InvalidArgument("spin family order must be >= 1");
  const SpinOperators spins = build_spin_operators(basis);
  const std::array<const CMatrix*, 3> gens = {&spins.jx.matrix(), &spins.jy.matrix(),
                                              &spins.jz.matrix()};

  // W(a) is the sum over all distinct words with letter counts a; it obeys
  // W(a) = sum_c J_c W(a - e_c), and the fully symmetrized monomial is
  // W(a) divided by the multinomial word count.
  std::map<MultiDegree, CMatrix> words;
  std::map<MultiDegree, double> counts;
  const Eigen::Index dim = basis.dim();
  words[{0, 0, 0}] = CMatrix::Identity(dim, dim);
  counts[{0, 0, 0}] = 1.0;

  std::vector<HermitianOperator> ops;
  std::map<MultiDegree, std::size_t> index;
  ops.reserve(spin_family_size(order));
  for (int d = 1; d <= order; ++d) {
    for (const MultiDegree& a : monomials_of_degree(d)) {
      CMatrix w = CMatrix::Zero(dim, dim);
      double count = 0.0;
      const std::array<MultiDegree, 3> prev = {MultiDegree{a.x - 1, a.y, a.z},
                                               MultiDegree{a.x, a.y - 1, a.z},
                                               MultiDegree{a.x, a.y, a.z - 1}};
      for (int c = 0; c < 3; ++c) {
        if (prev[c].x < 0 || prev[c].y < 0 || prev[c].z < 0) continue;
        w.noalias() += (*gens[c]) * words.at(prev[c]);
        count += counts.at(prev[c]);
      }
      CMatrix sym = w / count;
      sym = 0.5 * (sym + sym.adjoint()).eval();
      index.emplace(a, ops.size());
      ops.emplace_back(std::move(sym), monomial_label(a), d, basis.tag());
      words.emplace(a, std::move(w));
      counts.emplace(a, count);
    }
    // Words of degree d-1 are no longer needed.
    for (const MultiDegree& a : monomials_of_degree(d - 1)) {
      if (d - 1 > 0) words.erase(a);
    }
  }
  return {std::move(ops), basis.tag(), std::move(index)};
}

HermitianOperator parity_operator(const DickeBasis& basis) {
  const SpinOperators spins = build_spin_operators(basis);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(spins.jx.matrix());
  const RVector& mx = es.eigenvalues();
  CVector signs(mx.size());
  for (Eigen::Index i = 0; i < mx.size(); ++i) {
    const long k = std::lround(basis.j() - mx[i]);
    signs[i] = (k % 2 == 0) ? 1.0 : -1.0;
  }
  CMatrix p = es.eigenvectors() * signs.asDiagonal() * es.eigenvectors().adjoint();
  p = 0.5 * (p + p.adjoint()).eval();
  return {std::move(p), "P", 0, basis.tag()};
}

HermitianOperator spin_component(const DickeBasis& basis, const Eigen::Vector3d& direction) {
  const SpinOperators s = build_spin_operators(basis);
  CMatrix m = direction[0] * s.jx.matrix() + direction[1] * s.jy.matrix() +
              direction[2] * s.jz.matrix();
  return {std::move(m), "Jn", 1, basis.tag()};
}

}  // namespace nlsq
