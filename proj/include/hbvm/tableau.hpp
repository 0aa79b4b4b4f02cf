#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "hbvm/errors.hpp"
#include "hbvm/legendre.hpp"

namespace hbvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// HBVM(k,s): a k-stage Runge-Kutta method built on the first s orthonormal
/// Legendre polynomials and the k-point Gauss-Legendre rule.
///
///   Is(i,j) = int_0^{c_i} P_j,   Ps(i,j) = P_j(c_i),   A = Is Ps^T Omega.
///
/// The coefficient-form solver only needs
///   W = Ps^T Omega  (s x k)  maps stage values of the vector field to gamma,
///   X = W Is        (s x s)  the gamma-to-gamma coupling used by Newton.
struct HbvmTableau {
  std::size_t k = 0;
  std::size_t s = 0;
  QuadratureRule rule;
  Matrix Is;  // k x s
  Matrix Ps;  // k x s
  Matrix W;   // s x k
  Matrix X;   // s x s
  Matrix A;   // k x k

  Eigen::Map<const Vector> c() const { return {rule.c.data(), static_cast<Index>(k)}; }
  Eigen::Map<const Vector> b() const { return {rule.b.data(), static_cast<Index>(k)}; }
};

inline HbvmTableau build_tableau(std::size_t k, std::size_t s) {
  if (s < 1 || s > k)
    throw InvalidParams("build_tableau: need 1 <= s <= k, got k=" + std::to_string(k) +
                        ", s=" + std::to_string(s));
  if (k > kMaxQuadratureNodes)
    throw InvalidParams("build_tableau: k exceeds " + std::to_string(kMaxQuadratureNodes));

  HbvmTableau tab;
  tab.k = k;
  tab.s = s;
  tab.rule = gauss_legendre(k);
  tab.Is.resize(k, s);
  tab.Ps.resize(k, s);
  for (std::size_t i = 0; i < k; ++i) {
    const double ci = tab.rule.c[i];
    const auto vals = shifted_legendre_all(s, ci);
    for (std::size_t j = 0; j < s; ++j) {
      tab.Is(i, j) = shifted_legendre_primitive(j, ci);
      tab.Ps(i, j) = vals[j];
    }
  }
  tab.W = tab.Ps.transpose() * tab.b().asDiagonal();
  tab.X = tab.W * tab.Is;
  tab.A = tab.Is * tab.W;
  return tab;
}

/// Stage count for a given basis size.
///
/// Without further knowledge k = max(s+2, 20). For a polynomial Hamiltonian of
/// degree nu the smallest k making the Gauss rule exact on the energy
/// integrand (degree nu*s - 1) is ceil(nu*s/2).
inline std::size_t k_rule(std::size_t s, std::optional<std::size_t> nu = std::nullopt) {
  if (!nu) return std::max<std::size_t>(s + 2, 20);
  return std::max<std::size_t>((*nu * s + 1) / 2, s);
}

}  // namespace hbvm
