#pragma once

// Coefficient-form HBVM step.
//
// The unknowns are the s Legendre coefficients gamma_0..gamma_{s-1} of the
// vector field on [t0, t0+h], stored as the columns of a dim x s matrix G.
// With stage values  Y = y0 1^T + h G Is^T  the discrete problem reads
//
//     G = phi(Y) W^T,        W = Ps^T Omega,
//
// and the new point is y1 = y0 + h gamma_0. The block size is s whatever k.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/errors.hpp"
#include "hbvm/system.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

enum class SolverMode { FixedPoint, LinearNewton };

struct SolverConfig {
  SolverMode mode = SolverMode::LinearNewton;
  /// Stop when the last correction satisfies |dG|_inf <= tol (1 + |G|_inf).
  double nonlinear_tol = 1e-14;
  std::size_t max_iters = 100;
  double machine_eps = std::numeric_limits<double>::epsilon();
  /// Corrections that stop decreasing once below this multiple of the
  /// tolerance are treated as round-off stagnation and accepted.
  double stagnation_factor = 1e3;
};

struct GammaSolution {
  Matrix gammas;  // dim x s, column j is gamma_j
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double residual = 0.0;  // max-norm of the last correction

  std::size_t s() const { return static_cast<std::size_t>(gammas.cols()); }
};

/// |gamma_{s-1}| / max_i |gamma_i| from precomputed 2-norms; 0 if all vanish.
inline double rho_ratio(const std::vector<double>& norms) {
  if (norms.empty()) return 0.0;
  const double top = *std::max_element(norms.begin(), norms.end());
  if (top == 0.0) return 0.0;
  return norms.back() / top;
}

inline std::vector<double> gamma_norms(const Matrix& gammas) {
  std::vector<double> norms(static_cast<std::size_t>(gammas.cols()));
  for (Index j = 0; j < gammas.cols(); ++j) norms[static_cast<std::size_t>(j)] = gammas.col(j).norm();
  return norms;
}

inline double rho_ratio(const Matrix& gammas) { return rho_ratio(gamma_norms(gammas)); }

/// Solves the coefficient-form discrete problem for one system and keeps the
/// factored approximate Jacobians  I - h X (x) L_b  around, keyed by (h,k,s),
/// so a uniform-step integration factors once.
///
/// Not thread-safe: one solver per trajectory.
class GammaSolver {
 public:
  GammaSolver(const HamiltonianSystem& system, SolverConfig cfg = {})
      : system_(&system), cfg_(cfg) {
    if (!(cfg_.nonlinear_tol > 0.0)) throw InvalidParams("nonlinear_tol must be positive");
    if (cfg_.max_iters < 1) throw InvalidParams("max_iters must be at least 1");
  }

  const SolverConfig& config() const { return cfg_; }
  const HamiltonianSystem& system() const { return *system_; }

  GammaSolution solve(const Vector& y0, double h, const HbvmTableau& tab,
                      const GammaSolution* guess = nullptr) {
    const Index dim = system_->dim();
    if (y0.size() != dim) throw InvalidParams("solve_gamma: state dimension mismatch");
    if (!(h != 0.0) || !std::isfinite(h)) throw InvalidParams("solve_gamma: step must be finite and nonzero");

    const auto s = static_cast<Index>(tab.s);
    const auto k = static_cast<Index>(tab.k);

    GammaSolution sol;
    sol.gammas = Matrix::Zero(dim, s);
    if (guess != nullptr && guess->gammas.rows() == dim) {
      const Index keep = std::min<Index>(s, guess->gammas.cols());
      sol.gammas.leftCols(keep) = guess->gammas.leftCols(keep);
    }

    const BlockFactors* factors = nullptr;
    if (cfg_.mode == SolverMode::LinearNewton) factors = &factors_for(h, tab);

    const Matrix IsT = tab.Is.transpose();
    const Matrix WT = tab.W.transpose();
    Matrix Y(dim, k), F(dim, k), R(dim, s);
    double prev = std::numeric_limits<double>::infinity();

    for (std::size_t it = 1; it <= cfg_.max_iters; ++it) {
      Y.noalias() = h * sol.gammas * IsT;
      Y.colwise() += y0;
      system_->rhs(Y, F);
      R = sol.gammas;
      R.noalias() -= F * WT;  // residual G - phi(Y) W^T

      if (factors != nullptr) {
        apply_inverse(*factors, R);
      }
      sol.gammas -= R;

      const double corr = R.lpNorm<Eigen::Infinity>();
      const double scale = 1.0 + sol.gammas.lpNorm<Eigen::Infinity>();
      sol.iterations = it;
      sol.residual = corr;
      if (!std::isfinite(corr)) break;
      if (corr <= cfg_.nonlinear_tol * scale ||
          (corr >= prev && corr <= cfg_.stagnation_factor * cfg_.nonlinear_tol * scale)) {
        sol.converged = true;
        break;
      }
      prev = corr;
    }

    if (!sol.converged) throw NoConvergence(sol.iterations, sol.residual);
    sol.rho = rho_ratio(sol.gammas);
    return sol;
  }

  std::pair<Vector, GammaSolution> step(const Vector& y0, double h, const HbvmTableau& tab,
                                        const GammaSolution* guess = nullptr) {
    GammaSolution sol = solve(y0, h, tab, guess);
    Vector y1 = y0 + h * sol.gammas.col(0);
    return {std::move(y1), std::move(sol)};
  }

  void clear_cache() { cache_.clear(); }

 private:
  struct BlockFactor {
    std::vector<Index> indices;
    Eigen::PartialPivLU<Matrix> lu;
  };
  struct BlockFactors {
    std::vector<BlockFactor> blocks;
  };
  using Key = std::tuple<double, std::size_t, std::size_t>;

  const BlockFactors& factors_for(double h, const HbvmTableau& tab) {
    const Key key{h, tab.k, tab.s};
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (cache_.size() >= kMaxCached) cache_.clear();

    BlockFactors out;
    const auto s = static_cast<Index>(tab.s);
    for (const auto& blk : system_->linear_blocks()) {
      const auto nb = static_cast<Index>(blk.indices.size());
      // Unknown ordering inside a block: (j, a) -> j * nb + a.
      Matrix M = Matrix::Identity(s * nb, s * nb);
      for (Index j = 0; j < s; ++j)
        for (Index l = 0; l < s; ++l) M.block(j * nb, l * nb, nb, nb) -= (h * tab.X(j, l)) * blk.matrix;
      out.blocks.push_back({blk.indices, Eigen::PartialPivLU<Matrix>(M)});
    }
    return cache_.emplace(key, std::move(out)).first->second;
  }

  static void apply_inverse(const BlockFactors& factors, Matrix& R) {
    const Index s = R.cols();
    Vector local, solved;
    for (const auto& blk : factors.blocks) {
      const auto nb = static_cast<Index>(blk.indices.size());
      local.resize(s * nb);
      for (Index j = 0; j < s; ++j)
        for (Index a = 0; a < nb; ++a) local(j * nb + a) = R(blk.indices[a], j);
      solved = blk.lu.solve(local);
      for (Index j = 0; j < s; ++j)
        for (Index a = 0; a < nb; ++a) R(blk.indices[a], j) = solved(j * nb + a);
    }
  }

  static constexpr std::size_t kMaxCached = 16;

  const HamiltonianSystem* system_;
  SolverConfig cfg_;
  std::map<Key, BlockFactors> cache_;
};

/// One-shot solve without factorization reuse.
inline GammaSolution solve_gamma(const HamiltonianSystem& system, const Vector& y0, double h,
                                 const HbvmTableau& tab, const SolverConfig& cfg = {},
                                 const GammaSolution* guess = nullptr) {
  GammaSolver solver(system, cfg);
  return solver.solve(y0, h, tab, guess);
}

inline std::pair<Vector, GammaSolution> step(const HamiltonianSystem& system, const Vector& y0,
                                             double h, const HbvmTableau& tab,
                                             const SolverConfig& cfg = {},
                                             const GammaSolution* guess = nullptr) {
  GammaSolver solver(system, cfg);
  return solver.step(y0, h, tab, guess);
}

}  // namespace hbvm
