#pragma once

// Runtime selection of the basis size s from the decay of the gamma
// coefficients. After each step:
//   rho_s     > tol  ->  s += 2 for the next step,
//   rho_{s-2} <= tol ->  s -= 2 for the next step,
// where rho_{s-2} is recomputed from the stored coefficient norms with the
// last two dropped. The step just taken is never repeated.

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "hbvm/solver.hpp"
#include "hbvm/tableau.hpp"

namespace hbvm {

struct ControllerState {
  std::size_t s = 2;
  std::size_t k = 20;
  double tol = 1e-11;
  std::size_t s_min = 2;
  std::size_t s_max = 40;
  std::size_t delta = 2;
  /// Degree of a polynomial Hamiltonian; selects the exact-quadrature k rule.
  std::optional<std::size_t> nu;
  std::size_t s_max_events = 0;

  static ControllerState with(std::size_t s, double tol, std::optional<std::size_t> nu = std::nullopt) {
    ControllerState st;
    st.s = s;
    st.tol = tol;
    st.nu = nu;
    st.k = k_rule(s, nu);
    return st;
  }
};

struct AdaptiveStepResult {
  Vector y1;
  GammaSolution diag;
  std::size_t s_used = 0;
  std::size_t k_used = 0;
  bool s_max_exceeded = false;
};

/// Tableaux are cheap but not free to build; the adaptive path reuses them.
class TableauCache {
 public:
  const HbvmTableau& get(std::size_t k, std::size_t s) {
    auto key = std::make_pair(k, s);
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, build_tableau(k, s)).first;
    return it->second;
  }

 private:
  std::map<std::pair<std::size_t, std::size_t>, HbvmTableau> cache_;
};

/// Applies the controller policy to the coefficients of a completed step.
/// Returns true when s_max is hit while rho_s is still above tol.
inline bool update_controller(ControllerState& st, const std::vector<double>& norms) {
  bool exceeded = false;
  const double rho_s = rho_ratio(norms);
  if (rho_s > st.tol) {
    if (st.s + st.delta <= st.s_max) {
      st.s += st.delta;
    } else {
      exceeded = true;
      st.s = st.s_max;
      ++st.s_max_events;
    }
  } else if (st.s >= st.s_min + st.delta) {
    const std::vector<double> shorter(norms.begin(), norms.end() - static_cast<std::ptrdiff_t>(st.delta));
    if (rho_ratio(shorter) <= st.tol) st.s -= st.delta;
  }
  st.k = k_rule(st.s, st.nu);
  return exceeded;
}

inline AdaptiveStepResult adaptive_step(GammaSolver& solver, TableauCache& tableaux, const Vector& y0,
                                        double h, ControllerState& st,
                                        const GammaSolution* guess = nullptr) {
  const HbvmTableau& tab = tableaux.get(st.k, st.s);
  auto [y1, diag] = solver.step(y0, h, tab, guess);
  AdaptiveStepResult out;
  out.s_used = st.s;
  out.k_used = st.k;
  out.s_max_exceeded = update_controller(st, gamma_norms(diag.gammas));
  out.y1 = std::move(y1);
  out.diag = std::move(diag);
  return out;
}

/// Picks the starting s before the first step: solves the first step's
/// discrete problem with growing s (without advancing) until rho_s <= tol or
/// s_max is reached. The state's s and k are updated in place.
inline GammaSolution calibrate_initial_s(GammaSolver& solver, TableauCache& tableaux, const Vector& y0,
                                         double h, ControllerState& st) {
  GammaSolution sol;
  for (;;) {
    const HbvmTableau& tab = tableaux.get(st.k, st.s);
    sol = solver.solve(y0, h, tab, sol.gammas.size() > 0 ? &sol : nullptr);
    if (sol.rho <= st.tol || st.s + st.delta > st.s_max) break;
    st.s += st.delta;
    st.k = k_rule(st.s, st.nu);
  }
  return sol;
}

}  // namespace hbvm
