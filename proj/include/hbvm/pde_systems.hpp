#pragma once

// Fourier semi-discretizations of three Hamiltonian PDEs.
//
// All nonlinear terms are evaluated on the periodic grid x_0..x_{m-1}, the
// pointwise nonlinearity applied there, and the result projected back with
// the trapezoidal rule. For periodic data this equals the closed-grid rule
// used by FourierBasis::trapezoid.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "hbvm/fourier.hpp"
#include "hbvm/system.hpp"

namespace hbvm {

/// Potential f of the semilinear wave equation u_tt = u_xx - f'(u).
struct WavePotential {
  std::function<double(double)> f;
  std::function<double(double)> df;

  /// f(u) = 1 - cos u, so f(0) = 0 and f' = sin.
  static WavePotential sine_gordon() {
    return {[](double u) { return 1.0 - std::cos(u); }, [](double u) { return std::sin(u); }};
  }
  static WavePotential none() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
  }
};

/// Semilinear wave equation in first-order form, state y = [q; p]:
///   q' = p,   p' = -D^T D q - int w f'(w^T q).
class WaveSystem final : public HamiltonianSystem {
 public:
  using HamiltonianSystem::rhs;

  WaveSystem(FourierBasis basis, WavePotential potential = WavePotential::sine_gordon())
      : basis_(std::move(basis)),
        potential_(std::move(potential)),
        tr_(&basis_.transform(Layout::WaveNls)),
        lap_(wave_laplacian_diag(basis_)) {
    const Index n = coeff_size();
    for (Index r = 0; r < n; ++r) {
      Matrix L(2, 2);
      L << 0.0, 1.0, -lap_(r), 0.0;
      blocks_.push_back({{r, n + r}, L});
    }
  }

  const FourierBasis& basis() const { return basis_; }
  Index coeff_size() const { return basis_.size(Layout::WaveNls); }
  Index dim() const override { return 2 * coeff_size(); }

  void rhs(const Matrix& Y, Matrix& F) const override {
    const Index n = coeff_size();
    F.resize(Y.rows(), Y.cols());
    Matrix U = tr_->to_grid(Y.topRows(n));
    U = U.unaryExpr(potential_.df);
    F.topRows(n) = Y.bottomRows(n);
    F.bottomRows(n).noalias() = -(lap_.asDiagonal() * Y.topRows(n));
    F.bottomRows(n) -= tr_->to_coeffs(U);
  }

  std::pair<Vector, Vector> rhs_qp(const Vector& q, const Vector& p) const {
    Vector y(dim());
    y << q, p;
    const Vector f = HamiltonianSystem::rhs(y);
    return {f.head(coeff_size()), f.tail(coeff_size())};
  }

  Vector gradient(const Vector& y) const override {
    const Index n = coeff_size();
    Vector g(dim());
    const Vector u = tr_->to_grid(y.head(n));
    g.head(n) = lap_.cwiseProduct(y.head(n)) + tr_->to_coeffs(u.unaryExpr(potential_.df));
    g.tail(n) = y.tail(n);
    return g;
  }

  double hamiltonian(const Vector& y) const override {
    const Index n = coeff_size();
    const Vector q = y.head(n);
    const Vector p = y.tail(n);
    const Vector u = tr_->to_grid(q);
    const double potential = tr_->weight() * u.unaryExpr(potential_.f).sum();
    return 0.5 * (p.squaredNorm() + q.dot(lap_.cwiseProduct(q)) + 2.0 * potential);
  }

  const std::vector<LinearBlock>& linear_blocks() const override { return blocks_; }

 private:
  FourierBasis basis_;
  WavePotential potential_;
  const PeriodicTransform* tr_;
  Vector lap_;
  std::vector<LinearBlock> blocks_;
};

/// Nonlinear Schroedinger equation in real form, y = [q; p] for (u, v):
///   q' =  D^T D p - int w f'(u^2+v^2) v,
///   p' = -D^T D q + int w f'(u^2+v^2) u,
/// with f(sigma) = strength/2 * sigma^2, i.e. f'(sigma) = strength * sigma.
/// strength = 2 gives u_t = -v_xx - 2 (u^2+v^2) v.
class NlsSystem final : public HamiltonianSystem {
 public:
  using HamiltonianSystem::rhs;

  explicit NlsSystem(FourierBasis basis, double strength = 2.0)
      : basis_(std::move(basis)),
        strength_(strength),
        tr_(&basis_.transform(Layout::WaveNls)),
        lap_(wave_laplacian_diag(basis_)),
        D_(wave_diff_matrix(basis_)) {
    const Index n = coeff_size();
    for (Index r = 0; r < n; ++r) {
      Matrix L(2, 2);
      L << 0.0, lap_(r), -lap_(r), 0.0;
      blocks_.push_back({{r, n + r}, L});
    }
  }

  const FourierBasis& basis() const { return basis_; }
  double strength() const { return strength_; }
  Index coeff_size() const { return basis_.size(Layout::WaveNls); }
  Index dim() const override { return 2 * coeff_size(); }

  void rhs(const Matrix& Y, Matrix& F) const override {
    const Index n = coeff_size();
    const Index K = Y.cols();
    F.resize(Y.rows(), K);
    Matrix UV(static_cast<Index>(tr_->points()), 2 * K);
    UV.leftCols(K).noalias() = tr_->to_grid(Y.topRows(n));
    UV.rightCols(K).noalias() = tr_->to_grid(Y.bottomRows(n));
    const auto u = UV.leftCols(K).array();
    const auto v = UV.rightCols(K).array();
    const Eigen::ArrayXXd g = strength_ * (u.square() + v.square());
    Matrix GV(static_cast<Index>(tr_->points()), 2 * K);
    GV.leftCols(K) = (g * v).matrix();
    GV.rightCols(K) = (g * u).matrix();
    const Matrix proj = tr_->to_coeffs(GV);
    F.topRows(n) = lap_.asDiagonal() * Y.bottomRows(n) - proj.leftCols(K);
    F.bottomRows(n) = -(lap_.asDiagonal() * Y.topRows(n)) + proj.rightCols(K);
  }

  std::pair<Vector, Vector> rhs_qp(const Vector& q, const Vector& p) const {
    Vector y(dim());
    y << q, p;
    const Vector f = HamiltonianSystem::rhs(y);
    return {f.head(coeff_size()), f.tail(coeff_size())};
  }

  Vector gradient(const Vector& y) const override {
    const Index n = coeff_size();
    const Vector u = tr_->to_grid(y.head(n));
    const Vector v = tr_->to_grid(y.tail(n));
    const Eigen::ArrayXd g = strength_ * (u.array().square() + v.array().square());
    Vector out(dim());
    out.head(n) = lap_.cwiseProduct(y.head(n)) - tr_->to_coeffs((g * u.array()).matrix());
    out.tail(n) = lap_.cwiseProduct(y.tail(n)) - tr_->to_coeffs((g * v.array()).matrix());
    return out;
  }

  double hamiltonian(const Vector& y) const override {
    const Index n = coeff_size();
    const Vector q = y.head(n);
    const Vector p = y.tail(n);
    const Vector u = tr_->to_grid(q);
    const Vector v = tr_->to_grid(p);
    const Eigen::ArrayXd sigma = u.array().square() + v.array().square();
    const double density = tr_->weight() * (0.5 * strength_ * sigma.square()).sum();
    return 0.5 * (p.dot(lap_.cwiseProduct(p)) + q.dot(lap_.cwiseProduct(q)) - density);
  }

  /// M_1 = int (u^2 + v^2),  M_2 = 2 q^T D p.
  std::pair<double, double> quadratic_invariants(const Vector& y) const {
    const Index n = coeff_size();
    const Vector u = tr_->to_grid(y.head(n));
    const Vector v = tr_->to_grid(y.tail(n));
    const double m1 = tr_->weight() * (u.squaredNorm() + v.squaredNorm());
    const double m2 = 2.0 * y.head(n).dot(D_ * y.tail(n));
    return {m1, m2};
  }

  std::vector<NamedValue> invariants(const Vector& y) const override {
    const auto [m1, m2] = quadratic_invariants(y);
    return {{"M1", m1}, {"M2", m2}};
  }

  const std::vector<LinearBlock>& linear_blocks() const override { return blocks_; }

 private:
  FourierBasis basis_;
  double strength_;
  const PeriodicTransform* tr_;
  Vector lap_;
  Matrix D_;
  std::vector<LinearBlock> blocks_;
};

/// KdV u_t = nu u_xxx + mu u u_x on the zero-mean layout, u = mean + w^T y:
///   y' = (Dhat (x) J2) grad H,
///   H  = 1/2 [ -nu y^T (Dhat^2 (x) I2) y + mu/3 int u^3 ].
/// The constant `mean` is the (time-invariant) mean value of u.
///
/// The linear part handed to the solver also carries the transport by the
/// mean, mu * mean * u_x, which is the quadratic part of the cubic term.
class KdvSystem final : public HamiltonianSystem {
 public:
  using HamiltonianSystem::rhs;

  KdvSystem(FourierBasis basis, double nu, double mu, double mean)
      : basis_(std::move(basis)), nu_(nu), mu_(mu), mean_(mean), tr_(&basis_.transform(Layout::Kdv)), d_(kdv_dhat(basis_)) {
    for (Index j = 0; j < d_.size(); ++j) {
      const double lambda = d_(j) * (-nu_ * d_(j) * d_(j) + mu_ * mean_);
      Matrix L(2, 2);
      L << 0.0, lambda, -lambda, 0.0;
      blocks_.push_back({{2 * j, 2 * j + 1}, L});
    }
  }

  const FourierBasis& basis() const { return basis_; }
  double nu() const { return nu_; }
  double mu() const { return mu_; }
  double mean() const { return mean_; }
  Index dim() const override { return basis_.size(Layout::Kdv); }

  void rhs(const Matrix& Y, Matrix& F) const override {
    Matrix U = tr_->to_grid(Y);
    U.array() += mean_;
    Matrix G = (0.5 * mu_) * (tr_->to_coeffs(U.array().square().matrix()));
    for (Index j = 0; j < d_.size(); ++j) {
      const double lin = -nu_ * d_(j) * d_(j);
      G.row(2 * j) += lin * Y.row(2 * j);
      G.row(2 * j + 1) += lin * Y.row(2 * j + 1);
    }
    apply_structure(G, F);
  }

  Vector gradient(const Vector& y) const override {
    Vector u = tr_->to_grid(y);
    u.array() += mean_;
    Vector g = (0.5 * mu_) * (tr_->to_coeffs(u.array().square().matrix()));
    for (Index j = 0; j < d_.size(); ++j) {
      const double lin = -nu_ * d_(j) * d_(j);
      g(2 * j) += lin * y(2 * j);
      g(2 * j + 1) += lin * y(2 * j + 1);
    }
    return g;
  }

  double hamiltonian(const Vector& y) const override {
    double quad = 0.0;
    for (Index j = 0; j < d_.size(); ++j)
      quad += d_(j) * d_(j) * (y(2 * j) * y(2 * j) + y(2 * j + 1) * y(2 * j + 1));
    Vector u = tr_->to_grid(y);
    u.array() += mean_;
    const double cubic = tr_->weight() * u.array().cube().sum();
    return 0.5 * (-nu_ * quad + mu_ / 3.0 * cubic);
  }

  const std::vector<LinearBlock>& linear_blocks() const override { return blocks_; }

  /// F = (Dhat (x) J2) G, column-wise.
  void apply_structure(const Matrix& G, Matrix& F) const {
    F.resize(G.rows(), G.cols());
    for (Index j = 0; j < d_.size(); ++j) {
      F.row(2 * j) = d_(j) * G.row(2 * j + 1);
      F.row(2 * j + 1) = -d_(j) * G.row(2 * j);
    }
  }

 private:
  FourierBasis basis_;
  double nu_, mu_, mean_;
  const PeriodicTransform* tr_;
  Vector d_;
  std::vector<LinearBlock> blocks_;
};

}  // namespace hbvm
