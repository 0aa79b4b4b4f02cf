#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hbvm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// A dense diagonal block of the linear part of a vector field, acting on
/// the state components listed in `indices`.
struct LinearBlock {
  std::vector<Index> indices;
  Matrix matrix;
};

struct NamedValue {
  std::string name;
  double value = 0.0;
};

/// Hamiltonian ODE  y' = phi(y) = S grad H(y)  with S constant and skew.
///
/// The linear part of phi is exposed as a block-diagonal operator so the
/// solver can assemble an approximate Jacobian block by block. Components
/// not covered by any block have zero linear part.
class HamiltonianSystem {
 public:
  virtual ~HamiltonianSystem() = default;

  virtual Index dim() const = 0;

  /// Column-wise vector field: F.col(i) = phi(Y.col(i)). F is resized.
  virtual void rhs(const Matrix& Y, Matrix& F) const = 0;

  virtual Vector gradient(const Vector& y) const = 0;
  virtual double hamiltonian(const Vector& y) const = 0;

  virtual std::vector<NamedValue> invariants(const Vector& /*y*/) const { return {}; }

  virtual const std::vector<LinearBlock>& linear_blocks() const = 0;

  Vector rhs(const Vector& y) const {
    Matrix F;
    rhs(Matrix(y), F);
    return F.col(0);
  }
};

/// y -> L y for the block-diagonal linear part.
inline Vector apply_linear(const std::vector<LinearBlock>& blocks, const Vector& y) {
  Vector out = Vector::Zero(y.size());
  for (const auto& blk : blocks) {
    const auto nb = static_cast<Index>(blk.indices.size());
    Vector local(nb);
    for (Index a = 0; a < nb; ++a) local(a) = y(blk.indices[a]);
    const Vector image = blk.matrix * local;
    for (Index a = 0; a < nb; ++a) out(blk.indices[a]) += image(a);
  }
  return out;
}

/// Canonical symplectic matrix J = [0 I; -I 0] of size 2n.
inline Matrix canonical_j(Index n) {
  Matrix J = Matrix::Zero(2 * n, 2 * n);
  J.topRightCorner(n, n).setIdentity();
  J.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return J;
}

/// y' = J S y with S symmetric: H(y) = y^T S y / 2. Handy for tests and as
/// a model of the linear part of larger systems.
class LinearHamiltonianSystem final : public HamiltonianSystem {
 public:
  using HamiltonianSystem::rhs;

  explicit LinearHamiltonianSystem(Matrix S) : S_(std::move(S)) {
    const Index n = S_.rows() / 2;
    blocks_.push_back({{}, canonical_j(n) * S_});
    for (Index i = 0; i < S_.rows(); ++i) blocks_.front().indices.push_back(i);
  }

  static LinearHamiltonianSystem harmonic_oscillator(double frequency = 1.0) {
    Matrix S(2, 2);
    S << frequency * frequency, 0.0, 0.0, 1.0;
    return LinearHamiltonianSystem(S);
  }

  Index dim() const override { return S_.rows(); }

  void rhs(const Matrix& Y, Matrix& F) const override { F.noalias() = blocks_.front().matrix * Y; }

  Vector gradient(const Vector& y) const override { return S_ * y; }

  double hamiltonian(const Vector& y) const override { return 0.5 * y.dot(S_ * y); }

  const std::vector<LinearBlock>& linear_blocks() const override { return blocks_; }

 private:
  Matrix S_;
  std::vector<LinearBlock> blocks_;
};

}  // namespace hbvm
