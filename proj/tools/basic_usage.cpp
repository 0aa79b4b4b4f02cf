// Minimal library use: energy-conserving steps for a quartic oscillator,
// then one adaptive run of the sine-Gordon benchmark.

#include <cstdio>

#include "hbvm/adaptive.hpp"
#include "hbvm/harness.hpp"

namespace {

// H = p^2/2 + q^4/4.
class QuarticOscillator final : public hbvm::HamiltonianSystem {
 public:
  using HamiltonianSystem::rhs;

  hbvm::Index dim() const override { return 2; }
  void rhs(const hbvm::Matrix& Y, hbvm::Matrix& F) const override {
    F.resize(2, Y.cols());
    F.row(0) = Y.row(1);
    F.row(1) = -Y.row(0).array().cube().matrix();
  }
  hbvm::Vector gradient(const hbvm::Vector& y) const override {
    hbvm::Vector g(2);
    g << y(0) * y(0) * y(0), y(1);
    return g;
  }
  double hamiltonian(const hbvm::Vector& y) const override {
    return 0.5 * y(1) * y(1) + 0.25 * y(0) * y(0) * y(0) * y(0);
  }
  const std::vector<hbvm::LinearBlock>& linear_blocks() const override { return blocks_; }

 private:
  std::vector<hbvm::LinearBlock> blocks_;
};

}  // namespace

int main() {
  const QuarticOscillator sys;
  hbvm::Vector y(2);
  y << 1.0, 0.0;
  const double H0 = sys.hamiltonian(y);

  // s = 2 with enough nodes to integrate the degree-4 energy exactly.
  const hbvm::HbvmTableau tab = hbvm::build_tableau(hbvm::k_rule(2, 4), 2);
  hbvm::GammaSolver solver(sys);
  for (int i = 0; i < 1000; ++i) y = solver.step(y, 0.1, tab).first;
  std::printf("quartic oscillator, HBVM(%zu,2), t=100: |H - H0| = %.2e\n", tab.k, std::abs(sys.hamiltonian(y) - H0));

  hbvm::RunSpec spec;
  spec.problem = hbvm::ProblemKind::SineGordon;
  spec.method.kind = hbvm::MethodKind::Spectral;
  spec.n = 100;
  const hbvm::RunReport rep = hbvm::run(spec);
  std::printf("sine-gordon, spectral in time, n=100: e_u = %.2e, e_H = %.2e, s in [%zu, %zu]\n",
              rep.errors.e_u, rep.errors.e_H, rep.s_min, rep.s_max);
  return rep.completed ? 0 : 1;
}
