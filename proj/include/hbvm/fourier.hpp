#pragma once

// Orthonormal Fourier basis on [a,b] and the composite trapezoidal rule on
// the m+1 equispaced points x_i = a + i (b-a)/m.
//
//   c_0 = 1/sqrt(L),  c_j = sqrt(2/L) cos(2 pi j (x-a)/L),  s_j = sqrt(2/L) sin(...)
//
// Two coefficient layouts are used:
//   Layout::WaveNls  (c_0, s_1, c_1, s_2, c_2, ...)   length 2N+1
//   Layout::Kdv      (c_1, s_1, c_2, s_2, ...)        length 2N, zero mean dropped

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <fftw3.h>

#include "hbvm/errors.hpp"
#include "hbvm/system.hpp"

namespace hbvm {

enum class Layout { WaveNls, Kdv };

/// Grid <-> coefficient transforms on the periodic points x_0..x_{m-1}:
///   synthesize:  U = E C              (values of the expansion)
///   analyze:     C = (L/m) E^T G      (trapezoidal projection)
/// Backed by real FFTs when m >= 2N+1 (no wrap-around of the retained
/// modes), by dense matrices otherwise. Safe for concurrent use.
class PeriodicTransform {
 public:
  PeriodicTransform(double a, double b, std::size_t N, std::size_t m, Layout layout)
      : L_(b - a), N_(N), m_(m), layout_(layout) {
    size_ = static_cast<Index>(layout == Layout::WaveNls ? 2 * N + 1 : 2 * N);
    if (m >= 2 * N + 1) {
      std::vector<double> r(m);
      std::vector<fftw_complex> c(m / 2 + 1);
      std::lock_guard<std::mutex> lock(planner_mutex());
      constexpr unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
      forward_ = fftw_plan_dft_r2c_1d(static_cast<int>(m), r.data(), c.data(), flags);
      backward_ = fftw_plan_dft_c2r_1d(static_cast<int>(m), c.data(), r.data(), flags);
    } else {
      E_.resize(static_cast<Index>(m), size_);
      for (std::size_t i = 0; i < m; ++i) {
        const double x = a + static_cast<double>(i) * L_ / static_cast<double>(m);
        for (Index r = 0; r < size_; ++r) E_(static_cast<Index>(i), r) = basis_value(r, x - a);
      }
    }
  }

  PeriodicTransform(const PeriodicTransform&) = delete;
  PeriodicTransform& operator=(const PeriodicTransform&) = delete;

  ~PeriodicTransform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (forward_ != nullptr) fftw_destroy_plan(forward_);
    if (backward_ != nullptr) fftw_destroy_plan(backward_);
  }

  Index size() const { return size_; }
  std::size_t points() const { return m_; }
  bool uses_fft() const { return forward_ != nullptr; }
  /// Periodic trapezoidal weight L/m.
  double weight() const { return L_ / static_cast<double>(m_); }

  Matrix to_grid(const Matrix& C) const {
    Matrix U;
    synthesize(C, U);
    return U;
  }
  Matrix to_coeffs(const Matrix& G) const {
    Matrix C;
    analyze(G, C);
    return C;
  }

  void synthesize(const Matrix& C, Matrix& U) const {
    const auto m = static_cast<Index>(m_);
    U.resize(m, C.cols());
    if (!uses_fft()) {
      U.noalias() = E_ * C;
      return;
    }
    const double c0 = 1.0 / std::sqrt(L_);
    const double cj = 0.5 * std::sqrt(2.0 / L_);
    std::vector<std::complex<double>> spec(m_ / 2 + 1);
    for (Index col = 0; col < C.cols(); ++col) {
      std::fill(spec.begin(), spec.end(), std::complex<double>(0.0, 0.0));
      if (layout_ == Layout::WaveNls) spec[0] = c0 * C(0, col);
      for (std::size_t j = 1; j <= N_; ++j) {
        const double alpha = C(alpha_index(j), col);
        const double beta = C(beta_index(j), col);
        spec[j] = std::complex<double>(cj * alpha, -cj * beta);
      }
      fftw_execute_dft_c2r(backward_, reinterpret_cast<fftw_complex*>(spec.data()), U.col(col).data());
    }
  }

  void analyze(const Matrix& G, Matrix& C) const {
    C.resize(size_, G.cols());
    const double w = weight();
    if (!uses_fft()) {
      C.noalias() = w * (E_.transpose() * G);
      return;
    }
    const double c0 = w / std::sqrt(L_);
    const double cj = w * std::sqrt(2.0 / L_);
    std::vector<std::complex<double>> spec(m_ / 2 + 1);
    std::vector<double> buf(m_);
    for (Index col = 0; col < G.cols(); ++col) {
      std::copy(G.col(col).data(), G.col(col).data() + m_, buf.begin());
      fftw_execute_dft_r2c(forward_, buf.data(), reinterpret_cast<fftw_complex*>(spec.data()));
      if (layout_ == Layout::WaveNls) C(0, col) = c0 * spec[0].real();
      for (std::size_t j = 1; j <= N_; ++j) {
        C(alpha_index(j), col) = cj * spec[j].real();
        C(beta_index(j), col) = -cj * spec[j].imag();
      }
    }
  }

 private:
  Index alpha_index(std::size_t j) const {
    return layout_ == Layout::WaveNls ? static_cast<Index>(2 * j) : static_cast<Index>(2 * j - 2);
  }
  Index beta_index(std::size_t j) const {
    return static_cast<Index>(2 * j - 1);
  }

  double basis_value(Index r, double xi) const {
    const double theta = 2.0 * std::numbers::pi * xi / L_;
    const double amp = std::sqrt(2.0 / L_);
    if (layout_ == Layout::WaveNls) {
      if (r == 0) return 1.0 / std::sqrt(L_);
      const auto j = static_cast<double>((r + 1) / 2);
      return (r % 2 == 1) ? amp * std::sin(j * theta) : amp * std::cos(j * theta);
    }
    const auto j = static_cast<double>(r / 2 + 1);
    return (r % 2 == 0) ? amp * std::cos(j * theta) : amp * std::sin(j * theta);
  }

  static std::mutex& planner_mutex() {
    static std::mutex mu;
    return mu;
  }

  double L_;
  std::size_t N_, m_;
  Layout layout_;
  Index size_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
  Matrix E_;
};

class FourierBasis {
 public:
  FourierBasis(double a, double b, std::size_t N, std::size_t m) : a_(a), b_(b), N_(N), m_(m) {
    if (!(b > a)) throw InvalidParams("FourierBasis: need b > a");
    if (N < 1) throw InvalidParams("FourierBasis: need N >= 1");
    if (m < 2) throw InvalidParams("FourierBasis: need m >= 2");
    grid_.resize(static_cast<Index>(m + 1));
    for (std::size_t i = 0; i <= m; ++i) grid_(static_cast<Index>(i)) = a + static_cast<double>(i) * (b - a) / static_cast<double>(m);
    weights_ = Vector::Constant(static_cast<Index>(m + 1), (b - a) / static_cast<double>(m));
    weights_(0) *= 0.5;
    weights_(static_cast<Index>(m)) *= 0.5;
    wave_tr_ = std::make_shared<const PeriodicTransform>(a, b, N, m, Layout::WaveNls);
    kdv_tr_ = std::make_shared<const PeriodicTransform>(a, b, N, m, Layout::Kdv);
  }

  double a() const { return a_; }
  double b() const { return b_; }
  double length() const { return b_ - a_; }
  std::size_t N() const { return N_; }
  std::size_t m() const { return m_; }
  /// Wavenumber scale 2 pi / (b - a).
  double omega() const { return 2.0 * std::numbers::pi / length(); }
  const Vector& grid() const { return grid_; }
  const Vector& trapezoid_weights() const { return weights_; }

  /// Products of two basis functions are trig polynomials of degree <= 2N;
  /// the trapezoidal rule integrates them exactly only when m >= 2N+1.
  bool aliasing_risk() const { return m_ < 2 * N_ + 1; }

  Index size(Layout layout) const {
    return static_cast<Index>(layout == Layout::WaveNls ? 2 * N_ + 1 : 2 * N_);
  }

  /// Basis function number r of the given layout at x.
  double basis(Layout layout, std::size_t r, double x) const {
    const double L = length();
    const double theta = 2.0 * std::numbers::pi * (x - a_) / L;
    const double amp = std::sqrt(2.0 / L);
    if (layout == Layout::WaveNls) {
      if (r == 0) return 1.0 / std::sqrt(L);
      const auto j = static_cast<double>((r + 1) / 2);
      return (r % 2 == 1) ? amp * std::sin(j * theta) : amp * std::cos(j * theta);
    }
    const auto j = static_cast<double>(r / 2 + 1);
    return (r % 2 == 0) ? amp * std::cos(j * theta) : amp * std::sin(j * theta);
  }

  /// Rows x_0..x_{rows-1}, columns the basis functions.
  Matrix synthesis(Layout layout, std::size_t rows) const {
    const Index n = size(layout);
    Matrix E(static_cast<Index>(rows), n);
    for (std::size_t i = 0; i < rows; ++i)
      for (Index r = 0; r < n; ++r)
        E(static_cast<Index>(i), r) = basis(layout, static_cast<std::size_t>(r), grid_(static_cast<Index>(i)));
    return E;
  }

  /// Transforms on the periodic points x_0..x_{m-1}; shared between copies.
  const PeriodicTransform& transform(Layout layout) const {
    return layout == Layout::WaveNls ? *wave_tr_ : *kdv_tr_;
  }

  /// (b-a)/m (g_0/2 + g_1 + ... + g_{m-1} + g_m/2).
  double trapezoid(const Vector& values) const {
    if (values.size() != grid_.size())
      throw LayoutMismatch("trapezoid: expected " + std::to_string(grid_.size()) + " values");
    return weights_.dot(values);
  }

  /// u(x_i) = sum_r coeffs_r w_r(x_i) (+ offset) at all m+1 points.
  Vector eval_on_grid(Layout layout, const Vector& coeffs, double offset = 0.0) const {
    check_layout(layout, coeffs);
    const Matrix periodic = transform(layout).to_grid(coeffs);
    Vector out(static_cast<Index>(m_ + 1));
    out.head(static_cast<Index>(m_)) = periodic.col(0);
    out(static_cast<Index>(m_)) = periodic(0, 0);
    out.array() += offset;
    return out;
  }

  /// Trapezoidal approximations of int u w_r over the closed grid.
  Vector project(Layout layout, const Vector& values) const {
    if (values.size() != grid_.size())
      throw LayoutMismatch("project: expected " + std::to_string(grid_.size()) + " grid values");
    // Closed-grid rule = periodic rule with the end values averaged.
    Vector g = values.head(static_cast<Index>(m_));
    g(0) = 0.5 * (values(0) + values(static_cast<Index>(m_)));
    return transform(layout).to_coeffs(g).col(0);
  }

  void check_layout(Layout layout, const Vector& coeffs) const {
    if (coeffs.size() != size(layout))
      throw LayoutMismatch("coefficient vector has length " + std::to_string(coeffs.size()) +
                           ", layout expects " + std::to_string(size(layout)));
  }

 private:
  double a_, b_;
  std::size_t N_, m_;
  Vector grid_;
  Vector weights_;
  std::shared_ptr<const PeriodicTransform> wave_tr_;
  std::shared_ptr<const PeriodicTransform> kdv_tr_;
};

// ---- differentiation operators -------------------------------------------

/// D = (2 pi / L) blockdiag(0, 1 J2, 2 J2, ...) acting on (alpha_0, beta_1, alpha_1, ...).
inline Matrix wave_diff_matrix(const FourierBasis& basis) {
  const Index n = basis.size(Layout::WaveNls);
  Matrix D = Matrix::Zero(n, n);
  for (std::size_t j = 1; j <= basis.N(); ++j) {
    const auto r = static_cast<Index>(2 * j - 1);
    const double d = basis.omega() * static_cast<double>(j);
    D(r, r + 1) = d;
    D(r + 1, r) = -d;
  }
  return D;
}

/// Diagonal of D^T D: 0 for the constant mode, (2 pi j / L)^2 for c_j and s_j.
inline Vector wave_laplacian_diag(const FourierBasis& basis) {
  Vector out = Vector::Zero(basis.size(Layout::WaveNls));
  for (std::size_t j = 1; j <= basis.N(); ++j) {
    const double d = basis.omega() * static_cast<double>(j);
    out(static_cast<Index>(2 * j - 1)) = d * d;
    out(static_cast<Index>(2 * j)) = d * d;
  }
  return out;
}

/// Diagonal of Dhat = (2 pi / L) diag(1, ..., N). With this scaling
/// (Dhat (x) J2) is exactly d/dx on the Kdv layout.
inline Vector kdv_dhat(const FourierBasis& basis) {
  Vector out(static_cast<Index>(basis.N()));
  for (std::size_t j = 1; j <= basis.N(); ++j) out(static_cast<Index>(j - 1)) = basis.omega() * static_cast<double>(j);
  return out;
}

/// Dense (Dhat (x) J2), J2 = [0 1; -1 0].
inline Matrix kdv_structure_matrix(const FourierBasis& basis) {
  const Vector d = kdv_dhat(basis);
  const Index n = 2 * d.size();
  Matrix S = Matrix::Zero(n, n);
  for (Index j = 0; j < d.size(); ++j) {
    S(2 * j, 2 * j + 1) = d(j);
    S(2 * j + 1, 2 * j) = -d(j);
  }
  return S;
}

}  // namespace hbvm
