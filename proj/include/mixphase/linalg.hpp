#pragma once

// Small dense complex linear algebra for N-level systems (N <= 8), with
// unrolled paths for the two-level case that dominates this library.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>

#include "mixphase/errors.hpp"

namespace mixphase {

using Complex = std::complex<double>;

inline constexpr Complex kI{0.0, 1.0};

template <std::size_t N>
class CVector {
  static_assert(N >= 1 && N <= 8, "CVector supports 1..8 components");

 public:
  constexpr CVector() = default;
  CVector(std::initializer_list<Complex> values) {
    std::size_t i = 0;
    for (auto v : values) {
      if (i == N) break;
      c_[i++] = v;
    }
  }

  static constexpr std::size_t dim() { return N; }

  Complex& operator[](std::size_t i) { return c_[i]; }
  const Complex& operator[](std::size_t i) const { return c_[i]; }

  std::span<const Complex, N> entries() const { return c_; }

  static CVector unit(std::size_t k) {
    CVector e;
    e.c_[k] = 1.0;
    return e;
  }

  CVector& operator*=(Complex s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  CVector& operator+=(const CVector& o) {
    for (std::size_t i = 0; i < N; ++i) c_[i] += o.c_[i];
    return *this;
  }
  CVector& operator-=(const CVector& o) {
    for (std::size_t i = 0; i < N; ++i) c_[i] -= o.c_[i];
    return *this;
  }

 private:
  std::array<Complex, N> c_{};
};

template <std::size_t N>
CVector<N> operator*(Complex s, CVector<N> v) {
  return v *= s;
}
template <std::size_t N>
CVector<N> operator+(CVector<N> a, const CVector<N>& b) {
  return a += b;
}
template <std::size_t N>
CVector<N> operator-(CVector<N> a, const CVector<N>& b) {
  return a -= b;
}

/// <a|b>, antilinear in the first argument.
template <std::size_t N>
Complex inner(const CVector<N>& a, const CVector<N>& b) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <std::size_t N>
double norm(const CVector<N>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::norm(v[i]);
  return std::sqrt(s);
}

template <std::size_t N>
CVector<N> normalized(const CVector<N>& v) {
  const double n = norm(v);
  if (!(n > 0.0)) throw InvalidArgument("cannot normalize a zero vector");
  return Complex(1.0 / n) * v;
}

/// Multiplies v by a unit phase so that its largest-magnitude component is
/// real and positive (first index wins ties).
template <std::size_t N>
CVector<N> fix_gauge(const CVector<N>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  const double m = std::abs(v[best]);
  if (m == 0.0) return v;
  CVector<N> out = (std::conj(v[best]) / m) * v;
  out[best] = Complex(std::abs(out[best]), 0.0);
  return out;
}

/// Square complex matrix stored row-major.
template <std::size_t N>
class CMatrix {
  static_assert(N >= 1 && N <= 8, "CMatrix supports dimensions 1..8");

 public:
  constexpr CMatrix() = default;
  CMatrix(std::initializer_list<std::initializer_list<Complex>> rows) {
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (r == N) break;
      std::size_t c = 0;
      for (auto v : row) {
        if (c == N) break;
        a_[r * N + c++] = v;
      }
      ++r;
    }
  }

  static constexpr std::size_t dim() { return N; }

  static CMatrix identity() {
    CMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  static CMatrix diagonal(const std::array<Complex, N>& d) {
    CMatrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = d[i];
    return m;
  }

  Complex& operator()(std::size_t r, std::size_t c) { return a_[r * N + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const {
    return a_[r * N + c];
  }

  std::span<const Complex, N * N> entries() const { return a_; }

  CMatrix& operator+=(const CMatrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] += o.a_[i];
    return *this;
  }
  CMatrix& operator-=(const CMatrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  CMatrix& operator*=(Complex s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend bool operator==(const CMatrix&, const CMatrix&) = default;

 private:
  std::array<Complex, N * N> a_{};
};

template <std::size_t N>
CMatrix<N> operator+(CMatrix<N> a, const CMatrix<N>& b) {
  return a += b;
}
template <std::size_t N>
CMatrix<N> operator-(CMatrix<N> a, const CMatrix<N>& b) {
  return a -= b;
}
template <std::size_t N>
CMatrix<N> operator*(Complex s, CMatrix<N> a) {
  return a *= s;
}

template <std::size_t N>
CMatrix<N> multiply(const CMatrix<N>& A, const CMatrix<N>& B) {
  CMatrix<N> C;
  if constexpr (N == 2) {
    C(0, 0) = A(0, 0) * B(0, 0) + A(0, 1) * B(1, 0);
    C(0, 1) = A(0, 0) * B(0, 1) + A(0, 1) * B(1, 1);
    C(1, 0) = A(1, 0) * B(0, 0) + A(1, 1) * B(1, 0);
    C(1, 1) = A(1, 0) * B(0, 1) + A(1, 1) * B(1, 1);
  } else {
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < N; ++k) {
        const Complex aik = A(i, k);
        for (std::size_t j = 0; j < N; ++j) C(i, j) += aik * B(k, j);
      }
  }
  return C;
}

template <std::size_t N>
CMatrix<N> operator*(const CMatrix<N>& A, const CMatrix<N>& B) {
  return multiply(A, B);
}

template <std::size_t N>
CVector<N> operator*(const CMatrix<N>& A, const CVector<N>& v) {
  CVector<N> out;
  for (std::size_t i = 0; i < N; ++i) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < N; ++j) s += A(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

template <std::size_t N>
CMatrix<N> adjoint(const CMatrix<N>& A) {
  CMatrix<N> out;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) out(i, j) = std::conj(A(j, i));
  return out;
}

template <std::size_t N>
Complex trace(const CMatrix<N>& A) {
  Complex s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += A(i, i);
  return s;
}

template <std::size_t N>
double frobenius_norm(const CMatrix<N>& A) {
  double s = 0.0;
  for (auto x : A.entries()) s += std::norm(x);
  return std::sqrt(s);
}

template <std::size_t N>
double frobenius_distance(const CMatrix<N>& A, const CMatrix<N>& B) {
  return frobenius_norm(A - B);
}

/// |a><b|
template <std::size_t N>
CMatrix<N> outer(const CVector<N>& a, const CVector<N>& b) {
  CMatrix<N> m;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) m(i, j) = a[i] * std::conj(b[j]);
  return m;
}

// ||A - A^dagger||_F
template <std::size_t N>
double hermiticity_defect(const CMatrix<N>& A) {
  return frobenius_distance(A, adjoint(A));
}

// ||U^dagger U - I||_F
template <std::size_t N>
double unitarity_defect(const CMatrix<N>& U) {
  return frobenius_distance(adjoint(U) * U, CMatrix<N>::identity());
}

template <std::size_t N>
CMatrix<N> inverse(const CMatrix<N>& A) {
  if constexpr (N == 2) {
    const Complex det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    if (std::abs(det) == 0.0) throw InvalidArgument("singular matrix");
    return {{A(1, 1) / det, -A(0, 1) / det}, {-A(1, 0) / det, A(0, 0) / det}};
  } else {
    CMatrix<N> a = A;
    CMatrix<N> inv = CMatrix<N>::identity();
    for (std::size_t col = 0; col < N; ++col) {
      std::size_t piv = col;
      for (std::size_t r = col + 1; r < N; ++r)
        if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
      if (std::abs(a(piv, col)) == 0.0) throw InvalidArgument("singular matrix");
      if (piv != col)
        for (std::size_t c = 0; c < N; ++c) {
          std::swap(a(piv, c), a(col, c));
          std::swap(inv(piv, c), inv(col, c));
        }
      const Complex p = 1.0 / a(col, col);
      for (std::size_t c = 0; c < N; ++c) {
        a(col, c) *= p;
        inv(col, c) *= p;
      }
      for (std::size_t r = 0; r < N; ++r) {
        if (r == col) continue;
        const Complex f = a(r, col);
        if (f == 0.0) continue;
        for (std::size_t c = 0; c < N; ++c) {
          a(r, c) -= f * a(col, c);
          inv(r, c) -= f * inv(col, c);
        }
      }
    }
    return inv;
  }
}

/// Nearest unitary (polar factor) via the Newton iteration
/// X <- (X + X^{-dagger}) / 2. Intended for matrices already close to unitary.
template <std::size_t N>
CMatrix<N> polar_project(const CMatrix<N>& U) {
  CMatrix<N> x = U;
  for (int it = 0; it < 12; ++it) {
    CMatrix<N> next = Complex(0.5) * (x + adjoint(inverse(x)));
    const double step = frobenius_distance(next, x);
    x = next;
    if (step <= 1e-15) break;
  }
  return x;
}

/// General matrix exponential by scaling and squaring of a truncated Taylor
/// series. Accurate to a few ulps for the small, moderately normed
/// generators used here.
template <std::size_t N>
CMatrix<N> expm(const CMatrix<N>& A) {
  double n1 = 0.0;
  for (std::size_t j = 0; j < N; ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < N; ++i) col += std::abs(A(i, j));
    n1 = std::max(n1, col);
  }
  int squarings = 0;
  if (n1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(n1 / 0.5)));
  const CMatrix<N> scaled = Complex(std::ldexp(1.0, -squarings)) * A;

  CMatrix<N> result = CMatrix<N>::identity();
  CMatrix<N> term = CMatrix<N>::identity();
  for (int k = 1; k <= 20; ++k) {
    term = Complex(1.0 / k) * (term * scaled);
    result += term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

// Pauli matrices.
inline CMatrix<2> sigma_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
inline CMatrix<2> sigma_y() { return {{0.0, -kI}, {kI, 0.0}}; }
inline CMatrix<2> sigma_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

/// exp(-i (a . sigma) t) = cos(|a|t) I - i sin(|a|t) (a/|a|) . sigma
inline CMatrix<2> su2_exponential(const std::array<double, 3>& a, double t) {
  const double mag = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  if (mag == 0.0) return CMatrix<2>::identity();
  const double nx = a[0] / mag, ny = a[1] / mag, nz = a[2] / mag;
  const double c = std::cos(mag * t), s = std::sin(mag * t);
  // -i s (n . sigma)
  return {{Complex(c, -s * nz), Complex(-s * ny, -s * nx)},
          {Complex(s * ny, -s * nx), Complex(c, s * nz)}};
}

/// Result of Phi[z] = z / |z|.
struct PhaseFactor {
  Complex raw;   // argument of Phi before normalisation
  Complex unit;  // raw / |raw|
  double arg;    // principal argument in (-pi, pi]
};

/// |z| at or below this is treated as a vanished interference visibility.
inline constexpr double kPhaseThreshold = 1e-12;

inline PhaseFactor phase_functional(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidArgument("phase_functional: non-finite input");
  const double mag = std::abs(z);
  if (mag <= kPhaseThreshold)
    throw UndefinedPhase("interference visibility vanished: |z| = " +
                         std::to_string(mag));
  double arg = std::arg(z);
  if (arg <= -std::numbers::pi) arg = std::numbers::pi;
  return {z, z / mag, arg};
}

struct Eigh2 {
  double E1;  // E1 >= E2
  double E2;
  CVector<2> v1;
  CVector<2> v2;
};

/// Eigen-decomposition of a 2x2 Hermitian matrix, eigenvalues descending,
/// each eigenvector gauge-fixed (see fix_gauge).
inline Eigh2 eigh_2x2(const CMatrix<2>& H) {
  if (hermiticity_defect(H) > 1e-10)
    throw NotHermitian("eigh_2x2: input is not Hermitian");
  const double a = H(0, 0).real();
  const double d = H(1, 1).real();
  const Complex b = 0.5 * (H(0, 1) + std::conj(H(1, 0)));
  const double mean = 0.5 * (a + d);
  const double half = 0.5 * (a - d);
  const double r = std::hypot(half, std::abs(b));

  Eigh2 out{mean + r, mean - r, CVector<2>::unit(0), CVector<2>::unit(1)};
  if (r == 0.0) return out;

  // Null vector of H - E1 taken from whichever row is better conditioned.
  CVector<2> v = half >= 0.0 ? CVector<2>{Complex(r + half), std::conj(b)}
                             : CVector<2>{b, Complex(r - half)};
  v = normalized(v);
  out.v1 = fix_gauge(v);
  out.v2 = fix_gauge(CVector<2>{-std::conj(v[1]), std::conj(v[0])});
  return out;
}

}  // namespace mixphase
