#pragma once

#include <array>
#include <cassert>

namespace hflow {

inline constexpr int kMaxDim = 4;
inline constexpr int kMaxSymComp = kMaxDim * (kMaxDim + 1) / 2;

// Eigenvalues at or below this floor count as loss of positive definiteness.
inline constexpr double kPositivityFloor = 1e-10;

constexpr int sym_comp_count(int n) { return n * (n + 1) / 2; }

// Packed index of the (i,j) entry of an n x n symmetric matrix,
// upper triangle stored row by row.
constexpr int sym_index(int n, int i, int j) {
  int a = i < j ? i : j;
  int b = i < j ? j : i;
  return a * n - a * (a - 1) / 2 + (b - a);
}

// Small dense symmetric matrix, dimensions 1..4, packed upper triangle.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int n) : n_(n) { assert(n >= 1 && n <= kMaxDim); }

  static SymMatrix identity(int n) {
    SymMatrix m(n);
    for (int i = 0; i < n; ++i) m.entry(i, i) = 1.0;
    return m;
  }

  int dim() const { return n_; }

  double operator()(int i, int j) const { return v_[sym_index(n_, i, j)]; }
  double& entry(int i, int j) { return v_[sym_index(n_, i, j)]; }

  double comp(int c) const { return v_[c]; }
  double& comp(int c) { return v_[c]; }

  double trace() const {
    double t = 0;
    for (int i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  double det() const;
  double frobenius_norm() const;
  double max_abs() const;

  SymMatrix& operator+=(const SymMatrix& o) {
    for (int c = 0; c < sym_comp_count(n_); ++c) v_[c] += o.v_[c];
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    for (int c = 0; c < sym_comp_count(n_); ++c) v_[c] -= o.v_[c];
    return *this;
  }
  SymMatrix& operator*=(double s) {
    for (int c = 0; c < sym_comp_count(n_); ++c) v_[c] *= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

 private:
  int n_ = 0;
  std::array<double, kMaxSymComp> v_{};
};

// Eigenvalues of a symmetric matrix, sorted ascending.
struct EigenSpectrum {
  int n = 0;
  std::array<double, kMaxDim> lambda{};

  double min() const { return lambda[0]; }
  double max() const { return lambda[n - 1]; }
};

// Cyclic Jacobi rotations; drives the off-diagonal norm below 1e-13 * |S|_F.
// Throws std::logic_error if the sweep cap is hit (internal defect).
EigenSpectrum sym_eigenvalues(const SymMatrix& s);

// Determinant of a small dense matrix by cofactor expansion, n <= 4.
double dense_det(const double m[kMaxDim][kMaxDim], int n);

}  // namespace hflow
