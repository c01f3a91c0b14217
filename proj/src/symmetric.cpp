#include "hflow/symmetric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hflow {

double dense_det(const double m[kMaxDim][kMaxDim], int n) {
  switch (n) {
    case 1:
      return m[0][0];
    case 2:
      return m[0][0] * m[1][1] - m[0][1] * m[1][0];
    case 3:
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    default: {
      // Cofactor expansion along the first row into 3x3 minors.
      double d = 0;
      for (int c = 0; c < 4; ++c) {
        double minor[kMaxDim][kMaxDim];
        for (int r = 1; r < 4; ++r) {
          int cc = 0;
          for (int k = 0; k < 4; ++k) {
            if (k == c) continue;
            minor[r - 1][cc++] = m[r][k];
          }
        }
        double d3 = dense_det(minor, 3);
        d += (c % 2 == 0 ? 1.0 : -1.0) * m[0][c] * d3;
      }
      return d;
    }
  }
}

double SymMatrix::det() const {
  double m[kMaxDim][kMaxDim] = {};
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m[i][j] = (*this)(i, j);
  return dense_det(m, n_);
}

double SymMatrix::frobenius_norm() const {
  double s = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * (*this)(i, j);
  return std::sqrt(s);
}

double SymMatrix::max_abs() const {
  double m = 0;
  for (int c = 0; c < sym_comp_count(n_); ++c) m = std::max(m, std::abs(v_[c]));
  return m;
}

EigenSpectrum sym_eigenvalues(const SymMatrix& s) {
  const int n = s.dim();
  double a[kMaxDim][kMaxDim] = {};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = s(i, j);

  const double norm = s.frobenius_norm();
  const double target = 1e-13 * norm;

  const int max_sweeps = 64;
  bool converged = false;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * a[p][q] * a[p][q];
    off = std::sqrt(off);
    if (off <= target) {
      converged = true;
      break;
    }
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t =
            (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        const double tau = sn / (1.0 + c);
        const double apq = a[p][q];
        a[p][p] -= t * apq;
        a[q][q] += t * apq;
        a[p][q] = 0.0;
        a[q][p] = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = akp - sn * (akq + tau * akp);
          a[p][k] = a[k][p];
          a[k][q] = akq + sn * (akp - tau * akq);
          a[q][k] = a[k][q];
        }
      }
    }
  }
  if (!converged) throw std::logic_error("sym_eigenvalues: jacobi sweep cap exceeded");

  EigenSpectrum e;
  e.n = n;
  for (int i = 0; i < n; ++i) e.lambda[i] = a[i][i];
  std::sort(e.lambda.begin(), e.lambda.begin() + n);
  return e;
}

}  // namespace hflow
