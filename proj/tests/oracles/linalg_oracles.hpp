#pragma once

// Small dense linear algebra written out by hand, independent of Eigen's
// decompositions. Used only as test oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix zeros(std::size_t r, std::size_t c) { return Matrix(r, std::vector<double>(c, 0.0)); }

inline Matrix transpose(const Matrix& a) {
  Matrix t = zeros(a.empty() ? 0 : a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  Matrix c = zeros(a.size(), b.empty() ? 0 : b[0].size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix inverse(Matrix a) {
  const std::size_t n = a.size();
  Matrix inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) inv[i][i] = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
    if (std::fabs(a[p][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[p], a[c]);
    std::swap(inv[p], inv[c]);
    const double piv = a[c][c];
    for (std::size_t j = 0; j < n; ++j) {
      a[c][j] /= piv;
      inv[c][j] /= piv;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a[r][c];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a[r][j] -= f * a[c][j];
        inv[r][j] -= f * inv[c][j];
      }
    }
  }
  return inv;
}

/// Solves (X'X) b = X'y via the normal equations.
inline std::vector<double> least_squares(const Matrix& x, const std::vector<double>& y) {
  const Matrix xt = transpose(x);
  const Matrix xtx_inv = inverse(multiply(xt, x));
  std::vector<double> xty(xt.size(), 0.0);
  for (std::size_t k = 0; k < xt.size(); ++k)
    for (std::size_t i = 0; i < y.size(); ++i) xty[k] += xt[k][i] * y[i];
  std::vector<double> b(xt.size(), 0.0);
  for (std::size_t k = 0; k < b.size(); ++k)
    for (std::size_t j = 0; j < b.size(); ++j) b[k] += xtx_inv[k][j] * xty[j];
  return b;
}

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

/// Cyclic Jacobi rotations; returns the eigenpair with the largest eigenvalue.
inline EigenPair jacobi_top_eigenpair(Matrix a) {
  const std::size_t n = a.size();
  Matrix v = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (a[i][i] > a[best][best]) best = i;
  EigenPair out;
  out.value = a[best][best];
  for (std::size_t k = 0; k < n; ++k) out.vector.push_back(v[k][best]);
  return out;
}

/// Correlation matrix of the columns of `x` (rows are observations).
inline Matrix correlation(const Matrix& x) {
  const std::size_t n = x.size(), k = x[0].size();
  std::vector<double> mean(k, 0.0), sd(k, 0.0);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) mean[c] += x[i][c];
    mean[c] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) sd[c] += (x[i][c] - mean[c]) * (x[i][c] - mean[c]);
    sd[c] = std::sqrt(sd[c] / static_cast<double>(n - 1));
  }
  Matrix r = zeros(k, k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += (x[i][a] - mean[a]) * (x[i][b] - mean[b]);
      r[a][b] = s / static_cast<double>(n - 1) / (sd[a] * sd[b]);
    }
  return r;
}

}  // namespace oracle
