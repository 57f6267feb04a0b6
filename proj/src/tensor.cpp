#include "deltaclip/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace deltaclip {

Matrix::Matrix(int r, int c) : rows(r), cols(c) {
  if (r < 1 || c < 1) {
    throw std::invalid_argument("Matrix: dimensions must be positive, got " +
                                std::to_string(r) + "x" + std::to_string(c));
  }
  data.assign(static_cast<std::size_t>(r) * c, 0.0);
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (int i = 0; i < m.rows; ++i) m(i, i) = d[i];
  return m;
}

Matrix gaussian_matrix(int rows, int cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (auto& x : m.data) x = rng.normal();
  return m;
}

Vector gaussian_vector(int dim, RngStream& rng) {
  if (dim < 1) throw std::invalid_argument("gaussian_vector: dim must be positive");
  Vector v(dim);
  for (auto& x : v) x = rng.normal();
  return v;
}

double l2_norm(const Vector& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double a, const Vector& x, Vector& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

Vector sub(const Vector& a, const Vector& b) {
  Vector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

double dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Vector matvec(const Matrix& m, const Vector& v) {
  if (static_cast<int>(v.size()) != m.cols) {
    throw std::invalid_argument("matvec: dimension mismatch");
  }
  Vector r(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + static_cast<std::size_t>(i) * m.cols;
    double s = 0.0;
    for (int j = 0; j < m.cols; ++j) s += row[j] * v[j];
    r[i] = s;
  }
  return r;
}

Vector matvec_transposed(const Matrix& m, const Vector& v) {
  if (static_cast<int>(v.size()) != m.rows) {
    throw std::invalid_argument("matvec_transposed: dimension mismatch");
  }
  Vector r(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    const double* row = m.data.data() + static_cast<std::size_t>(i) * m.cols;
    const double vi = v[i];
    for (int j = 0; j < m.cols; ++j) r[j] += row[j] * vi;
  }
  return r;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + static_cast<std::size_t>(k) * b.cols;
      double* crow = c.data.data() + static_cast<std::size_t>(i) * c.cols;
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
  return t;
}

bool all_finite(const Vector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool all_finite(const Matrix& m) {
  return all_finite(m.data);
}

namespace {

double off_diagonal_frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return s;
}

double frobenius_sq(const Matrix& a) {
  double s = 0.0;
  for (double x : a.data) s += x * x;
  return s;
}

}  // namespace

std::vector<double> sym_eigenvalues(const Matrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("sym_eigenvalues: matrix not square");
  const int n = m.rows;

  // Symmetry check, relative to the largest entry magnitude.
  double scale = 0.0;
  for (double x : m.data) scale = std::max(scale, std::abs(x));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-10 * std::max(1.0, scale)) {
        throw std::invalid_argument("sym_eigenvalues: matrix not symmetric within tolerance");
      }
    }
  }

  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = 0.5 * (m(i, j) + m(j, i));

  const double frob = std::sqrt(frobenius_sq(a));
  const double threshold_sq = (1e-12 * std::max(frob, 1e-300)) * (1e-12 * std::max(frob, 1e-300));

  // Cyclic Jacobi: sweep all (p, q) pairs, rotating away a_pq each time.
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (off_diagonal_frobenius_sq(a) <= threshold_sq) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        double t;  // tan of the rotation angle, the smaller root
        if (tau >= 0.0) {
          t = 1.0 / (tau + std::sqrt(1.0 + tau * tau));
        } else {
          t = -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double sym_eig_min(const Matrix& m) {
  return sym_eigenvalues(m).front();
}

double sym_eig_max(const Matrix& m) {
  return sym_eigenvalues(m).back();
}

}  // namespace deltaclip
