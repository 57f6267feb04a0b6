#pragma once

#include <vector>

#include "deltaclip/rng.hpp"

namespace deltaclip {

// Weights, gradients and data points are flat coordinate vectors.
using Vector = std::vector<double>;

// Dense row-major matrix. Sizes stay small (at most a few thousand on a
// side), so everything below is plain scalar code.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c);  // zero-filled; throws std::invalid_argument if r or c < 1

  static Matrix identity(int n);
  static Matrix diagonal(const Vector& d);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Entries are independent standard normals drawn from rng.
Matrix gaussian_matrix(int rows, int cols, RngStream& rng);
Vector gaussian_vector(int dim, RngStream& rng);

double l2_norm(const Vector& v);
double dot(const Vector& a, const Vector& b);
void axpy(double a, const Vector& x, Vector& y);  // y += a*x
Vector sub(const Vector& a, const Vector& b);
double dist(const Vector& a, const Vector& b);

Vector matvec(const Matrix& m, const Vector& v);
Vector matvec_transposed(const Matrix& m, const Vector& v);  // m^T * v
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& m);

bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

// Eigenvalues of a symmetric matrix in ascending order, computed by cyclic
// Jacobi rotations (off-diagonal Frobenius mass driven below 1e-12 relative,
// at most 100 sweeps). The input must be square and symmetric to 1e-10
// relative tolerance; (A + A^T)/2 is what gets diagonalized.
std::vector<double> sym_eigenvalues(const Matrix& m);
double sym_eig_min(const Matrix& m);
double sym_eig_max(const Matrix& m);

}  // namespace deltaclip
