#include "deltaclip/objective.hpp"

#include <stdexcept>

namespace deltaclip {

QuadraticObjective::QuadraticObjective(Matrix a) : a_(std::move(a)) {
  const auto eig = sym_eigenvalues(a_);  // also rejects non-square / asymmetric
  if (eig.front() <= 1e-12) {
    throw std::invalid_argument("QuadraticObjective: matrix is not positive definite");
  }
  constants_ = KnownConstants{2.0 * eig.front(), eig.back(), 0.0};
}

double QuadraticObjective::value(const Vector& w) const {
  if (static_cast<int>(w.size()) != a_.rows) {
    throw std::invalid_argument("QuadraticObjective::value: dimension mismatch");
  }
  return 0.5 * dot(w, matvec(a_, w));
}

Vector QuadraticObjective::gradient(const Vector& w) const {
  if (static_cast<int>(w.size()) != a_.rows) {
    throw std::invalid_argument("QuadraticObjective::gradient: dimension mismatch");
  }
  return matvec(a_, w);
}

}  // namespace deltaclip
