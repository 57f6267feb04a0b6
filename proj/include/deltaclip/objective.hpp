#pragma once

#include <optional>

#include "deltaclip/tensor.hpp"

namespace deltaclip {

// Analytic constants attached to an objective when they are known exactly:
// mu is the Polyak-Lojasiewicz* constant (|grad|^2 >= mu * L on the whole
// domain), beta the gradient Lipschitz constant, l_star the minimum value.
struct KnownConstants {
  double mu = 0.0;
  double beta = 0.0;
  double l_star = 0.0;
};

// A differentiable scalar loss with exact gradient. Implementations are
// immutable after construction and safe to evaluate concurrently.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dim() const = 0;
  virtual double value(const Vector& w) const = 0;
  virtual Vector gradient(const Vector& w) const = 0;
  virtual std::optional<KnownConstants> known_constants() const { return std::nullopt; }
};

// L(w) = 1/2 w^T A w for symmetric positive definite A. Satisfies the PL*
// inequality with mu = 2*lambda_min(A) (since |Aw|^2 >= lambda_min * w^T A w),
// is beta-smooth with beta = lambda_max(A), and has minimum value 0.
class QuadraticObjective final : public Objective {
 public:
  // Throws std::invalid_argument unless A is symmetric with all
  // eigenvalues > 1e-12.
  explicit QuadraticObjective(Matrix a);

  int dim() const override { return a_.rows; }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  std::optional<KnownConstants> known_constants() const override { return constants_; }

  const Matrix& matrix() const { return a_; }

 private:
  Matrix a_;
  KnownConstants constants_;
};

}  // namespace deltaclip
