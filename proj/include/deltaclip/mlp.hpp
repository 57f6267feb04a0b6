#pragma once

#include <memory>
#include <string>
#include <vector>

#include "deltaclip/objective.hpp"
#include "deltaclip/tensor.hpp"

namespace deltaclip {

enum class Activation { Identity, Tanh, Relu };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

double activate(Activation a, double z);
double activate_derivative(Activation a, double z);  // relu' at 0 is taken as 0

// Lower bound rho on |sigma'| for the output activation; positive only for
// the identity, which is the admissible choice for the convergence theory.
double activation_rho(Activation a);

struct Dataset {
  std::vector<Vector> inputs;   // each of length m0
  std::vector<double> targets;

  int size() const { return static_cast<int>(inputs.size()); }
  int input_dim() const { return inputs.empty() ? 0 : static_cast<int>(inputs.front().size()); }
};

// Scalar-output feed-forward network
//   alpha^0 = x,  alpha^l = sigma_l( W^l alpha^{l-1} / sqrt(m_{l-1}) ),
//   f(w; x) = alpha^{L+1},
// with widths m0..m_{L+1} and m_{L+1} = 1. The weight vector concatenates
// all W^l entries layer by layer, row-major within a layer.
struct MlpSpec {
  std::vector<int> widths;  // m0 .. m_{L+1}
  Activation hidden = Activation::Tanh;
  Activation output = Activation::Identity;
  Vector weights;

  int hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
  int weight_count() const;
  int layer_offset(int layer) const;  // offset of W^l in weights, l in [1, L+1]

  // Shape validation: at least one hidden layer, all widths positive,
  // last width 1, weights sized to weight_count(). Throws on violation.
  void validate() const;
};

// Weights drawn i.i.d. standard normal, the initialization the kernel
// analysis at initialization assumes.
MlpSpec make_gaussian_mlp(std::vector<int> widths, Activation hidden, Activation output,
                          RngStream& rng);

double mlp_forward(const MlpSpec& spec, const Vector& x);

// 1/2 sum_i (f(w; x_i) - y_i)^2 and its exact gradient in the weight vector,
// accumulated by reverse-mode passes, one per sample.
double squared_loss(const MlpSpec& spec, const Dataset& d);
Vector squared_loss_gradient(const MlpSpec& spec, const Dataset& d);

// n x dim matrix whose row i is the weight gradient of f(w; x_i). Satisfies
// squared_loss_gradient = J^T (F(w) - y).
Matrix jacobian(const MlpSpec& spec, const Dataset& d);

// Objective adapter: fixed architecture and dataset, weights supplied per
// evaluation. The spec passed in provides the initial weight vector.
class MlpObjective final : public Objective {
 public:
  MlpObjective(MlpSpec spec, Dataset data);

  int dim() const override { return spec_.weight_count(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;

  const MlpSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }
  MlpSpec with_weights(const Vector& w) const;

 private:
  MlpSpec spec_;
  Dataset data_;
};

}  // namespace deltaclip
