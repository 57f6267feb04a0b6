#include "deltaclip/mlp.hpp"

#include <cmath>
#include <stdexcept>

namespace deltaclip {

Activation activation_from_string(const std::string& name) {
  if (name == "identity") return Activation::Identity;
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
  }
  return "?";
}

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return z;
    case Activation::Tanh: return std::tanh(z);
    case Activation::Relu: return z > 0.0 ? z : 0.0;
  }
  return z;
}

double activate_derivative(Activation a, double z) {
  switch (a) {
    case Activation::Identity: return 1.0;
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
  }
  return 1.0;
}

double activation_rho(Activation a) {
  return a == Activation::Identity ? 1.0 : 0.0;
}

int MlpSpec::weight_count() const {
  int n = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) n += widths[l] * widths[l - 1];
  return n;
}

int MlpSpec::layer_offset(int layer) const {
  int off = 0;
  for (int l = 1; l < layer; ++l) off += widths[l] * widths[l - 1];
  return off;
}

void MlpSpec::validate() const {
  if (widths.size() < 2) {
    throw std::invalid_argument("MlpSpec: need at least input and output widths (m0, ..., 1)");
  }
  for (int m : widths) {
    if (m < 1) throw std::invalid_argument("MlpSpec: widths must be positive");
  }
  if (widths.back() != 1) {
    throw std::invalid_argument("MlpSpec: output width must be 1");
  }
  if (static_cast<int>(weights.size()) != weight_count()) {
    throw std::invalid_argument("MlpSpec: weight vector has wrong length");
  }
}

MlpSpec make_gaussian_mlp(std::vector<int> widths, Activation hidden, Activation output,
                          RngStream& rng) {
  MlpSpec spec;
  spec.widths = std::move(widths);
  spec.hidden = hidden;
  spec.output = output;
  spec.weights.resize(spec.weight_count());
  for (auto& w : spec.weights) w = rng.normal();
  spec.validate();
  return spec;
}

namespace {

struct ForwardPass {
  // activations[l] is alpha^l (activations[0] = x);
  // preacts[l-1] is z^l for layer l in [1, L+1].
  std::vector<Vector> activations;
  std::vector<Vector> preacts;
};

Activation layer_activation(const MlpSpec& spec, int layer) {
  const int last = static_cast<int>(spec.widths.size()) - 1;
  return layer == last ? spec.output : spec.hidden;
}

ForwardPass forward_pass(const MlpSpec& spec, const Vector& x) {
  if (static_cast<int>(x.size()) != spec.widths.front()) {
    throw std::invalid_argument("mlp_forward: input has wrong dimension");
  }
  const int layers = static_cast<int>(spec.widths.size()) - 1;
  ForwardPass fp;
  fp.activations.resize(layers + 1);
  fp.preacts.resize(layers);
  fp.activations[0] = x;
  for (int l = 1; l <= layers; ++l) {
    const int m_out = spec.widths[l];
    const int m_in = spec.widths[l - 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_in));
    const double* w = spec.weights.data() + spec.layer_offset(l);
    const Vector& prev = fp.activations[l - 1];
    Vector z(m_out, 0.0);
    for (int i = 0; i < m_out; ++i) {
      const double* row = w + static_cast<std::size_t>(i) * m_in;
      double s = 0.0;
      for (int j = 0; j < m_in; ++j) s += row[j] * prev[j];
      z[i] = scale * s;
    }
    const Activation act = layer_activation(spec, l);
    Vector alpha(m_out);
    for (int i = 0; i < m_out; ++i) alpha[i] = activate(act, z[i]);
    fp.preacts[l - 1] = std::move(z);
    fp.activations[l] = std::move(alpha);
  }
  return fp;
}

// Accumulates seed * d f(w; x)/d w into grad, reusing a completed forward
// pass. seed = 1 gives the output gradient, seed = residual the loss term.
void backward_pass(const MlpSpec& spec, const ForwardPass& fp, double seed, Vector& grad) {
  const int layers = static_cast<int>(spec.widths.size()) - 1;
  Vector delta{seed * activate_derivative(spec.output, fp.preacts[layers - 1][0])};
  for (int l = layers; l >= 1; --l) {
    const int m_out = spec.widths[l];
    const int m_in = spec.widths[l - 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_in));
    const double* w = spec.weights.data() + spec.layer_offset(l);
    double* g = grad.data() + spec.layer_offset(l);
    const Vector& prev = fp.activations[l - 1];

    for (int i = 0; i < m_out; ++i) {
      const double di = delta[i] * scale;
      double* grow = g + static_cast<std::size_t>(i) * m_in;
      for (int j = 0; j < m_in; ++j) grow[j] += di * prev[j];
    }
    if (l > 1) {
      const Activation act = layer_activation(spec, l - 1);
      const Vector& z_prev = fp.preacts[l - 2];
      Vector next(m_in, 0.0);
      for (int i = 0; i < m_out; ++i) {
        const double di = delta[i] * scale;
        const double* row = w + static_cast<std::size_t>(i) * m_in;
        for (int j = 0; j < m_in; ++j) next[j] += row[j] * di;
      }
      for (int j = 0; j < m_in; ++j) next[j] *= activate_derivative(act, z_prev[j]);
      delta = std::move(next);
    }
  }
}

void check_dataset(const MlpSpec& spec, const Dataset& d) {
  if (d.size() < 1) throw std::invalid_argument("dataset is empty");
  if (static_cast<int>(d.targets.size()) != d.size()) {
    throw std::invalid_argument("dataset: inputs and targets differ in count");
  }
  for (const auto& x : d.inputs) {
    if (static_cast<int>(x.size()) != spec.widths.front()) {
      throw std::invalid_argument("dataset: input dimension mismatch");
    }
  }
}

}  // namespace

double mlp_forward(const MlpSpec& spec, const Vector& x) {
  return forward_pass(spec, x).activations.back()[0];
}

double squared_loss(const MlpSpec& spec, const Dataset& d) {
  check_dataset(spec, d);
  double s = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    const double r = mlp_forward(spec, d.inputs[i]) - d.targets[i];
    s += r * r;
  }
  return 0.5 * s;
}

Vector squared_loss_gradient(const MlpSpec& spec, const Dataset& d) {
  check_dataset(spec, d);
  Vector grad(spec.weight_count(), 0.0);
  for (int i = 0; i < d.size(); ++i) {
    const ForwardPass fp = forward_pass(spec, d.inputs[i]);
    const double residual = fp.activations.back()[0] - d.targets[i];
    backward_pass(spec, fp, residual, grad);
  }
  return grad;
}

Matrix jacobian(const MlpSpec& spec, const Dataset& d) {
  check_dataset(spec, d);
  const int dim = spec.weight_count();
  Matrix j(d.size(), dim);
  Vector row(dim);
  for (int i = 0; i < d.size(); ++i) {
    const ForwardPass fp = forward_pass(spec, d.inputs[i]);
    std::fill(row.begin(), row.end(), 0.0);
    backward_pass(spec, fp, 1.0, row);
    for (int k = 0; k < dim; ++k) j(i, k) = row[k];
  }
  return j;
}

MlpObjective::MlpObjective(MlpSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.validate();
  check_dataset(spec_, data_);
}

MlpSpec MlpObjective::with_weights(const Vector& w) const {
  if (static_cast<int>(w.size()) != spec_.weight_count()) {
    throw std::invalid_argument("MlpObjective: weight vector has wrong length");
  }
  MlpSpec s = spec_;
  s.weights = w;
  return s;
}

double MlpObjective::value(const Vector& w) const {
  return squared_loss(with_weights(w), data_);
}

Vector MlpObjective::gradient(const Vector& w) const {
  return squared_loss_gradient(with_weights(w), data_);
}

}  // namespace deltaclip
