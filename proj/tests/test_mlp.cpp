#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "deltaclip/mlp.hpp"
#include "oracles.hpp"

using namespace deltaclip;

namespace {

// Re-packs the flat weight vector into explicit per-layer matrices for the
// independent evaluator.
std::vector<std::vector<std::vector<double>>> unpack(const MlpSpec& spec) {
  std::vector<std::vector<std::vector<double>>> layers;
  int off = 0;
  for (std::size_t l = 1; l < spec.widths.size(); ++l) {
    const int rows = spec.widths[l];
    const int cols = spec.widths[l - 1];
    std::vector<std::vector<double>> w(rows, std::vector<double>(cols));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w[i][j] = spec.weights[off + i * cols + j];
    off += rows * cols;
    layers.push_back(std::move(w));
  }
  return layers;
}

Dataset random_dataset(int n, int dim, RngStream& rng) {
  Dataset d;
  for (int i = 0; i < n; ++i) {
    d.inputs.push_back(gaussian_vector(dim, rng));
    d.targets.push_back(rng.normal());
  }
  return d;
}

}  // namespace

TEST_CASE("zero weights produce zero output") {
  MlpSpec spec;
  spec.widths = {3, 4, 1};
  spec.weights.assign(spec.weight_count(), 0.0);
  CHECK(mlp_forward(spec, {0.3, -2.0, 5.0}) == 0.0);
}

TEST_CASE("identity-activation scalar chain multiplies through") {
  MlpSpec spec;
  spec.widths = {1, 1, 1};
  spec.hidden = Activation::Identity;
  spec.output = Activation::Identity;
  spec.weights = {2.0, 3.0};
  CHECK(mlp_forward(spec, {1.0}) == 6.0);
}

TEST_CASE("forward pass matches the straight-line evaluator") {
  RngStream rng(88, 0);
  const std::vector<std::vector<int>> shapes = {
      {2, 5, 1}, {3, 4, 4, 1}, {4, 8, 6, 3, 1}, {5, 1}};
  for (const auto& widths : shapes) {
    RngStream wrng = rng.split(widths.size());
    MlpSpec spec = make_gaussian_mlp(widths, Activation::Tanh, Activation::Identity, wrng);
    const auto layers = unpack(spec);
    for (int trial = 0; trial < 10; ++trial) {
      const Vector x = gaussian_vector(widths.front(), rng);
      const double expected = oracles::straight_line_mlp(
          layers, x, [](double z) { return std::tanh(z); }, [](double z) { return z; });
      CHECK(mlp_forward(spec, x) == doctest::Approx(expected).epsilon(1e-14));
    }
  }
}

TEST_CASE("squared loss composes per-sample forwards") {
  RngStream rng(89, 0);
  MlpSpec spec = make_gaussian_mlp({3, 6, 1}, Activation::Tanh, Activation::Identity, rng);
  Dataset d = random_dataset(7, 3, rng);

  double expected = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    const double r = mlp_forward(spec, d.inputs[i]) - d.targets[i];
    expected += 0.5 * r * r;
  }
  CHECK(squared_loss(spec, d) == doctest::Approx(expected).epsilon(1e-14));

  SUBCASE("interpolating targets give exactly zero loss and gradient") {
    for (int i = 0; i < d.size(); ++i) d.targets[i] = mlp_forward(spec, d.inputs[i]);
    CHECK(squared_loss(spec, d) == 0.0);
    for (double g : squared_loss_gradient(spec, d)) CHECK(g == 0.0);
  }
}

TEST_CASE("single sample, output 2 against target 0 gives loss 2") {
  MlpSpec spec;
  spec.widths = {1, 1, 1};
  spec.hidden = Activation::Identity;
  spec.output = Activation::Identity;
  spec.weights = {1.0, 2.0};
  Dataset d;
  d.inputs = {{1.0}};
  d.targets = {0.0};
  CHECK(mlp_forward(spec, d.inputs[0]) == 2.0);
  CHECK(squared_loss(spec, d) == 2.0);
}

TEST_CASE("loss gradient matches central differences on random instances") {
  RngStream rng(90, 0);
  const std::vector<std::vector<int>> shapes = {{2, 5, 1}, {3, 4, 4, 1}, {2, 6, 5, 3, 1}};
  for (const auto& widths : shapes) {
    MlpSpec spec = make_gaussian_mlp(widths, Activation::Tanh, Activation::Identity, rng);
    const Dataset d = random_dataset(5, widths.front(), rng);
    const Vector g = squared_loss_gradient(spec, d);
    const auto fd = oracles::central_difference(
        [&](const Vector& w) {
          MlpSpec s = spec;
          s.weights = w;
          return squared_loss(s, d);
        },
        spec.weights);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double denom = std::max({1.0, std::abs(g[i]), std::abs(fd[i])});
      CHECK(std::abs(g[i] - fd[i]) / denom <= 1e-6);
    }
  }
}

TEST_CASE("doubling targets shifts the linear-model gradient by the residual formula") {
  // With identity activations and no hidden layer, f(w; x) = <w, x>/sqrt(d),
  // so grad L = sum_i (f_i - y_i) x_i / sqrt(d) and doubling every target
  // subtracts sum_i y_i x_i / sqrt(d).
  RngStream rng(91, 0);
  const int d_in = 4;
  MlpSpec spec = make_gaussian_mlp({d_in, 1}, Activation::Identity, Activation::Identity, rng);
  Dataset d = random_dataset(6, d_in, rng);

  const Vector g1 = squared_loss_gradient(spec, d);
  Dataset doubled = d;
  for (auto& y : doubled.targets) y *= 2.0;
  const Vector g2 = squared_loss_gradient(spec, doubled);

  Vector expected_shift(d_in, 0.0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
  for (int i = 0; i < d.size(); ++i) {
    axpy(-d.targets[i] * scale, d.inputs[i], expected_shift);
  }
  for (int i = 0; i < d_in; ++i) {
    CHECK(g2[i] - g1[i] == doctest::Approx(expected_shift[i]).epsilon(1e-12));
  }
}

TEST_CASE("jacobian rows are per-sample output gradients") {
  RngStream rng(92, 0);
  MlpSpec spec = make_gaussian_mlp({3, 5, 1}, Activation::Tanh, Activation::Identity, rng);

  SUBCASE("n = 1 reduces to the single-sample gradient") {
    Dataset d;
    d.inputs = {gaussian_vector(3, rng)};
    d.targets = {0.0};
    const Matrix j = jacobian(spec, d);
    const auto fd = oracles::central_difference(
        [&](const Vector& w) {
          MlpSpec s = spec;
          s.weights = w;
          return mlp_forward(s, d.inputs[0]);
        },
        spec.weights);
    for (int k = 0; k < j.cols; ++k) {
      CHECK(j(0, k) == doctest::Approx(fd[k]).epsilon(1e-6));
    }
  }

  SUBCASE("duplicated samples give identical rows") {
    Dataset d;
    const Vector x = gaussian_vector(3, rng);
    d.inputs = {x, x};
    d.targets = {1.0, -1.0};
    const Matrix j = jacobian(spec, d);
    for (int k = 0; k < j.cols; ++k) CHECK(j(0, k) == j(1, k));
  }

  SUBCASE("chain-rule identity grad L = J^T (F - y)") {
    const Dataset d = random_dataset(6, 3, rng);
    const Matrix j = jacobian(spec, d);
    Vector residual(d.size());
    for (int i = 0; i < d.size(); ++i) {
      residual[i] = mlp_forward(spec, d.inputs[i]) - d.targets[i];
    }
    const Vector via_jacobian = matvec_transposed(j, residual);
    const Vector direct = squared_loss_gradient(spec, d);
    const double scale = l2_norm(direct);
    for (std::size_t k = 0; k < direct.size(); ++k) {
      CHECK(std::abs(via_jacobian[k] - direct[k]) <= 1e-10 * (1.0 + scale));
    }
  }
}

TEST_CASE("dimension mismatch raises invalid_argument") {
  RngStream rng(93, 0);
  MlpSpec spec = make_gaussian_mlp({3, 4, 1}, Activation::Tanh, Activation::Identity, rng);
  CHECK_THROWS_AS(mlp_forward(spec, {1.0, 2.0}), std::invalid_argument);
  Dataset d;
  d.inputs = {{1.0, 2.0}};
  d.targets = {0.0};
  CHECK_THROWS_AS(squared_loss(spec, d), std::invalid_argument);
  CHECK_THROWS_AS(squared_loss_gradient(spec, d), std::invalid_argument);
}
