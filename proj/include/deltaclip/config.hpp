#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "deltaclip/mlp.hpp"
#include "deltaclip/step_rule.hpp"
#include "deltaclip/tensor.hpp"

namespace deltaclip {

// Anything wrong with a config file or its referenced files: maps to the
// usage/config exit code (2) in the CLI.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  enum class Kind { Csv, RandomUnit };
  Kind kind = Kind::Csv;
  std::string path;      // csv
  int n = 0;             // random_unit
  int input_dim = 0;     // random_unit
  double target_lo = -1.0;
  double target_hi = 1.0;
};

struct ObjectiveConfig {
  enum class Kind { Quadratic, Mlp };
  Kind kind = Kind::Quadratic;

  Matrix quadratic;  // SPD matrix for the quadratic objective

  std::vector<int> widths;
  Activation hidden = Activation::Tanh;
  Activation output = Activation::Identity;
  DatasetConfig dataset;
};

struct OptimizerConfig {
  enum class Kind { Constant, GClip, DeltaGClip, Neurotron };
  Kind kind = Kind::DeltaGClip;
  double eta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  int batch = 1;  // neurotron mini-batch size
};

struct NeurotronConfig {
  int r = 0;
  int n = 0;
  int k = 1;
  bool identity_sensing = true;  // false: standard normal entries
  bool identity_gates = true;
  std::optional<Vector> true_filter;  // absent: random unit vector
  double flip_prob = 0.0;
  double noise_mag = 0.0;
};

struct InitConfig {
  enum class Kind { Gaussian, Zeros, Point };
  Kind kind = Kind::Gaussian;
  double scale = 1.0;
  Vector point;
};

struct GridAxes {
  std::vector<double> eta;
  std::vector<double> gamma;
  std::vector<double> delta;

  bool empty() const { return eta.empty() && gamma.empty() && delta.empty(); }
  std::size_t cells() const;
};

struct ExperimentConfig {
  int version = 1;
  std::uint64_t seed = 0;
  std::optional<ObjectiveConfig> objective;
  OptimizerConfig optimizer;
  std::vector<ScheduleEntry> schedule;
  long iterations = 0;
  double stop_tol = 1e-12;
  std::optional<double> theta;  // presence selects the stochastic runner
  std::optional<NeurotronConfig> neurotron;
  InitConfig init;
  GridAxes grid;
  std::string out_dir;

  std::string source_path;  // where the config was loaded from
  std::string raw_json;     // config echo for reports
};

// Parses and validates a config file. Referenced files (datasets) must exist.
// Throws ConfigError with a field/position diagnostic on any problem.
ExperimentConfig load_config(const std::string& path);

// One row per sample, features first and the target last; a non-numeric
// first line is treated as a header and skipped.
Dataset load_dataset_csv(const std::string& path);

}  // namespace deltaclip
