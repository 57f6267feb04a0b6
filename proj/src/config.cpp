#include "deltaclip/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace deltaclip {

using nlohmann::json;

std::size_t GridAxes::cells() const {
  return std::max<std::size_t>(eta.size(), 1) * std::max<std::size_t>(gamma.size(), 1) *
         std::max<std::size_t>(delta.size(), 1);
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config field '" + where + "': " + what);
}

double require_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double require_positive(const json& j, const std::string& where) {
  const double v = require_number(j, where);
  if (!(v > 0.0) || !std::isfinite(v)) fail(where, "must be positive and finite");
  return v;
}

long require_count(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  const long v = j.get<long>();
  if (v < 0) fail(where, "must be >= 0");
  return v;
}

Matrix parse_quadratic_matrix(const json& obj) {
  if (obj.contains("diag")) {
    const auto& d = obj.at("diag");
    if (!d.is_array() || d.empty()) fail("objective.diag", "expected a non-empty array");
    Vector diag;
    for (const auto& x : d) diag.push_back(require_number(x, "objective.diag[]"));
    return Matrix::diagonal(diag);
  }
  if (obj.contains("matrix")) {
    const auto& rows = obj.at("matrix");
    if (!rows.is_array() || rows.empty()) fail("objective.matrix", "expected a non-empty array");
    const int n = static_cast<int>(rows.size());
    Matrix a(n, n);
    for (int i = 0; i < n; ++i) {
      const auto& row = rows.at(i);
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        fail("objective.matrix", "must be square");
      }
      for (int j = 0; j < n; ++j) a(i, j) = require_number(row.at(j), "objective.matrix[][]");
    }
    return a;
  }
  fail("objective", "quadratic objective needs 'diag' or 'matrix'");
}

DatasetConfig parse_dataset(const json& j, const std::string& base_dir) {
  DatasetConfig d;
  if (!j.is_object()) fail("objective.dataset", "expected an object");
  const std::string kind = j.value("kind", std::string("csv"));
  if (kind == "csv") {
    d.kind = DatasetConfig::Kind::Csv;
    if (!j.contains("path")) fail("objective.dataset.path", "required for csv datasets");
    std::filesystem::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    d.path = p.string();
    if (!std::filesystem::exists(d.path)) fail("objective.dataset.path", "file not found: " + d.path);
  } else if (kind == "random_unit") {
    d.kind = DatasetConfig::Kind::RandomUnit;
    d.n = static_cast<int>(require_count(j.at("n"), "objective.dataset.n"));
    d.input_dim = static_cast<int>(require_count(j.at("input_dim"), "objective.dataset.input_dim"));
    if (d.n < 1 || d.input_dim < 1) fail("objective.dataset", "n and input_dim must be >= 1");
    if (j.contains("target_range")) {
      const auto& r = j.at("target_range");
      if (!r.is_array() || r.size() != 2) fail("objective.dataset.target_range", "expected [lo, hi]");
      d.target_lo = require_number(r.at(0), "objective.dataset.target_range[0]");
      d.target_hi = require_number(r.at(1), "objective.dataset.target_range[1]");
      if (!(d.target_lo <= d.target_hi)) fail("objective.dataset.target_range", "lo must be <= hi");
    }
  } else {
    fail("objective.dataset.kind", "unknown kind '" + kind + "'");
  }
  return d;
}

ObjectiveConfig parse_objective(const json& j, const std::string& base_dir) {
  ObjectiveConfig o;
  if (!j.is_object()) fail("objective", "expected an object");
  const std::string kind = j.value("kind", std::string());
  if (kind == "quadratic") {
    o.kind = ObjectiveConfig::Kind::Quadratic;
    o.quadratic = parse_quadratic_matrix(j);
  } else if (kind == "mlp") {
    o.kind = ObjectiveConfig::Kind::Mlp;
    if (!j.contains("widths")) fail("objective.widths", "required for mlp objectives");
    for (const auto& w : j.at("widths")) {
      o.widths.push_back(static_cast<int>(require_count(w, "objective.widths[]")));
    }
    try {
      o.hidden = activation_from_string(j.value("hidden_activation", std::string("tanh")));
      o.output = activation_from_string(j.value("output_activation", std::string("identity")));
    } catch (const std::invalid_argument& e) {
      fail("objective activations", e.what());
    }
    if (!j.contains("dataset")) fail("objective.dataset", "required for mlp objectives");
    o.dataset = parse_dataset(j.at("dataset"), base_dir);
  } else {
    fail("objective.kind", "expected 'quadratic' or 'mlp', got '" + kind + "'");
  }
  return o;
}

OptimizerConfig parse_optimizer(const json& j) {
  OptimizerConfig o;
  if (!j.is_object()) fail("optimizer", "expected an object");
  const std::string kind = j.value("kind", std::string());
  if (kind == "constant") {
    o.kind = OptimizerConfig::Kind::Constant;
  } else if (kind == "gclip") {
    o.kind = OptimizerConfig::Kind::GClip;
  } else if (kind == "delta-gclip") {
    o.kind = OptimizerConfig::Kind::DeltaGClip;
  } else if (kind == "neurotron") {
    o.kind = OptimizerConfig::Kind::Neurotron;
  } else {
    fail("optimizer.kind", "unknown kind '" + kind + "'");
  }
  o.eta = require_positive(j.at("eta"), "optimizer.eta");
  if (o.kind == OptimizerConfig::Kind::GClip || o.kind == OptimizerConfig::Kind::DeltaGClip) {
    o.gamma = require_positive(j.at("gamma"), "optimizer.gamma");
  }
  if (o.kind == OptimizerConfig::Kind::DeltaGClip) {
    o.delta = require_positive(j.at("delta"), "optimizer.delta");
    if (!(o.delta < 1.0)) fail("optimizer.delta", "must be < 1");
  }
  if (o.kind == OptimizerConfig::Kind::Neurotron) {
    o.batch = static_cast<int>(require_count(j.value("batch", json(1)), "optimizer.batch"));
    if (o.batch < 1) fail("optimizer.batch", "must be >= 1");
  }
  return o;
}

NeurotronConfig parse_neurotron(const json& j) {
  NeurotronConfig n;
  if (!j.is_object()) fail("neurotron", "expected an object");
  n.r = static_cast<int>(require_count(j.at("r"), "neurotron.r"));
  n.n = static_cast<int>(require_count(j.at("n"), "neurotron.n"));
  n.k = static_cast<int>(require_count(j.value("k", json(1)), "neurotron.k"));
  if (n.r < 1 || n.n < 1 || n.k < 1) fail("neurotron", "r, n, k must be >= 1");
  const std::string sensing = j.value("sensing", std::string("identity"));
  const std::string gates = j.value("gates", std::string("identity"));
  if (sensing != "identity" && sensing != "gaussian") fail("neurotron.sensing", "expected 'identity' or 'gaussian'");
  if (gates != "identity" && gates != "gaussian") fail("neurotron.gates", "expected 'identity' or 'gaussian'");
  n.identity_sensing = sensing == "identity";
  n.identity_gates = gates == "identity";
  if ((n.identity_sensing || n.identity_gates) && n.r != n.n) {
    fail("neurotron", "identity sensing/gates require r == n");
  }
  if (j.contains("true_filter") && !j.at("true_filter").is_string()) {
    Vector w;
    for (const auto& x : j.at("true_filter")) w.push_back(require_number(x, "neurotron.true_filter[]"));
    if (static_cast<int>(w.size()) != n.r) fail("neurotron.true_filter", "length must equal r");
    n.true_filter = std::move(w);
  }
  n.flip_prob = require_number(j.value("flip_prob", json(0.0)), "neurotron.flip_prob");
  if (!(n.flip_prob >= 0.0 && n.flip_prob < 1.0)) fail("neurotron.flip_prob", "must lie in [0, 1)");
  n.noise_mag = require_number(j.value("noise_mag", json(0.0)), "neurotron.noise_mag");
  if (n.noise_mag < 0.0) fail("neurotron.noise_mag", "must be >= 0");
  return n;
}

InitConfig parse_init(const json& j) {
  InitConfig init;
  if (!j.is_object()) fail("init", "expected an object");
  const std::string kind = j.value("kind", std::string("gaussian"));
  if (kind == "gaussian") {
    init.kind = InitConfig::Kind::Gaussian;
    init.scale = require_number(j.value("scale", json(1.0)), "init.scale");
  } else if (kind == "zeros") {
    init.kind = InitConfig::Kind::Zeros;
  } else if (kind == "point") {
    init.kind = InitConfig::Kind::Point;
    if (!j.contains("point")) fail("init.point", "required for point init");
    for (const auto& x : j.at("point")) init.point.push_back(require_number(x, "init.point[]"));
    if (init.point.empty()) fail("init.point", "must be non-empty");
  } else {
    fail("init.kind", "unknown kind '" + kind + "'");
  }
  return init;
}

std::vector<double> parse_axis(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "grid axes must be non-empty arrays");
  std::vector<double> axis;
  for (const auto& x : j) axis.push_back(require_number(x, where + "[]"));
  return axis;
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }

  ExperimentConfig cfg;
  cfg.source_path = path;
  cfg.raw_json = j.dump(2);
  const std::string base_dir = std::filesystem::path(path).parent_path().string();

  try {
    if (!j.contains("version") || !j.at("version").is_number_integer() ||
        j.at("version").get<int>() != 1) {
      fail("version", "config must declare \"version\": 1");
    }
    if (!j.contains("seed")) fail("seed", "seed is mandatory");
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) {
      fail("seed", "expected an integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();

    if (!j.contains("optimizer")) fail("optimizer", "required");
    cfg.optimizer = parse_optimizer(j.at("optimizer"));

    if (cfg.optimizer.kind == OptimizerConfig::Kind::Neurotron) {
      if (!j.contains("neurotron")) fail("neurotron", "required for the neurotron optimizer");
      cfg.neurotron = parse_neurotron(j.at("neurotron"));
      if (j.contains("objective")) fail("objective", "not used by the neurotron optimizer");
    } else {
      if (!j.contains("objective")) fail("objective", "required");
      cfg.objective = parse_objective(j.at("objective"), base_dir);
    }

    if (j.contains("schedule")) {
      for (const auto& e : j.at("schedule")) {
        ScheduleEntry entry;
        entry.iteration = require_count(e.at("iteration"), "schedule[].iteration");
        entry.divisor = require_number(e.at("divisor"), "schedule[].divisor");
        cfg.schedule.push_back(entry);
      }
      try {
        Schedule validate(cfg.schedule);
      } catch (const std::invalid_argument& e) {
        fail("schedule", e.what());
      }
    }

    if (!j.contains("iterations")) fail("iterations", "required");
    cfg.iterations = require_count(j.at("iterations"), "iterations");
    if (j.contains("stop_tol")) {
      cfg.stop_tol = require_number(j.at("stop_tol"), "stop_tol");
      if (cfg.stop_tol < 0.0) fail("stop_tol", "must be >= 0");
    }

    if (j.contains("oracle")) {
      const auto& o = j.at("oracle");
      if (!o.is_object() || !o.contains("theta")) fail("oracle.theta", "required");
      const double theta = require_number(o.at("theta"), "oracle.theta");
      if (theta < 0.0) fail("oracle.theta", "must be >= 0");
      cfg.theta = theta;
      if (cfg.optimizer.kind != OptimizerConfig::Kind::DeltaGClip) {
        fail("oracle", "stochastic runs require the delta-gclip optimizer");
      }
    }

    if (j.contains("init")) cfg.init = parse_init(j.at("init"));

    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      if (!g.is_object()) fail("grid", "expected an object");
      if (g.contains("eta")) cfg.grid.eta = parse_axis(g.at("eta"), "grid.eta");
      if (g.contains("gamma")) cfg.grid.gamma = parse_axis(g.at("gamma"), "grid.gamma");
      if (g.contains("delta")) cfg.grid.delta = parse_axis(g.at("delta"), "grid.delta");
      if (cfg.grid.empty()) fail("grid", "needs at least one of eta, gamma, delta");
    }

    cfg.out_dir = j.value("out_dir", std::string());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config error in ") + path + ": " + e.what());
  }
  return cfg;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);

  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;

    std::vector<double> fields;
    bool numeric = true;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const char* begin = cell.c_str();
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
      if (end == begin || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      fields.push_back(v);
    }
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    if (fields.size() < 2) {
      throw ConfigError(path + ":" + std::to_string(line_no) +
                        ": need at least one feature and a target");
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": inconsistent column count");
    }
    d.targets.push_back(fields.back());
    fields.pop_back();
    d.inputs.push_back(std::move(fields));
  }
  if (d.inputs.empty()) throw ConfigError(path + ": no data rows");
  return d;
}

}  // namespace deltaclip
