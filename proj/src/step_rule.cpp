#include "deltaclip/step_rule.hpp"

#include <cmath>
#include <stdexcept>

namespace deltaclip {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

StepRule StepRule::constant(double eta) {
  require(std::isfinite(eta) && eta > 0.0, "StepRule: eta must be positive");
  return StepRule{Kind::Constant, eta, 0.0, 0.0};
}

StepRule StepRule::gclip(double eta, double gamma) {
  require(std::isfinite(eta) && eta > 0.0, "StepRule: eta must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, "StepRule: gamma must be positive");
  return StepRule{Kind::GClip, eta, gamma, 0.0};
}

StepRule StepRule::delta_gclip(double eta, double gamma, double delta) {
  require(std::isfinite(eta) && eta > 0.0, "StepRule: eta must be positive");
  require(std::isfinite(gamma) && gamma > 0.0, "StepRule: gamma must be positive");
  require(std::isfinite(delta) && delta > 0.0 && delta < 1.0,
          "StepRule: delta must lie in (0, 1)");
  return StepRule{Kind::DeltaGClip, eta, gamma, delta};
}

double StepRule::step_size(double grad_norm) const {
  switch (kind) {
    case Kind::Constant:
      return eta;
    case Kind::GClip: {
      if (grad_norm == 0.0) return eta;  // gamma/0 = +inf, unclipped
      const double ratio = gamma / grad_norm;
      return eta * std::min(1.0, ratio);
    }
    case Kind::DeltaGClip: {
      if (grad_norm == 0.0) return eta;
      const double ratio = gamma / grad_norm;
      return eta * std::min(1.0, std::max(delta, ratio));
    }
  }
  return eta;
}

StepRule StepRule::with_eta(double new_eta) const {
  StepRule r = *this;
  r.eta = new_eta;
  return r;
}

std::string to_string(StepRule::Kind k) {
  switch (k) {
    case StepRule::Kind::Constant: return "constant";
    case StepRule::Kind::GClip: return "gclip";
    case StepRule::Kind::DeltaGClip: return "delta-gclip";
  }
  return "?";
}

StepRule::Kind step_rule_kind_from_string(const std::string& name) {
  if (name == "constant") return StepRule::Kind::Constant;
  if (name == "gclip") return StepRule::Kind::GClip;
  if (name == "delta-gclip") return StepRule::Kind::DeltaGClip;
  throw std::invalid_argument("unknown step rule kind: " + name);
}

Schedule::Schedule(std::vector<ScheduleEntry> entries) : entries_(std::move(entries)) {
  long prev = -1;
  for (const auto& e : entries_) {
    if (e.iteration <= prev) {
      throw std::invalid_argument("Schedule: iteration indices must be strictly increasing");
    }
    if (!(e.divisor > 1.0) || !std::isfinite(e.divisor)) {
      throw std::invalid_argument("Schedule: divisors must be > 1");
    }
    prev = e.iteration;
  }
}

double Schedule::eta_at(long t, double eta0) const {
  double eta = eta0;
  for (const auto& e : entries_) {
    if (e.iteration > t) break;
    eta /= e.divisor;
  }
  return eta;
}

}  // namespace deltaclip
