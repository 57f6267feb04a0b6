#pragma once

#include <string>
#include <vector>

namespace deltaclip {

// Pure map from a gradient norm to a scalar step size h.
//
//   constant:     h = eta
//   gclip:        h = eta * min{1, gamma/|g|}
//   delta-gclip:  h = eta * min{1, max{delta, gamma/|g|}}
//
// gamma/0 is taken as +inf, so h = eta at a zero gradient (the update is the
// zero vector there anyway). For delta-gclip, h always lies in [eta*delta, eta].
struct StepRule {
  enum class Kind { Constant, GClip, DeltaGClip };

  Kind kind = Kind::Constant;
  double eta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;

  // Factories validate parameter ranges; step_size itself never throws.
  static StepRule constant(double eta);
  static StepRule gclip(double eta, double gamma);
  static StepRule delta_gclip(double eta, double gamma, double delta);

  double step_size(double grad_norm) const;
  StepRule with_eta(double new_eta) const;
};

std::string to_string(StepRule::Kind k);
StepRule::Kind step_rule_kind_from_string(const std::string& name);

// Learning-rate schedule: at iteration `iteration` the current eta is divided
// by `divisor`. Divisions compound across entries.
struct ScheduleEntry {
  long iteration = 0;
  double divisor = 1.0;
};

class Schedule {
 public:
  Schedule() = default;
  // Entries must have strictly increasing iteration indices and divisors > 1.
  explicit Schedule(std::vector<ScheduleEntry> entries);

  const std::vector<ScheduleEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  // eta after applying every entry with entry.iteration <= t.
  double eta_at(long t, double eta0) const;

 private:
  std::vector<ScheduleEntry> entries_;
};

}  // namespace deltaclip
