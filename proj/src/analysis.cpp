#include "deltaclip/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace deltaclip {

double pl_radius(double eta, double beta, double delta, double mu, double l0) {
  if (!(eta > 0.0) || !(beta > 0.0) || !(mu > 0.0)) {
    throw std::invalid_argument("pl_radius: eta, beta, mu must be positive");
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::invalid_argument("pl_radius: delta must lie in (0, 1)");
  }
  if (!(l0 >= 0.0)) throw std::invalid_argument("pl_radius: L0 must be >= 0");
  const double half_rate = 0.5 * eta * delta * mu;
  if (half_rate >= 1.0) {
    throw std::invalid_argument("pl_radius: eta*delta*mu must be < 2");
  }
  return eta * std::sqrt(2.0 * beta) * std::sqrt(l0) / (1.0 - std::sqrt(1.0 - half_rate));
}

EnvelopeResult envelope_against_factor(const Trajectory& traj, double factor) {
  const double l0 = traj.records.front().loss;
  const double slack = 1e-12 * l0;
  EnvelopeResult res{true, 0.0};
  double envelope = l0;
  long prev_t = traj.records.front().t;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& rec = traj.records[i];
    if (i > 0) {
      for (long s = prev_t; s < rec.t; ++s) envelope *= factor;
      prev_t = rec.t;
    }
    if (rec.loss > envelope + slack) res.ok = false;
    if (envelope > 0.0) {
      const double excess = rec.loss / envelope - 1.0;
      if (excess > res.max_violation) res.max_violation = excess;
    } else if (rec.loss > slack) {
      res.max_violation = std::numeric_limits<double>::infinity();
    }
  }
  return res;
}

EnvelopeResult envelope_check(const Trajectory& traj, double eta, double delta, double mu) {
  if (traj.records.empty()) throw std::invalid_argument("envelope_check: empty trajectory");
  if (!(mu > 0.0)) throw std::invalid_argument("envelope_check: mu must be positive");
  return envelope_against_factor(traj, 1.0 - 0.5 * eta * delta * mu);
}

bool ball_check(const Trajectory& traj, double radius) {
  if (traj.records.empty()) throw std::invalid_argument("ball_check: empty trajectory");
  for (const auto& rec : traj.records) {
    if (rec.dist_from_init > radius + 1e-12) return false;
  }
  return true;
}

double ntk_lambda0(const MlpSpec& spec, const Dataset& d) {
  if (d.size() > 64) {
    throw std::invalid_argument("ntk_lambda0: dataset exceeds the n <= 64 eigensolver budget");
  }
  const Matrix j = jacobian(spec, d);
  const int n = j.rows;
  Matrix kernel(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      double s = 0.0;
      const double* ra = j.data.data() + static_cast<std::size_t>(a) * j.cols;
      const double* rb = j.data.data() + static_cast<std::size_t>(b) * j.cols;
      for (int k = 0; k < j.cols; ++k) s += ra[k] * rb[k];
      kernel(a, b) = s;
      kernel(b, a) = s;
    }
  }
  return sym_eig_min(kernel);
}

double empirical_pl(const std::vector<std::pair<double, double>>& loss_and_grad_norm) {
  if (loss_and_grad_norm.empty()) throw std::invalid_argument("empirical_pl: empty input");
  double inf = std::numeric_limits<double>::infinity();
  for (const auto& [loss, grad_norm] : loss_and_grad_norm) {
    if (loss <= 1e-15) continue;  // converged points carry no PL information
    inf = std::min(inf, grad_norm * grad_norm / loss);
  }
  return inf;
}

double empirical_pl(const Trajectory& traj) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(traj.records.size());
  for (const auto& rec : traj.records) pts.emplace_back(rec.loss, rec.grad_norm);
  return empirical_pl(pts);
}

StochasticParams stochastic_params(double epsilon, double theta) {
  if (!(epsilon > 0.0) || !(theta > 0.0)) {
    throw std::invalid_argument("stochastic_params: epsilon and theta must be positive");
  }
  StochasticParams p;
  p.epsilon = epsilon;
  p.theta = theta;
  p.epsilon_prime = epsilon / theta;
  const double e2 = p.epsilon_prime * p.epsilon_prime;
  p.beta = 1.0;
  p.delta = (1.0 + 2.0 * e2) / (1.0 + 3.0 * e2);
  p.eta = (0.25 * e2) / (1.0 + e2);
  p.T = (theta * theta * theta * theta) / (epsilon * epsilon * epsilon * epsilon);

  // The recipe must land strictly inside the admissible intervals.
  const double delta_lower = (1.0 + e2) / (1.0 + 3.0 * e2);
  const double eta_upper = (p.delta * (1.0 + 3.0 * e2) - (1.0 + e2)) / (2.0 * p.beta * (1.0 + e2));
  const double denom = 0.5 * p.eta * (3.0 * p.delta - 1.0) - p.beta * p.eta * p.eta;
  if (!(p.delta > delta_lower && p.delta < 1.0) || !(p.eta > 0.0 && p.eta < eta_upper) ||
      !(denom > 0.0)) {
    throw std::logic_error("stochastic_params: recipe left the admissible region");
  }
  return p;
}

namespace {

double rate_denominator(const StochasticParams& p) {
  const double denom = 0.5 * p.eta * (3.0 * p.delta - 1.0) - p.beta * p.eta * p.eta;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("stochastic bound: eta/2*(3 delta - 1) - beta*eta^2 must be > 0");
  }
  return denom;
}

}  // namespace

double stochastic_bound(const StochasticParams& p, double l1) {
  if (!(l1 >= 0.0)) throw std::invalid_argument("stochastic_bound: L1 must be >= 0");
  const double denom = rate_denominator(p);
  return p.epsilon * p.epsilon + (1.0 / p.T) * l1 / denom;
}

double stochastic_bound_raw(const StochasticParams& p, double l1) {
  if (!(l1 >= 0.0)) throw std::invalid_argument("stochastic_bound_raw: L1 must be >= 0");
  const double denom = rate_denominator(p);
  const double theta_coeff =
      (2.0 * p.beta * p.eta * p.eta + p.eta * (1.0 - p.delta)) / (2.0 * denom);
  return l1 / (p.T * denom) + theta_coeff * p.theta * p.theta;
}

double gradcheck(const Objective& obj, const Vector& w) {
  const double step = 1e-6;
  const Vector analytic = obj.gradient(w);
  Vector probe = w;
  double worst = 0.0;
  for (int i = 0; i < obj.dim(); ++i) {
    const double wi = w[i];
    probe[i] = wi + step;
    const double up = obj.value(probe);
    probe[i] = wi - step;
    const double down = obj.value(probe);
    probe[i] = wi;
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(fd)});
    worst = std::max(worst, std::abs(analytic[i] - fd) / denom);
  }
  return worst;
}

std::string TheoremReport::to_json() const {
  char buf[640];
  std::snprintf(buf, sizeof buf,
                "{\n"
                "  \"mu\": %.17g,\n"
                "  \"beta\": %.17g,\n"
                "  \"lambda0\": %.17g,\n"
                "  \"radius_R\": %.17g,\n"
                "  \"rate_factor\": %.17g,\n"
                "  \"envelope_ok\": %s,\n"
                "  \"max_envelope_violation\": %.17g,\n"
                "  \"radius_ok\": %s,\n"
                "  \"rate_factor_strong\": %.17g\n"
                "}",
                mu, beta, lambda0, radius_R, rate_factor, envelope_ok ? "true" : "false",
                max_envelope_violation, radius_ok ? "true" : "false", rate_factor_strong);
  return buf;
}

TheoremReport make_theorem_report(const Trajectory& traj, double eta, double delta, double mu,
                                  double beta, double lambda0) {
  if (traj.records.empty()) throw std::invalid_argument("make_theorem_report: empty trajectory");
  TheoremReport rep;
  rep.mu = mu;
  rep.beta = beta;
  rep.lambda0 = lambda0;
  rep.rate_factor = 1.0 - 0.5 * eta * delta * mu;
  rep.rate_factor_strong = 1.0 - eta * delta * mu;
  rep.radius_R = pl_radius(eta, beta, delta, mu, traj.initial_loss());
  const EnvelopeResult env = envelope_check(traj, eta, delta, mu);
  rep.envelope_ok = env.ok;
  rep.max_envelope_violation = env.max_violation;
  rep.radius_ok = ball_check(traj, rep.radius_R);
  return rep;
}

}  // namespace deltaclip
