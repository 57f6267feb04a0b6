#pragma once

#include <string>
#include <utility>
#include <vector>

#include "deltaclip/mlp.hpp"
#include "deltaclip/objective.hpp"
#include "deltaclip/run.hpp"

namespace deltaclip {

// Radius of the ball around the start inside which every iterate of the
// delta-clipped descent provably stays:
//   R = eta * sqrt(2 beta) * sqrt(L0) / (1 - sqrt(1 - eta*delta*mu/2)).
// Requires eta, beta, mu > 0, delta in (0,1), L0 >= 0 and eta*delta*mu < 2.
double pl_radius(double eta, double beta, double delta, double mu, double l0);

struct EnvelopeResult {
  bool ok = false;
  double max_violation = 0.0;  // worst multiplicative excess over the envelope
};

// Checks the geometric rate envelope L_t <= L_0 * (1 - eta*delta*mu/2)^t,
// with slack 1e-12 * L_0 absorbing accumulated rounding.
EnvelopeResult envelope_check(const Trajectory& traj, double eta, double delta, double mu);

// True iff every recorded distance from the start is at most R + 1e-12.
bool ball_check(const Trajectory& traj, double radius);

// Minimum eigenvalue of the tangent kernel K = J J^T at the spec's weights,
// where J is the n x dim output Jacobian over the dataset. n <= 64 (dense
// eigensolver budget). The implied PL* candidate is lambda0 * rho^2 with rho
// from the output activation.
double ntk_lambda0(const MlpSpec& spec, const Dataset& d);

// Largest mu consistent with the visited points: inf over records of
// grad_norm^2 / loss, skipping points with loss <= 1e-15. Returns +inf if
// every point is skipped; throws on empty input.
double empirical_pl(const std::vector<std::pair<double, double>>& loss_and_grad_norm);
double empirical_pl(const Trajectory& traj);

// Parameter recipe for the stochastic analysis at noise scale theta and
// target accuracy epsilon: with eps' = epsilon/theta,
//   beta = 1,  delta = (1 + 2 eps'^2) / (1 + 3 eps'^2),
//   eta = (eps'^2 / 4) / (1 + eps'^2),  T = theta^4 / epsilon^4.
struct StochasticParams {
  double epsilon = 0.0;
  double theta = 0.0;
  double epsilon_prime = 0.0;
  double beta = 1.0;
  double delta = 0.0;
  double eta = 0.0;
  double T = 0.0;
};

// Throws unless epsilon, theta > 0; the returned parameters are verified to
// satisfy the admissible open intervals (delta above (1+eps'^2)/(1+3 eps'^2),
// eta below the matching threshold, positive rate denominator).
StochasticParams stochastic_params(double epsilon, double theta);

// Criticality bound, simplified form: the theta-dependent term is relaxed to
// epsilon^2 (valid for any admissible parameters), leaving
//   epsilon^2 + (1/T) * L1 / (eta/2 * (3 delta - 1) - beta * eta^2).
double stochastic_bound(const StochasticParams& p, double l1);

// Exact two-term form of the same bound:
//   L1 / (T * D) + theta^2 * (2 beta eta^2 + eta (1 - delta)) / (2 D),
// with D = eta/2 * (3 delta - 1) - beta * eta^2.
double stochastic_bound_raw(const StochasticParams& p, double l1);

// Max over coordinates of |analytic - central difference| / max(1, |analytic|,
// |central difference|), with step 1e-6.
double gradcheck(const Objective& obj, const Vector& w);

// Computed theoretical quantities for one run, next to their empirical
// verdicts. lambda0 is 0 when no tangent kernel applies (non-MLP objectives).
struct TheoremReport {
  double mu = 0.0;
  double beta = 0.0;
  double lambda0 = 0.0;
  double radius_R = 0.0;
  double rate_factor = 0.0;        // 1 - eta*delta*mu/2, the envelope actually checked
  bool envelope_ok = false;
  double max_envelope_violation = 0.0;
  bool radius_ok = false;
  double rate_factor_strong = 0.0;  // 1 - eta*delta*mu, logged for reference

  std::string to_json() const;  // field names fixed by the file format
};

// Builds the report for a finished run. mu and beta describe the objective
// (analytic when known, measured otherwise); lambda0 may be 0 when absent.
TheoremReport make_theorem_report(const Trajectory& traj, double eta, double delta, double mu,
                                  double beta, double lambda0);

}  // namespace deltaclip
