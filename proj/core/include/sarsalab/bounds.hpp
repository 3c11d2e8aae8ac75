#pragma once

#include <string>

namespace sarsalab {

/// Constants feeding the finite-sample bound formulas.
struct BoundInputs {
  double g_const = 0.0;     // G = r_max + 2R
  double lambda = 0.0;      // G|A|(2 + ceil(log_rho 1/m) + 1/(1-rho))
  double c_lipschitz = 0.0; // C
  int n_actions = 0;
  double w = 0.0;           // decaying step-size constant, must be <= w_s
  double w_s = 0.0;
  double m = 0.0;           // mixing constants
  double rho = 0.0;
  long horizon_T = 0;       // evaluation time (blocks for the fitted bounds)
  int inner_B = 1;
  double alpha0 = 0.0;      // constant step size
  double theta0_error = 0.0;  // ||theta_0 - theta*||^2
};

/// Ceiling term of lambda and of the stationary-law perturbation bound:
/// ceil(|ln m| / ln(1/rho)). Equals ceil(log_rho 1/m) for m >= 1 and
/// dominates the perturbation constant for m < 1 as well.
double lambda_ceil_term(double m, double rho);

/// lambda = G |A| (2 + ceil-term + 1/(1-rho)), natural logs.
double lambda_const(double g_const, int n_actions, double m, double rho);

/// Smallest t >= 0 with m rho^t <= alpha.
long tau0(double m, double rho, double alpha);

/// inf{ nB : m rho^{nB} <= alpha }, n ranging over nonnegative integers.
long tau0_block(double m, double rho, double alpha, int block_b);

/// r_max / |w_l|; requires w_l < 0.
double radius_bound(double r_max, double w_l);

/// Evaluated bound with every intermediate constant kept for the audit CSV.
struct BoundBreakdown {
  double total = 0.0;
  double term1 = 0.0;        // polylog term / transient
  double term2 = 0.0;        // 1/T term / plateau
  long tau0 = 0;
  double alpha_at_T = 0.0;
  double lambda = 0.0;       // the lambda the formula was evaluated with
  bool applicable = true;    // false when a precondition is violated
  std::string warning;
};

/// Decaying-step SARSA bound at time T:
///   G^2 (4C|A|G tau0^2 + (12+2 lambda C) tau0 + 1)(log T + 1) / (4 w^2 T)
/// + 2 G^2 (tau0 w + w + 1/rho) / (w^2 T),
/// tau0 at alpha_T = 1/(2w(T+1)). w > w_s only attaches a warning.
BoundBreakdown theorem1_bound(const BoundInputs& inputs);

/// Constant-step SARSA bound at time T: transient
/// exp(-2 alpha0 w_s T) ||theta0 - theta*||^2 plus plateau
/// alpha0 G^2 ((12+2 lambda C) tau0 + 4 G C |A| tau0^2 + 8/rho + 1) / (2 w_s).
/// Requires alpha0 < 1/(2 w_s).
BoundBreakdown theorem2_bound(const BoundInputs& inputs);

/// Fitted SARSA, decaying steps alpha_t = 1/(2tw) (alpha_0 = 1/(sqrt2 B w)),
/// evaluated after T blocks of B updates; tau0 over multiples of B at
/// alpha_{TB}.
BoundBreakdown theorem3_decaying_bound(const BoundInputs& inputs);

/// Fitted SARSA, constant step alpha0 < 1/(2 w_s B), after T blocks.
BoundBreakdown theorem3_constant_bound(const BoundInputs& inputs);

}  // namespace sarsalab
