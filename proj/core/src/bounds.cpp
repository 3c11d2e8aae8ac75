#include "sarsalab/bounds.hpp"

#include <cmath>

#include "sarsalab/errors.hpp"

namespace sarsalab {

namespace {

void check_mixing(double m, double rho) {
  if (!(m > 0.0)) throw ParameterError("bounds: m must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("bounds: rho must lie in (0,1)");
}

}  // namespace

double lambda_ceil_term(double m, double rho) {
  check_mixing(m, rho);
  // For m >= 1 this is ceil(log_rho 1/m), the time the envelope m rho^t needs
  // to fall below one. For m < 1 the signed logarithm turns negative and would
  // shrink the constant below the perturbation bound it has to dominate, so
  // the magnitude is used; it upper-bounds the m >= 1 value at equal |ln m|.
  return std::ceil(std::abs(std::log(m)) / std::log(1.0 / rho));
}

double lambda_const(double g_const, int n_actions, double m, double rho) {
  check_mixing(m, rho);
  if (n_actions < 1) throw ParameterError("lambda_const: n_actions must be >= 1");
  return g_const * n_actions *
         (2.0 + lambda_ceil_term(m, rho) + 1.0 / (1.0 - rho));
}

long tau0(double m, double rho, double alpha) {
  check_mixing(m, rho);
  if (!(alpha > 0.0)) throw ParameterError("tau0: alpha must be > 0");
  long t = 0;
  double envelope = m;
  while (envelope > alpha) {
    envelope *= rho;
    ++t;
  }
  return t;
}

long tau0_block(double m, double rho, double alpha, int block_b) {
  check_mixing(m, rho);
  if (!(alpha > 0.0)) throw ParameterError("tau0_block: alpha must be > 0");
  if (block_b < 1) throw ParameterError("tau0_block: B must be >= 1");
  long n = 0;
  double envelope = m;
  const double block_decay = std::pow(rho, block_b);
  while (envelope > alpha) {
    envelope *= block_decay;
    ++n;
  }
  return n * block_b;
}

double radius_bound(double r_max, double w_l) {
  if (!(r_max >= 0.0)) throw ParameterError("radius_bound: r_max must be >= 0");
  if (!(w_l < 0.0))
    throw ParameterError(
        "radius_bound: w_l must be negative (features not independent or oracle failed)");
  return r_max / std::abs(w_l);
}

BoundBreakdown theorem1_bound(const BoundInputs& in) {
  if (!(in.w > 0.0)) throw ParameterError("theorem1_bound: w must be > 0");
  if (in.horizon_T < 1) throw ParameterError("theorem1_bound: T must be >= 1");
  BoundBreakdown out;
  out.lambda = in.lambda;
  if (in.w > in.w_s) {
    out.applicable = false;
    out.warning = "w exceeds w_s; Theorem 1 precondition violated";
  }
  const double t = static_cast<double>(in.horizon_T);
  out.alpha_at_T = 1.0 / (2.0 * in.w * (t + 1.0));
  out.tau0 = tau0(in.m, in.rho, out.alpha_at_T);
  const double tau = static_cast<double>(out.tau0);
  const double g2 = in.g_const * in.g_const;
  const double log_term = std::log(t) + 1.0;
  out.term1 = g2 *
              (4.0 * in.c_lipschitz * in.n_actions * in.g_const * tau * tau +
               (12.0 + 2.0 * in.lambda * in.c_lipschitz) * tau + 1.0) *
              log_term / (4.0 * in.w * in.w * t);
  out.term2 = 2.0 * g2 * (tau * in.w + in.w + 1.0 / in.rho) / (in.w * in.w * t);
  out.total = out.term1 + out.term2;
  return out;
}

BoundBreakdown theorem2_bound(const BoundInputs& in) {
  if (!(in.alpha0 > 0.0)) throw ParameterError("theorem2_bound: alpha0 must be > 0");
  if (!(in.w_s > 0.0)) throw ParameterError("theorem2_bound: w_s must be > 0");
  if (!(in.alpha0 < 1.0 / (2.0 * in.w_s)))
    throw ParameterError("theorem2_bound: requires alpha0 < 1/(2 w_s)");
  if (in.horizon_T < 1) throw ParameterError("theorem2_bound: T must be >= 1");
  BoundBreakdown out;
  out.lambda = in.lambda;
  out.alpha_at_T = in.alpha0;
  out.tau0 = tau0(in.m, in.rho, in.alpha0);
  const double tau = static_cast<double>(out.tau0);
  const double g2 = in.g_const * in.g_const;
  out.term1 = std::exp(-2.0 * in.alpha0 * in.w_s * static_cast<double>(in.horizon_T)) *
              in.theta0_error;
  out.term2 = in.alpha0 * g2 *
              ((12.0 + 2.0 * in.lambda * in.c_lipschitz) * tau +
               4.0 * in.g_const * in.c_lipschitz * in.n_actions * tau * tau +
               8.0 / in.rho + 1.0) /
              (2.0 * in.w_s);
  out.total = out.term1 + out.term2;
  return out;
}

BoundBreakdown theorem3_decaying_bound(const BoundInputs& in) {
  if (!(in.w > 0.0)) throw ParameterError("theorem3_decaying_bound: w must be > 0");
  if (in.horizon_T < 1) throw ParameterError("theorem3_decaying_bound: T must be >= 1");
  if (in.inner_B < 1) throw ParameterError("theorem3_decaying_bound: B must be >= 1");
  BoundBreakdown out;
  out.lambda = in.lambda;
  if (in.w > in.w_s) {
    out.applicable = false;
    out.warning = "w exceeds w_s; Theorem 3 precondition violated";
  }
  const double t = static_cast<double>(in.horizon_T);
  const double b = static_cast<double>(in.inner_B);
  // alpha_t = 1/(2tw) indexing, evaluated at global time TB.
  out.alpha_at_T = 1.0 / (2.0 * t * b * in.w);
  out.tau0 = tau0_block(in.m, in.rho, out.alpha_at_T, in.inner_B);
  const double tau = static_cast<double>(out.tau0);
  const double g2 = in.g_const * in.g_const;
  const double g3 = g2 * in.g_const;
  const double lc = in.lambda * in.c_lipschitz;
  const double log_term = std::log(t) + 1.0;
  const double numerator =
      4.0 * g2 * (tau + b) * in.w +
      log_term * ((6.0 + lc) * g2 * tau + (6.5 + lc) * g2 * b +
                  in.c_lipschitz * in.n_actions * g3 * tau * tau) +
      4.0 * g2 / in.rho + 0.5 * b * g2;
  out.total = numerator / (in.w * in.w * b * t);
  out.term1 = log_term * ((6.0 + lc) * g2 * tau + (6.5 + lc) * g2 * b +
                          in.c_lipschitz * in.n_actions * g3 * tau * tau) /
              (in.w * in.w * b * t);
  out.term2 = out.total - out.term1;
  return out;
}

BoundBreakdown theorem3_constant_bound(const BoundInputs& in) {
  if (!(in.alpha0 > 0.0)) throw ParameterError("theorem3_constant_bound: alpha0 must be > 0");
  if (!(in.w_s > 0.0)) throw ParameterError("theorem3_constant_bound: w_s must be > 0");
  if (in.inner_B < 1) throw ParameterError("theorem3_constant_bound: B must be >= 1");
  if (!(in.alpha0 < 1.0 / (2.0 * in.w_s * in.inner_B)))
    throw ParameterError("theorem3_constant_bound: requires alpha0 < 1/(2 w_s B)");
  if (in.horizon_T < 1) throw ParameterError("theorem3_constant_bound: T must be >= 1");
  BoundBreakdown out;
  out.lambda = in.lambda;
  out.alpha_at_T = in.alpha0;
  out.tau0 = tau0_block(in.m, in.rho, in.alpha0, in.inner_B);
  const double tau = static_cast<double>(out.tau0);
  const double b = static_cast<double>(in.inner_B);
  const double g2 = in.g_const * in.g_const;
  const double g3 = g2 * in.g_const;
  out.term1 = std::exp(-2.0 * in.w_s * b * in.alpha0 * static_cast<double>(in.horizon_T)) *
              in.theta0_error;
  out.term2 = in.alpha0 *
              (b * g2 + 2.0 * (6.0 + in.lambda * in.c_lipschitz) * g2 * (tau + b) +
               8.0 * g2 / in.rho + 2.0 * in.n_actions * g3 * tau * tau) /
              (2.0 * in.w_s);
  out.total = out.term1 + out.term2;
  return out;
}

}  // namespace sarsalab
