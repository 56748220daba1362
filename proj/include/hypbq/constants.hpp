#pragma once

// Closed-form constants for the fixed-point and stability estimates, plus the
// gamma-function machinery they need.

#include <cmath>
#include <stdexcept>
#include <string>

namespace hypbq {

// Lanczos approximation (g = 7, 9 coefficients), ~15 significant digits.
inline double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_fn: x must be positive");
  static const double g = 7.0;
  static const double c[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5)
    return M_PI / (std::sin(M_PI * x) * gamma_fn(1.0 - x));
  x -= 1.0;
  double a = c[0];
  const double t = x + g + 0.5;
  for (int i = 1; i < 9; ++i) a += c[i] / (x + i);
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

namespace detail {

// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
// continued fraction for the complement otherwise.
inline double gamma_p_reg(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_p_reg: a must be positive");
  if (x < 0.0) throw std::invalid_argument("gamma_p_reg: x must be >= 0");
  if (x == 0.0) return 0.0;
  const double lg = std::lgamma(a);
  const double lead = a * std::log(x) - x - lg;
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term, ai = a;
    for (int i = 0; i < 500; ++i) {
      ai += 1.0;
      term *= x / ai;
      sum += term;
      if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    }
    return sum * std::exp(lead);
  }
  // Lentz continued fraction for Q(a, x).
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return 1.0 - std::exp(lead) * h;
}

}  // namespace detail

// Lower incomplete gamma, unnormalized: int_0^x s^{a-1} e^{-s} ds.
inline double lower_incomplete_gamma(double a, double x) {
  return detail::gamma_p_reg(a, x) * gamma_fn(a);
}

// N = C^{2/p} (beta^{theta-1} Gamma(1-theta) + 1/beta), theta = d/p.
inline double bound_N(double C, double p, double beta, int d) {
  const double theta = d / p;
  if (!(theta < 1.0))
    throw std::invalid_argument("bound_N: requires p > d (theta = d/p < 1)");
  if (!(beta > 0.0)) throw std::invalid_argument("bound_N: beta must be positive");
  return std::pow(C, 2.0 / p) *
         (std::pow(beta, theta - 1.0) * gamma_fn(1.0 - theta) + 1.0 / beta);
}

inline bool near_critical(double p, int d) { return p - d < 0.05; }

// M = C^{1/p+1/d} (beta_tilde^{theta~-1} Gamma(1-theta~) + 1/beta_tilde),
// theta~ = (d/2)(1/p + 1/d).
inline double bound_M(double C, double p, int d, double beta_tilde) {
  if (!(p > d)) throw std::invalid_argument("bound_M: requires p > d");
  if (!(beta_tilde > 0.0))
    throw std::invalid_argument("bound_M: beta_tilde must be positive");
  const double theta_t = 0.5 * d * (1.0 / p + 1.0 / d);
  return std::pow(C, 1.0 / p + 1.0 / d) *
         (std::pow(beta_tilde, theta_t - 1.0) * gamma_fn(1.0 - theta_t) +
          1.0 / beta_tilde);
}

struct ConeExponents {
  double theta;        // smoothing exponent of the h-coupling term
  double theta_tilde;  // smoothing exponent of the bilinear term
};

// C_delta = M / (1 - 2 rho C~ ((g-d)^{th~-1} Gamma(1-th~) + 2/g)
//               -       C~ ||h|| ((g-d)^{th-1} Gamma(1-th) + 2/g))
inline double c_delta(double M_pref, double rho, double C_tilde, double gamma,
                      double delta, double h_norm, const ConeExponents& e) {
  if (!(gamma > delta && delta >= 0.0))
    throw std::invalid_argument("c_delta: requires 0 <= delta < gamma");
  const double gd = gamma - delta;
  const double den =
      1.0 -
      2.0 * rho * C_tilde *
          (std::pow(gd, e.theta_tilde - 1.0) * gamma_fn(1.0 - e.theta_tilde) +
           2.0 / gamma) -
      C_tilde * h_norm *
          (std::pow(gd, e.theta - 1.0) * gamma_fn(1.0 - e.theta) + 2.0 / gamma);
  if (!(den > 0.0))
    throw std::domain_error("c_delta: denominator <= 0 (delta too large or smallness violated)");
  return M_pref / den;
}

}  // namespace hypbq
