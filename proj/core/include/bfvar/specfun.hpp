#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace bfvar::specfun {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

double log_gamma(double x);
double log_beta(double a, double b);

// ln 2F1(a, b; c; z) for c > 0, c > b, z <= 1.
double log_2f1(double a, double b, double c, double z);

// Same function with the argument given as 1 - z, for z close to 1.
double log_2f1_1mz(double a, double b, double c, double one_minus_z);

// ln U(a, b, z), Tricomi's confluent hypergeometric function, a > 0, z > 0.
double log_tricomi_u(double a, double b, double z);

// Regularized incomplete beta I_x(a, b) and its complement 1 - I_x(a, b).
double reg_inc_beta(double x, double a, double b);
double reg_inc_beta_upper(double x, double a, double b);
double inv_reg_inc_beta(double p, double a, double b);

QuadratureRule gauss_legendre(std::size_t order);

// Shared, lazily built rule; the reference stays valid for the program lifetime.
const QuadratureRule& cached_gauss_legendre(std::size_t order);

double softplus(double x);       // ln(1 + e^x)
double log_sigmoid(double x);    // ln(1 / (1 + e^-x))
double log_add_exp(double a, double b);

struct LogIntegrateOptions {
    double rel_tol = 1e-12;
    double tail_drop = 60.0;      // support ends where the log integrand fell this far below its peak
    double hint = 0.0;            // starting point for the mode search
    double step = 1.0;            // initial bracketing step
    std::size_t max_panels = 4000;
};

// ln of the integral of exp(log_f) over (lo, hi); endpoints may be infinite.
// log_f must be unimodal on the interval. Returns -inf when the integrand vanishes.
double log_integrate(const std::function<double(double)>& log_f, double lo, double hi,
                     const LogIntegrateOptions& opt = {});

namespace detail {
// Positive-term power series in z, requires a > 0, b > 0, c > 0, 0 <= z < 1.
double log_2f1_series(double a, double b, double c, double z);
// Euler integral in logit coordinates, requires b > 0, c > b, z <= 1.
double log_2f1_euler(double a, double b, double c, double one_minus_z);
// Index of the largest series term, used to pick between representations.
double series_peak(double a, double b, double c, double z);
}  // namespace detail

}  // namespace bfvar::specfun
