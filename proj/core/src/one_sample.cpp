#include "bfvar/one_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bfvar/errors.hpp"
#include "bfvar/specfun.hpp"
#include "bfvar/two_sample.hpp"

namespace bfvar::one_sample {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2 = 0.693147180559945309417232121458176568;

void check_alpha(double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("prior shape alpha must be a positive finite number");
}

// ln of the posterior kernel in x = ln(xi), Jacobian included:
// xi^((n-1)/2 + alpha) (1 + xi)^(-2 alpha) exp(-z xi).
struct Kernel {
    double a, alpha, z;
    double operator()(double x) const { return a * x - 2 * alpha * specfun::softplus(x) - z * std::exp(x); }
};

Kernel kernel(const OneSampleProblem& p, double alpha) {
    return Kernel{0.5 * static_cast<double>(p.n - 1) + alpha, alpha, 0.5 * p.tau0 * p.ss};
}

specfun::LogIntegrateOptions options(const Kernel& k) {
    specfun::LogIntegrateOptions opt;
    if (k.z > 0) opt.hint = std::clamp(std::log(k.a / k.z), -700.0, 700.0);
    opt.step = std::min(1.0, 3.0 / std::sqrt(k.a));
    return opt;
}

double log_integral(const Kernel& k, double xlo, double xhi) {
    auto opt = options(k);
    opt.hint = std::clamp(opt.hint, std::max(xlo, -700.0), std::min(xhi, 700.0));
    return specfun::log_integrate(k, xlo, xhi, opt);
}

void check_disjoint(const DeltaInterval& a, const DeltaInterval& b) {
    if (a.lo == b.lo && a.hi == b.hi) return;
    if (a.hi <= b.lo || b.hi <= a.lo) return;
    throw DomainError("null and alternative intervals overlap");
}

// ln BF of the truncated alternative against the point null xi = 1.
double log_bf_interval(const OneSampleProblem& p, double alpha, const DeltaInterval& iv) {
    const double log_mass = two_sample::log_prior_interval_mass(iv, PriorSpec::symmetric(alpha));
    if (log_mass == -kInf)
        throw DomainError("delta interval [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "] has zero prior mass");
    const Kernel k = kernel(p, alpha);
    const RhoPoint lo = rho_of_delta(iv.lo), hi = rho_of_delta(iv.hi);
    return log_integral(k, lo.logit, hi.logit) - specfun::log_beta(alpha, alpha) - log_mass + k.z;
}

}  // namespace

void validate(const OneSampleProblem& p) {
    if (p.n < 1) throw DomainError("sample size must be at least 1");
    if (!std::isfinite(p.ss) || p.ss < 0) throw DomainError("sum of squares must be finite and nonnegative");
    if (p.n == 1 && p.ss != 0) throw DomainError("sum of squares must be 0 for a single observation");
    if (p.n > 1 && p.ss == 0) throw DomainError("sum of squares is 0 (degenerate data)");
    if (!(p.tau0 > 0) || !std::isfinite(p.tau0)) throw DomainError("reference precision must be positive and finite");
}

BayesFactorResult log_bf10_one(const OneSampleProblem& p, double alpha) {
    validate(p);
    check_alpha(alpha);
    BayesFactorResult r;
    r.method = Method::closed_form;
    if (p.n == 1) return r;
    const double a = 0.5 * static_cast<double>(p.n - 1) + alpha;
    const double b = 0.5 * static_cast<double>(p.n - 1) - alpha + 1.0;
    const double z = 0.5 * p.tau0 * p.ss;
    r.log_bf10 = specfun::log_gamma(a) + specfun::log_tricomi_u(a, b, z) - specfun::log_beta(alpha, alpha) + z;
    return r;
}

BayesFactorResult log_bf_directed_one(const OneSampleProblem& p, double alpha, const DeltaRestriction& null,
                                      const DeltaInterval& alt) {
    validate(p);
    check_alpha(alpha);
    bfvar::validate(alt);
    double log_null = 0.0;
    if (const auto* iv = std::get_if<DeltaInterval>(&null)) {
        bfvar::validate(*iv);
        check_disjoint(*iv, alt);
        log_null = log_bf_interval(p, alpha, *iv);
    }
    BayesFactorResult r;
    r.method = Method::quadrature;
    r.log_bf10 = log_bf_interval(p, alpha, alt) - log_null;
    return r;
}

double posterior_xi_pdf_one(double xi, const OneSampleProblem& p, double alpha) {
    validate(p);
    check_alpha(alpha);
    if (!(xi > 0)) throw DomainError("xi must be positive");
    if (std::isinf(xi)) return 0.0;
    const Kernel k = kernel(p, alpha);
    const double norm = log_integral(k, -kInf, kInf);
    return std::exp((k.a - 1) * std::log(xi) - 2 * alpha * std::log1p(xi) - k.z * xi - norm);
}

double posterior_delta_pdf_one(double delta, const OneSampleProblem& p, double alpha) {
    validate(p);
    check_alpha(alpha);
    if (!(delta > 0)) throw DomainError("delta must be positive");
    if (std::isinf(delta)) return 0.0;
    const Kernel k = kernel(p, alpha);
    const double norm = log_integral(k, -kInf, kInf);
    const double xi = delta * delta;
    return std::exp(kLog2 + (2 * k.a - 1) * std::log(delta) - 2 * alpha * std::log1p(xi) - k.z * xi - norm);
}

DeltaSummary posterior_delta_summary_one(const OneSampleProblem& p, double alpha) {
    validate(p);
    check_alpha(alpha);
    const Kernel k = kernel(p, alpha);
    const auto opt = options(k);
    const double total = log_integral(k, -kInf, kInf);
    auto cdf = [&](double x) { return std::exp(log_integral(k, -kInf, x) - total); };
    auto quantile = [&](double q) {
        double lo = opt.hint - 1, hi = opt.hint + 1;
        while (cdf(lo) > q) lo -= 2 * (hi - lo);
        while (cdf(hi) < q) hi += 2 * (hi - lo);
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200 && hi - lo > 1e-12 * (1 + std::abs(x)); ++it) {
            const double f = cdf(x) - q;
            if (f == 0) break;
            (f < 0 ? lo : hi) = x;
            const double dens = std::exp(k(x) - total);
            double next = dens > 0 ? x - f / dens : 0.5 * (lo + hi);
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            x = next;
        }
        return std::exp(0.5 * x);
    };
    DeltaSummary out;
    out.median = quantile(0.5);
    out.lower = quantile(0.025);
    out.upper = quantile(0.975);
    out.prob_greater_one = std::exp(log_integral(k, 0.0, kInf) - total);
    const Kernel shifted{k.a + 0.5, k.alpha, k.z};
    if (k.z > 0 || 2 * alpha > k.a + 0.5)
        out.mean = std::exp(log_integral(shifted, -kInf, kInf) - total);
    else
        out.mean = std::numeric_limits<double>::quiet_NaN();
    return out;
}

}  // namespace bfvar::one_sample
