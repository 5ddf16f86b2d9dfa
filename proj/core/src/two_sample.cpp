#include "bfvar/two_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bfvar/errors.hpp"
#include "bfvar/specfun.hpp"

namespace bfvar::two_sample {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogPi = 1.144729885849400174143427351353058712;
constexpr double kLog2 = 0.693147180559945309417232121458176568;

using specfun::log_beta;
using specfun::log_gamma;
using specfun::log_sigmoid;
using specfun::softplus;

struct Setup {
    double A, B1, B2, ss1, ss2, a1, a2, log_c;
};

Setup setup(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    validate(g1);
    validate(g2);
    validate(prior);
    const std::size_t n = g1.n + g2.n, m = g1.members + g2.members;
    if (n <= m) throw DomainError("two-sample marginal likelihood needs n1 + n2 >= 3");
    if (!(g1.ss + g2.ss > 0)) throw DomainError("total sum of squares is 0");
    Setup s;
    s.A = 0.5 * static_cast<double>(n - m);
    s.B1 = 0.5 * static_cast<double>(g1.df()) + prior.alpha1;
    s.B2 = 0.5 * static_cast<double>(g2.df()) + prior.alpha2;
    s.ss1 = g1.ss;
    s.ss2 = g2.ss;
    s.a1 = prior.alpha1;
    s.a2 = prior.alpha2;
    s.log_c = -s.A * kLogPi + log_gamma(s.A);
    return s;
}

// ln of the integral of rho^(B1-1) (1-rho)^(B2-1) (rho ss1 + (1-rho) ss2)^(-A),
// minus A ln(max ss); the hypergeometric argument is oriented so that |z| < 1.
double log_kernel_scaled(const Setup& s) {
    if (s.ss1 <= s.ss2)
        return log_beta(s.B1, s.B2) + specfun::log_2f1_1mz(s.A, s.B1, s.B1 + s.B2, s.ss1 / s.ss2);
    return log_beta(s.B2, s.B1) + specfun::log_2f1_1mz(s.A, s.B2, s.B1 + s.B2, s.ss2 / s.ss1);
}

double log_kernel(const Setup& s) { return -s.A * std::log(std::max(s.ss1, s.ss2)) + log_kernel_scaled(s); }

// ln(rho ss1 + (1-rho) ss2) at rho = sigmoid(x).
double log_mix(const Setup& s, double x) {
    if (s.ss2 > 0) {
        if (s.ss1 > 0) return std::log(s.ss2) + softplus(x + std::log(s.ss1 / s.ss2)) - softplus(x);
        return std::log(s.ss2) - softplus(x);
    }
    return std::log(s.ss1) - softplus(-x);
}

// Kernel in logit coordinates, Jacobian included.
double log_kernel_x(const Setup& s, double x) {
    return s.B1 * log_sigmoid(x) + s.B2 * log_sigmoid(-x) - s.A * log_mix(s, x);
}

specfun::LogIntegrateOptions kernel_options(const Setup& s) {
    specfun::LogIntegrateOptions opt;
    if (s.ss1 > 0 && s.ss2 > 0) opt.hint = std::log((s.B1 * s.ss2) / (s.B2 * s.ss1));
    opt.step = std::min(1.0, 3.0 * std::sqrt(1.0 / s.B1 + 1.0 / s.B2));
    return opt;
}

double log_kernel_between(const Setup& s, double xlo, double xhi) {
    auto opt = kernel_options(s);
    opt.hint = std::clamp(opt.hint, std::max(xlo, -700.0), std::min(xhi, 700.0));
    return specfun::log_integrate([&](double x) { return log_kernel_x(s, x); }, xlo, xhi, opt);
}

double power_term(double e, double log_v) {
    if (e == 0) return 0.0;
    return e * log_v;
}

bool predictive_matching(const GroupStats& g1, const GroupStats& g2) {
    if (g1.members != 1 || g2.members != 1) return false;
    return (g1.n == 1 && g2.n == 1) || (g1.n == 1 && g2.n == 2) || (g1.n == 2 && g2.n == 1);
}

}  // namespace

double log_ml_h0(const GroupStats& g1, const GroupStats& g2) {
    const Setup s = setup(g1, g2, PriorSpec{});
    return s.log_c - s.A * std::log(s.ss1 + s.ss2);
}

double log_ml_h1(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    const Setup s = setup(g1, g2, prior);
    return s.log_c - log_beta(s.a1, s.a2) + log_kernel(s);
}

BayesFactorResult log_bf10(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    BayesFactorResult r;
    r.method = Method::closed_form;
    validate(g1);
    validate(g2);
    validate(prior);
    if (predictive_matching(g1, g2)) {
        r.log_bf10 = 0.0;
        return r;
    }
    const Setup s = setup(g1, g2, prior);
    const double ratio = std::min(s.ss1, s.ss2) / std::max(s.ss1, s.ss2);
    r.log_bf10 = log_kernel_scaled(s) - log_beta(s.a1, s.a2) + s.A * std::log1p(ratio);
    if (!prior.information_consistent()) r.flags.push_back("alpha > 1/2: information consistency not guaranteed");
    return r;
}

double log_integrand_rho(double rho, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    if (!(rho >= 0 && rho <= 1)) throw DomainError("rho must lie in [0, 1]");
    const Setup s = setup(g1, g2, prior);
    const double lr = std::log(rho), l1r = std::log1p(-rho);
    return s.log_c - log_beta(s.a1, s.a2) + power_term(s.B1 - 1, lr) + power_term(s.B2 - 1, l1r) -
           s.A * std::log(rho * s.ss1 + (1 - rho) * s.ss2);
}

double posterior_rho_pdf(double rho, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    if (!(rho >= 0 && rho <= 1)) throw DomainError("rho must lie in [0, 1]");
    const Setup s = setup(g1, g2, prior);
    const double lr = std::log(rho), l1r = std::log1p(-rho);
    const double v = power_term(s.B1 - 1, lr) + power_term(s.B2 - 1, l1r) -
                     s.A * std::log(rho * s.ss1 + (1 - rho) * s.ss2) - log_kernel(s);
    return std::exp(v);
}

double posterior_delta_pdf(double delta, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    if (!(delta > 0)) throw DomainError("delta must be positive");
    const Setup s = setup(g1, g2, prior);
    if (std::isinf(delta)) return 0.0;
    const double xi = delta * delta;
    const double v = kLog2 + (2 * s.B1 - 1) * std::log(delta) - (s.a1 + s.a2) * std::log1p(xi) -
                     s.A * std::log(s.ss2 + s.ss1 * xi) - log_kernel(s);
    return std::exp(v);
}

double prior_delta_pdf(double delta, const PriorSpec& prior) {
    validate(prior);
    if (!(delta >= 0)) throw DomainError("delta must be nonnegative");
    if (std::isinf(delta)) return 0.0;
    const double e = 2 * prior.alpha1 - 1;
    if (delta == 0) return e > 0 ? 0.0 : (e < 0 ? kInf : std::exp(kLog2 - log_beta(prior.alpha1, prior.alpha2)));
    return std::exp(kLog2 + e * std::log(delta) - (prior.alpha1 + prior.alpha2) * std::log1p(delta * delta) -
                    log_beta(prior.alpha1, prior.alpha2));
}

double joint_posterior_pdf(double rho, double tau, const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    if (!(rho > 0 && rho < 1)) throw DomainError("rho must lie in (0, 1)");
    if (!(tau > 0)) throw DomainError("tau must be positive");
    const Setup s = setup(g1, g2, prior);
    const double v = (s.A - 1) * std::log(tau) + (s.B1 - 1) * std::log(rho) + (s.B2 - 1) * std::log1p(-rho) -
                     tau * (rho * s.ss1 + (1 - rho) * s.ss2) - log_gamma(s.A) - log_kernel(s);
    return std::exp(v);
}

double log_prior_interval_mass(const DeltaInterval& iv, const PriorSpec& prior) {
    validate(iv);
    validate(prior);
    const RhoPoint lo = rho_of_delta(iv.lo), hi = rho_of_delta(iv.hi);
    const double a = prior.alpha1, b = prior.alpha2;
    double mass;
    if (hi.rho <= 0.5) {
        mass = specfun::reg_inc_beta(hi.rho, a, b) - specfun::reg_inc_beta(lo.rho, a, b);
    } else if (lo.rho >= 0.5) {
        // upper tails through the mirrored distribution keep 1 - rho exact
        mass = specfun::reg_inc_beta(lo.one_minus_rho, b, a) - specfun::reg_inc_beta(hi.one_minus_rho, b, a);
    } else {
        mass = 1.0 - specfun::reg_inc_beta(lo.rho, a, b) - specfun::reg_inc_beta(hi.one_minus_rho, b, a);
    }
    if (!(mass > 0)) return -kInf;
    return std::log(mass);
}

double log_ml_interval(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior, const DeltaInterval& iv) {
    const Setup s = setup(g1, g2, prior);
    const double log_mass = log_prior_interval_mass(iv, prior);
    if (log_mass == -kInf)
        throw DomainError("delta interval [" + std::to_string(iv.lo) + ", " + std::to_string(iv.hi) + "] has zero prior mass");
    const RhoPoint lo = rho_of_delta(iv.lo), hi = rho_of_delta(iv.hi);
    const double li = log_kernel_between(s, lo.logit, hi.logit);
    return s.log_c - log_beta(s.a1, s.a2) + li - log_mass;
}

namespace {

void check_disjoint(const DeltaInterval& a, const DeltaInterval& b) {
    if (a.lo == b.lo && a.hi == b.hi) return;
    if (a.hi <= b.lo || b.hi <= a.lo) return;
    throw DomainError("null and alternative intervals overlap");
}

}  // namespace

BayesFactorResult log_bf_directed(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior,
                                  const DeltaRestriction& null, const DeltaInterval& alt) {
    validate(alt);
    double log_null;
    if (const auto* iv = std::get_if<DeltaInterval>(&null)) {
        validate(*iv);
        check_disjoint(*iv, alt);
        log_null = log_ml_interval(g1, g2, prior, *iv);
    } else {
        log_null = log_ml_h0(g1, g2);
    }
    BayesFactorResult r;
    r.method = Method::quadrature;
    r.log_bf10 = log_ml_interval(g1, g2, prior, alt) - log_null;
    return r;
}

DeltaSummary posterior_delta_summary(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    const Setup s = setup(g1, g2, prior);
    auto lx = [&](double x) { return log_kernel_x(s, x); };
    const auto opt = kernel_options(s);
    const double total = specfun::log_integrate(lx, -kInf, kInf, opt);
    auto cdf = [&](double x) {
        auto o = opt;
        o.hint = std::min(opt.hint, x);
        return std::exp(specfun::log_integrate(lx, -kInf, x, o) - total);
    };
    auto quantile = [&](double q) {
        double lo = opt.hint - 1, hi = opt.hint + 1;
        while (cdf(lo) > q) lo -= 2 * (hi - lo);
        while (cdf(hi) < q) hi += 2 * (hi - lo);
        double x = 0.5 * (lo + hi);
        for (int it = 0; it < 200 && hi - lo > 1e-12 * (1 + std::abs(x)); ++it) {
            const double f = cdf(x) - q;
            if (f == 0) break;
            (f < 0 ? lo : hi) = x;
            const double dens = std::exp(lx(x) - total);
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
    {
        auto o = opt;
        o.hint = std::max(opt.hint, 0.0);
        out.prob_greater_one = std::exp(specfun::log_integrate(lx, 0.0, kInf, o) - total);
    }
    if (s.B2 > 0.5) {
        out.mean = std::exp(specfun::log_integrate([&](double x) { return lx(x) + 0.5 * x; }, -kInf, kInf, opt) - total);
    } else {
        out.mean = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

double jeffreys_bf01_1939(const GroupStats& g1, const GroupStats& g2) {
    validate(g1);
    validate(g2);
    if (g1.n < 2 || g2.n < 2 || !(g1.ss > 0) || !(g2.ss > 0))
        throw DomainError("Jeffreys' approximation needs n >= 2 and positive sums of squares in both groups");
    const double n1 = static_cast<double>(g1.n), n2 = static_cast<double>(g2.n), N = n1 + n2;
    const double z = 0.5 * std::log((g1.ss / (n1 - 1)) / (g2.ss / (n2 - 1)));
    const double pi = std::exp(kLogPi);
    return std::pow(N - 2, 1.5) / (2 * std::sqrt(pi * (n1 - 1) * (n2 - 1))) *
           std::exp(2 * (n2 - n1) / (N - 2) * z - (n1 - 1) * (n2 - 1) / (N - 2) * z * z);
}

}  // namespace bfvar::two_sample
