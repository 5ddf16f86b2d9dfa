#include "bfvar/elicitation.hpp"

#include <cmath>
#include <sstream>

#include "bfvar/errors.hpp"
#include "bfvar/two_sample.hpp"

namespace bfvar::elicitation {

namespace {

constexpr double kAlphaMin = 1e-4;
constexpr double kAlphaMax = 1e4;

}  // namespace

void validate(const ElicitationTarget& t) {
    bfvar::validate(t.interval);
    if (!(t.prob > 0 && t.prob < 1)) throw DomainError("target probability must lie strictly between 0 and 1");
    if (t.truncation) {
        bfvar::validate(*t.truncation);
        if (t.interval.lo < t.truncation->lo || t.interval.hi > t.truncation->hi)
            throw DomainError("elicitation interval must lie within the truncation interval");
    }
}

double delta_interval_prob(const DeltaInterval& interval, double alpha, const std::optional<DeltaInterval>& truncation) {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("alpha must be a positive finite number");
    const PriorSpec prior = PriorSpec::symmetric(alpha);
    double log_p = two_sample::log_prior_interval_mass(interval, prior);
    if (truncation) {
        if (interval.lo < truncation->lo || interval.hi > truncation->hi)
            throw DomainError("elicitation interval must lie within the truncation interval");
        const double log_t = two_sample::log_prior_interval_mass(*truncation, prior);
        if (std::isinf(log_t)) throw DomainError("truncation interval has zero prior mass");
        log_p -= log_t;
    }
    return std::exp(log_p);
}

double solve_alpha(const ElicitationTarget& target) {
    validate(target);
    auto f = [&](double log_alpha) {
        return delta_interval_prob(target.interval, std::exp(log_alpha), target.truncation) - target.prob;
    };
    double lo = std::log(kAlphaMin), hi = std::log(kAlphaMax);
    double flo = f(lo), fhi = f(hi);
    if (flo == 0) return kAlphaMin;
    if (fhi == 0) return kAlphaMax;
    if ((flo > 0) == (fhi > 0)) {
        std::ostringstream msg;
        msg << "no alpha in [1e-4, 1e4] attains probability " << target.prob << "; attainable range is ["
            << std::min(flo, fhi) + target.prob << ", " << std::max(flo, fhi) + target.prob << "]";
        throw DomainError(msg.str());
    }
    // bisection until the bracket is narrow, then secant steps kept inside the bracket
    while (hi - lo > 1e-3) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0) return std::exp(mid);
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    double x = lo - flo * (hi - lo) / (fhi - flo);
    for (int it = 0; it < 100; ++it) {
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
        const double fx = f(x);
        if (std::abs(fx) < 1e-13 || hi - lo < 1e-15) return std::exp(x);
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        x = lo - flo * (hi - lo) / (fhi - flo);
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace bfvar::elicitation
