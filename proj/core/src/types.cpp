#include "bfvar/types.hpp"

#include <cmath>
#include <limits>

#include "bfvar/errors.hpp"

namespace bfvar {

GroupStats stats_from_sd(std::size_t n, double sd, SdDivisor divisor) {
    if (n < 1) throw DomainError("sample size must be at least 1");
    if (!std::isfinite(sd) || sd < 0) throw DomainError("standard deviation must be finite and nonnegative");
    GroupStats g;
    g.n = n;
    if (n == 1) return g;
    const double m = divisor == SdDivisor::n ? static_cast<double>(n) : static_cast<double>(n - 1);
    g.ss = m * sd * sd;
    return g;
}

void validate(const GroupStats& g) {
    if (g.members < 1) throw DomainError("group must contain at least one member");
    if (g.n < g.members) throw DomainError("group size " + std::to_string(g.n) + " is smaller than its member count");
    if (!std::isfinite(g.ss) || g.ss < 0) throw DomainError("sum of squares must be finite and nonnegative");
    if (g.df() == 0 && g.ss != 0) throw DomainError("sum of squares must be 0 when there are no residual degrees of freedom");
    if (g.df() > 0 && g.ss == 0)
        throw DomainError("sum of squares is 0 for a group of size " + std::to_string(g.n) + " (degenerate data)");
}

void validate(const PriorSpec& p) {
    if (!(p.alpha1 > 0) || !(p.alpha2 > 0) || !std::isfinite(p.alpha1) || !std::isfinite(p.alpha2))
        throw DomainError("prior shape alpha must be a positive finite number");
}

void validate(const DeltaInterval& d) {
    if (!(d.lo >= 0) || !std::isfinite(d.lo)) throw DomainError("interval lower bound must be finite and >= 0");
    if (!(d.hi > d.lo)) throw DomainError("interval must satisfy lo < hi");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::bridge_encompassing: return "bridge_encompassing";
    }
    return "unknown";
}

RhoPoint rho_of_delta(double delta) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (delta <= 0) return {0.0, 1.0, -inf};
    if (std::isinf(delta)) return {1.0, 0.0, inf};
    const double xi = delta * delta;
    return {xi / (1.0 + xi), 1.0 / (1.0 + xi), 2.0 * std::log(delta)};
}

}  // namespace bfvar
