#include "bfvar/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <string>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bfvar/errors.hpp"

namespace bfvar::specfun {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.141592653589793238462643383279502884;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

double log_gamma(double x) {
    if (!finite(x) || !(x > 0)) throw DomainError("log_gamma: argument must be positive and finite");
    return boost::math::lgamma(x);
}

double log_beta(double a, double b) {
    if (!finite(a) || !finite(b) || !(a > 0) || !(b > 0))
        throw DomainError("log_beta: arguments must be positive and finite");
    return log_gamma(a) + log_gamma(b) - log_gamma(a + b);
}

double softplus(double x) {
    if (x > 0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double log_sigmoid(double x) { return -softplus(-x); }

double log_add_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0 && x <= 1)) throw DomainError("reg_inc_beta: x must lie in [0, 1]");
    if (!finite(a) || !finite(b) || !(a > 0) || !(b > 0))
        throw DomainError("reg_inc_beta: shape parameters must be positive and finite");
    if (x == 0) return 0.0;
    if (x == 1) return 1.0;
    return boost::math::ibeta(a, b, x);
}

double reg_inc_beta_upper(double x, double a, double b) {
    if (!(x >= 0 && x <= 1)) throw DomainError("reg_inc_beta_upper: x must lie in [0, 1]");
    if (!finite(a) || !finite(b) || !(a > 0) || !(b > 0))
        throw DomainError("reg_inc_beta_upper: shape parameters must be positive and finite");
    if (x == 0) return 1.0;
    if (x == 1) return 0.0;
    return boost::math::ibetac(a, b, x);
}

double inv_reg_inc_beta(double p, double a, double b) {
    if (!(p >= 0 && p <= 1)) throw DomainError("inv_reg_inc_beta: p must lie in [0, 1]");
    if (!finite(a) || !finite(b) || !(a > 0) || !(b > 0))
        throw DomainError("inv_reg_inc_beta: shape parameters must be positive and finite");
    if (p == 0) return 0.0;
    if (p == 1) return 1.0;
    return boost::math::ibeta_inv(a, b, p);
}

QuadratureRule gauss_legendre(std::size_t order) {
    if (order == 0) throw DomainError("gauss_legendre: order must be positive");
    const std::size_t n = order;
    QuadratureRule rule;
    rule.nodes.assign(n, 0.0);
    rule.weights.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(kPi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        const bool centre = (n % 2 == 1) && (i == n / 2);
        if (centre) x = 0.0;
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            if (centre) break;
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                // refresh the derivative at the converged node
                p0 = 1.0;
                p1 = x;
                for (std::size_t k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                    p0 = p1;
                    p1 = p2;
                }
                if (n == 1) p0 = 1.0;
                dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
                break;
            }
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

const QuadratureRule& cached_gauss_legendre(std::size_t order) {
    static std::mutex mu;
    static std::map<std::size_t, std::unique_ptr<QuadratureRule>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[order];
    if (!slot) slot = std::make_unique<QuadratureRule>(gauss_legendre(order));
    return *slot;
}

namespace {

using LogFn = std::function<double(double)>;

double eval_checked(const LogFn& f, double x) {
    const double v = f(x);
    if (std::isnan(v)) throw NumericError("log integrand returned NaN at x = " + std::to_string(x));
    return v;
}

// Maximum of a unimodal function on [lo, hi]; returns (argmax, max).
std::pair<double, double> maximize(const LogFn& f, double lo, double hi, double x0, double step) {
    auto inside = [&](double x) { return std::min(std::max(x, lo), hi); };
    if (!finite(x0)) x0 = 0.0;
    x0 = inside(x0);
    if (!finite(x0)) x0 = finite(lo) ? lo : hi;
    if (!(step > 0)) step = 1.0;

    double a, b;
    const double f0 = eval_checked(f, x0);
    const double xr = inside(x0 + step), xl = inside(x0 - step);
    const double fr = eval_checked(f, xr), fl = eval_checked(f, xl);
    if (fr <= f0 && fl <= f0) {
        a = xl;
        b = xr;
    } else {
        const int dir = fr > fl ? 1 : -1;
        const double bound = dir > 0 ? hi : lo;
        double xprev = x0, xcur = dir > 0 ? xr : xl, fcur = dir > 0 ? fr : fl, h = step;
        for (int it = 0;; ++it) {
            if (it > 4000) throw NumericError("log_integrate: could not bracket the mode");
            if (xcur == bound) {
                a = std::min(xprev, xcur);
                b = std::max(xprev, xcur);
                break;
            }
            h *= 2.0;
            const double xnext = inside(xcur + dir * h);
            const double fnext = eval_checked(f, xnext);
            if (fnext < fcur) {
                a = std::min(xprev, xnext);
                b = std::max(xprev, xnext);
                break;
            }
            xprev = xcur;
            xcur = xnext;
            fcur = fnext;
        }
    }

    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = eval_checked(f, c), fd = eval_checked(f, d);
    for (int it = 0; it < 400; ++it) {
        if (b - a <= 1e-14 * (1.0 + std::abs(c))) break;
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval_checked(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval_checked(f, d);
        }
    }
    double xm = fc >= fd ? c : d, fm = std::max(fc, fd);
    for (double xe : {a, b}) {
        const double fe = eval_checked(f, xe);
        if (fe > fm) {
            fm = fe;
            xm = xe;
        }
    }
    return {xm, fm};
}

double find_edge(const LogFn& f, double xm, double bound, int dir, double threshold) {
    if (xm == bound) return bound;
    if (finite(bound) && eval_checked(f, bound) >= threshold) return bound;
    double h = 1e-6 * (1.0 + std::abs(xm));
    for (int it = 0; it < 3000; ++it) {
        double xn = xm + dir * h;
        if ((dir > 0 && xn >= bound) || (dir < 0 && xn <= bound)) return bound;
        if (eval_checked(f, xn) < threshold) return xn;
        h *= 2.0;
        if (!finite(h)) break;
    }
    throw NumericError("log_integrate: integrand does not decay towards the boundary");
}

struct Panel {
    double a, b, val, err;
    bool operator<(const Panel& o) const { return err < o.err; }
};

}  // namespace

double log_integrate(const LogFn& log_f, double lo, double hi, const LogIntegrateOptions& opt) {
    if (std::isnan(lo) || std::isnan(hi) || !(lo < hi)) throw DomainError("log_integrate: need lo < hi");
    const auto [xm, fm] = maximize(log_f, lo, hi, opt.hint, opt.step);
    if (fm == -kInf) return -kInf;
    if (!finite(fm)) throw NumericError("log_integrate: integrand is not finite at its mode");
    const double threshold = fm - opt.tail_drop;
    const double left = find_edge(log_f, xm, lo, -1, threshold);
    const double right = find_edge(log_f, xm, hi, 1, threshold);
    if (!finite(left) || !finite(right)) throw NumericError("log_integrate: support is unbounded");

    const QuadratureRule& lo_rule = cached_gauss_legendre(24);
    const QuadratureRule& hi_rule = cached_gauss_legendre(48);
    auto panel = [&](double a, double b) {
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < lo_rule.nodes.size(); ++i)
            s1 += lo_rule.weights[i] * std::exp(eval_checked(log_f, mid + half * lo_rule.nodes[i]) - fm);
        for (std::size_t i = 0; i < hi_rule.nodes.size(); ++i)
            s2 += hi_rule.weights[i] * std::exp(eval_checked(log_f, mid + half * hi_rule.nodes[i]) - fm);
        return Panel{a, b, half * s2, half * std::abs(s2 - s1)};
    };

    std::priority_queue<Panel> queue;
    double total = 0.0, err = 0.0;
    auto push = [&](double a, double b) {
        if (!(b > a)) return;
        Panel p = panel(a, b);
        total += p.val;
        err += p.err;
        queue.push(p);
    };
    for (auto [a, b] : {std::pair{left, xm}, std::pair{xm, right}}) {
        if (!(b > a)) continue;
        const double w = (b - a) / 4.0;
        for (int i = 0; i < 4; ++i) push(a + i * w, i == 3 ? b : a + (i + 1) * w);
    }
    while (err > opt.rel_tol * total) {
        if (queue.size() >= opt.max_panels) {
            if (err <= 1e-7 * total) break;
            throw NumericError("log_integrate: no convergence after " + std::to_string(queue.size()) +
                               " panels (relative error estimate " + std::to_string(err / total) + ")");
        }
        const Panel p = queue.top();
        queue.pop();
        total -= p.val;
        err -= p.err;
        const double mid = 0.5 * (p.a + p.b);
        if (!(mid > p.a && mid < p.b)) {
            // panel cannot be split further; keep its estimate
            total += p.val;
            queue.push(Panel{p.a, p.b, p.val, 0.0});
            continue;
        }
        push(p.a, mid);
        push(mid, p.b);
        if (err < 0) err = 0;
    }
    double sum = 0.0;
    while (!queue.empty()) {
        sum += queue.top().val;
        queue.pop();
    }
    if (!(sum > 0)) return -kInf;
    return fm + std::log(sum);
}

namespace detail {

double series_peak(double a, double b, double c, double z) {
    // largest root of (a+k)(b+k)z = (c+k)(k+1)
    const double A = 1.0 - z;
    const double B = c + 1.0 - z * (a + b);
    const double C = c - z * a * b;
    if (!(A > 0)) return kInf;
    const double disc = B * B - 4.0 * A * C;
    if (disc < 0) return 0.0;
    const double root = (-B + std::sqrt(disc)) / (2.0 * A);
    return std::max(root, 0.0);
}

double log_2f1_series(double a, double b, double c, double z) {
    if (!(a > 0 && b > 0 && c > 0 && z >= 0 && z < 1))
        throw DomainError("log_2f1_series: requires a, b, c > 0 and 0 <= z < 1");
    if (z == 0) return 0.0;
    constexpr std::size_t kMaxTerms = 1000000;
    constexpr double kRescale = 1e250;
    const double log_rescale = std::log(kRescale);
    double term = 1.0, sum = 1.0, log_scale = 0.0;
    for (std::size_t k = 0; k < kMaxTerms; ++k) {
        const double kd = static_cast<double>(k);
        const double ratio = (a + kd) * (b + kd) / ((c + kd) * (kd + 1.0)) * z;
        term *= ratio;
        sum += term;
        if (sum > kRescale) {
            sum /= kRescale;
            term /= kRescale;
            log_scale += log_rescale;
        }
        if (ratio < 1.0) {
            const double next = (a + kd + 1) * (b + kd + 1) / ((c + kd + 1) * (kd + 2.0)) * z;
            const double r = std::max(next, z);
            if (r < 1.0 && term * r / (1.0 - r) < 1e-17 * sum) return std::log(sum) + log_scale;
        }
    }
    throw NumericError("log_2f1: power series did not converge within 1e6 terms (a=" + std::to_string(a) +
                       ", b=" + std::to_string(b) + ", c=" + std::to_string(c) + ", z=" + std::to_string(z) + ")");
}

double log_2f1_euler(double a, double b, double c, double one_minus_z) {
    if (!(b > 0 && c > b && one_minus_z >= 0))
        throw DomainError("log_2f1_euler: requires b > 0, c > b and z <= 1");
    const double cb = c - b;
    const double log_w = one_minus_z > 0 ? std::log(one_minus_z) : -kInf;
    auto log_f = [=](double x) {
        // ln(1 - z*sigmoid(x)) = ln(1 + (1-z) e^x) - ln(1 + e^x)
        const double l1mz = (one_minus_z > 0 ? softplus(x + log_w) : 0.0) - softplus(x);
        return b * log_sigmoid(x) + cb * log_sigmoid(-x) - a * l1mz;
    };
    LogIntegrateOptions opt;
    opt.hint = std::log(b / cb);
    const double li = log_integrate(log_f, -kInf, kInf, opt);
    return li - log_beta(b, cb);
}

}  // namespace detail

double log_2f1_1mz(double a, double b, double c, double w1) {
    if (!finite(a) || !finite(b) || !finite(c) || std::isnan(w1))
        throw DomainError("log_2f1: arguments must be finite");
    if (w1 < 0) throw DomainError("log_2f1: z must not exceed 1");
    if (!(c > 0) || !(c > b)) throw DomainError("log_2f1: requires c > 0 and c > b");
    if (a == 0 || b == 0 || w1 == 1) return 0.0;
    if (w1 == 0) {
        if (!(b > 0)) throw DomainError("log_2f1: z = 1 requires b > 0");
        if (!(c - a - b > 0)) throw NumericError("log_2f1: series diverges at z = 1 when c - a - b <= 0");
        return log_beta(b, c - a - b) - log_beta(b, c - b);
    }
    const double z = 1.0 - w1;

    struct Candidate {
        double log_pre, a, b, c, w;
    };
    Candidate cands[2];
    int ncand = 0;
    if (z > 0 && z <= 0.5) {
        cands[ncand++] = {0.0, a, b, c, z};
        cands[ncand++] = {(c - a - b) * std::log(w1), c - a, c - b, c, z};
    } else if (z < 0 && z >= -1.0) {
        const double w = (w1 - 1.0) / w1;
        const double lw1 = std::log(w1);
        cands[ncand++] = {-b * lw1, c - a, b, c, w};
        cands[ncand++] = {-a * lw1, a, c - b, c, w};
    }
    int best = -1;
    double best_peak = 1e5;
    for (int i = 0; i < ncand; ++i) {
        const Candidate& cd = cands[i];
        if (!(cd.a > 0 && cd.b > 0)) continue;
        const double peak = detail::series_peak(cd.a, cd.b, cd.c, cd.w);
        if (peak <= best_peak) {
            best_peak = peak;
            best = i;
        }
    }
    if (best >= 0) {
        const Candidate& cd = cands[best];
        return cd.log_pre + detail::log_2f1_series(cd.a, cd.b, cd.c, cd.w);
    }
    if (!(b > 0)) throw DomainError("log_2f1: b must be positive outside the series region");
    return detail::log_2f1_euler(a, b, c, w1);
}

double log_2f1(double a, double b, double c, double z) {
    if (std::isnan(z)) throw DomainError("log_2f1: z must be a number");
    if (z > 1) throw DomainError("log_2f1: z must not exceed 1");
    return log_2f1_1mz(a, b, c, 1.0 - z);
}

double log_tricomi_u(double a, double b, double z) {
    if (!finite(a) || !finite(b) || !finite(z)) throw DomainError("log_tricomi_u: arguments must be finite");
    if (!(a > 0)) throw DomainError("log_tricomi_u: a must be positive");
    if (!(z > 0)) throw DomainError("log_tricomi_u: z must be positive");
    if (b == a + 1.0) return -a * std::log(z);
    const double e = b - a - 1.0;
    auto log_f = [=](double x) { return a * x + e * softplus(x) - z * std::exp(x); };
    LogIntegrateOptions opt;
    opt.hint = std::clamp(std::log(std::max(a, 1e-300) / z), -700.0, 700.0);
    return log_integrate(log_f, -kInf, kInf, opt) - log_gamma(a);
}

}  // namespace bfvar::specfun
