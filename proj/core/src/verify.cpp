#include "bfvar/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bfvar/errors.hpp"
#include "bfvar/one_sample.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/two_sample.hpp"

namespace bfvar::verify {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogPi = 1.144729885849400174143427351353058712;
constexpr double kScanHalfWidth = 40.0;
constexpr double kScanStep = 0.1;
constexpr double kTailDrop = 60.0;
constexpr double kEdgeCap = 600.0;
constexpr double kTolerance = 1e-10;
constexpr std::size_t kMaxPanels = std::size_t{1} << 15;

using LogFn = std::function<double(double)>;
using Rule = boost::math::quadrature::gauss<double, 20>;

double lgam(double x) { return boost::math::lgamma(x); }
double lbeta(double a, double b) { return lgam(a) + lgam(b) - lgam(a + b); }

// ln(1 / (1 + e^-x)), written independently of the library helpers.
double ln_sig(double x) { return x < 0 ? x - std::log1p(std::exp(x)) : -std::log1p(std::exp(-x)); }

double lse(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    return std::max(a, b) + std::log1p(std::exp(-std::abs(a - b)));
}

double panel_sum(const LogFn& f, double a, double b, std::size_t panels) {
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    const double h = (b - a) / static_cast<double>(panels);
    std::vector<double> terms;
    terms.reserve(panels * 20);
    double mx = -kInf;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h, half = 0.5 * h;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            for (double sgn : {-1.0, 1.0}) {
                if (xs[i] == 0.0 && sgn > 0) continue;
                const double v = f(mid + sgn * half * xs[i]);
                const double t = std::isfinite(v) ? v + std::log(ws[i] * half) : -kInf;
                terms.push_back(t);
                mx = std::max(mx, t);
            }
        }
    }
    if (mx == -kInf) return -kInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - mx);
    return mx + std::log(s);
}

// ln of the integral over the real line of exp(f), f unimodal.
double oracle_integrate(const LogFn& f) {
    double best = -kInf, bx = 0.0;
    for (double x = -kScanHalfWidth; x <= kScanHalfWidth + 1e-12; x += kScanStep) {
        const double v = f(x);
        if (v > best) {
            best = v;
            bx = x;
        }
    }
    if (best == -kInf) throw NumericError("oracle integrand vanishes on the scan grid");
    double lo = bx - kScanStep, hi = bx + kScanStep;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(bx)); ++it) {
        if (fc > fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    const double m = 0.5 * (lo + hi);
    const double fm = std::max(f(m), best);

    double s = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double h = pass == 0 ? 1e-3 : std::max(0.1 * s, 1e-7);
        const double d2 = (f(m + h) - 2 * f(m) + f(m - h)) / (h * h);
        s = d2 < -1e-12 ? 1.0 / std::sqrt(-d2) : 1.0;
    }
    s = std::min(s, 1.0);

    auto edge = [&](double dir) {
        double dist = s;
        while (dist < kEdgeCap && !(f(m + dir * dist) < fm - kTailDrop)) dist *= 2.0;
        return m + dir * std::min(dist, kEdgeCap);
    };
    const double a = edge(-1.0), b = edge(1.0);
    const double core_lo = std::max(a, m - 30 * s), core_hi = std::min(b, m + 30 * s);
    std::vector<std::pair<double, double>> regions{{core_lo, core_hi}};
    if (core_lo > a) regions.emplace_back(a, core_lo);
    if (core_hi < b) regions.emplace_back(core_hi, b);

    auto total = [&](std::size_t panels) {
        double t = -kInf;
        for (auto [ra, rb] : regions) t = lse(t, panel_sum(f, ra, rb, panels));
        return t;
    };
    double prev = total(4);
    for (std::size_t panels = 8; panels <= kMaxPanels; panels *= 2) {
        const double cur = total(panels);
        if (std::abs(cur - prev) < kTolerance) return cur;
        prev = cur;
    }
    throw NumericError("oracle quadrature did not converge");
}

struct Pooled {
    double n = 0, members = 0, ss = 0;
};

Pooled pool(const std::vector<GroupStats>& gs) {
    Pooled p;
    for (const auto& g : gs) {
        validate(g);
        p.n += static_cast<double>(g.n);
        p.members += static_cast<double>(g.members);
        p.ss += g.ss;
    }
    if (!(p.n > p.members)) throw DomainError("need more observations than groups");
    if (!(p.ss > 0)) throw DomainError("total sum of squares is 0");
    return p;
}

double ln_mix(const std::vector<double>& log_rho, const std::vector<double>& ss) {
    double out = -kInf;
    for (std::size_t k = 0; k < ss.size(); ++k)
        if (ss[k] > 0) out = lse(out, log_rho[k] + std::log(ss[k]));
    return out;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double lbf(const GroupStats& g1, const GroupStats& g2, double a1, double a2) {
    return two_sample::log_bf10(g1, g2, PriorSpec{a1, a2}).log_bf10;
}

}  // namespace

double quad_ml_two(const GroupStats& g1, const GroupStats& g2, const PriorSpec& prior) {
    validate(prior);
    const Pooled p = pool({g1, g2});
    const double A = 0.5 * (p.n - p.members);
    const double e1 = 0.5 * static_cast<double>(g1.df()) + prior.alpha1;
    const double e2 = 0.5 * static_cast<double>(g2.df()) + prior.alpha2;
    const double c = -A * kLogPi + lgam(A) - lbeta(prior.alpha1, prior.alpha2);
    const std::vector<double> ss{g1.ss, g2.ss};
    return oracle_integrate([&](double x) {
        const std::vector<double> lr{ln_sig(x), ln_sig(-x)};
        return c + e1 * lr[0] + e2 * lr[1] - A * ln_mix(lr, ss);
    });
}

double quad_ml_k3(const std::vector<GroupStats>& stats, double alpha) {
    if (stats.size() != 3) throw DomainError("quad_ml_k3 needs exactly three groups");
    if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
    const Pooled p = pool(stats);
    const double A = 0.5 * (p.n - p.members);
    const double c = -A * kLogPi + lgam(A) + lgam(3 * alpha) - 3 * lgam(alpha);
    std::vector<double> ex(3), ss(3);
    for (std::size_t k = 0; k < 3; ++k) {
        ex[k] = 0.5 * static_cast<double>(stats[k].df()) + alpha - 1.0;
        ss[k] = stats[k].ss;
    }
    auto f = [&](double u, double v) {
        const double lu = ln_sig(u), lmu = ln_sig(-u), lv = ln_sig(v), lmv = ln_sig(-v);
        const std::vector<double> lr{lu, lmu + lv, lmu + lmv};
        const double log_j = lu + 2 * lmu + lv + lmv;
        return c + ex[0] * lr[0] + ex[1] * lr[1] + ex[2] * lr[2] - A * ln_mix(lr, ss) + log_j;
    };
    return oracle_integrate([&](double u) { return oracle_integrate([&](double v) { return f(u, v); }); });
}

void validate(const SimulationScenario& s) {
    if (s.taus.empty()) throw DomainError("scenario needs at least one group");
    if (s.taus.size() != s.ns.size()) throw DomainError("taus and ns must have the same length");
    for (double t : s.taus)
        if (!(t > 0) || !std::isfinite(t)) throw DomainError("precisions must be positive and finite");
    for (std::size_t n : s.ns)
        if (n == 0) throw DomainError("group sizes must be positive");
    if (s.replications == 0) throw DomainError("replications must be at least 1");
}

std::vector<std::vector<GroupStats>> simulate(const SimulationScenario& s) {
    validate(s);
    std::vector<std::vector<GroupStats>> out(s.replications);
    std::vector<double> xs;
    for (std::size_t r = 0; r < s.replications; ++r) {
        Engine eng(derive_seed(s.seed, r));
        for (std::size_t k = 0; k < s.taus.size(); ++k) {
            const double sd = 1.0 / std::sqrt(s.taus[k]);
            xs.resize(s.ns[k]);
            double mean = 0.0;
            for (auto& x : xs) {
                x = sd * standard_normal(eng);
                mean += x;
            }
            mean /= static_cast<double>(xs.size());
            double ss = 0.0;
            for (double x : xs) ss += (x - mean) * (x - mean);
            out[r].push_back(GroupStats{s.ns[k], s.ns[k] == 1 ? 0.0 : ss, 1});
        }
    }
    return out;
}

CheckResult check_predictive_matching() {
    CheckResult r{"predictive matching", true, ""};
    const std::vector<std::pair<GroupStats, GroupStats>> cases{
        {{1, 0.0}, {1, 0.0}}, {{1, 0.0}, {2, 0.7}}, {{2, 3.1}, {1, 0.0}}};
    for (const auto& [g1, g2] : cases) {
        for (auto [a1, a2] : {std::pair{0.5, 0.5}, {1.0, 1.0}, {4.5, 4.5}, {0.5, 3.0}}) {
            const double v = lbf(g1, g2, a1, a2);
            if (v != 0.0) {
                r.passed = false;
                r.detail += "sizes (" + std::to_string(g1.n) + "," + std::to_string(g2.n) + ") gave " + fmt(v) + "; ";
            }
        }
    }
    const double one = one_sample::log_bf10_one({1, 0.0, 2.0}, 0.5).log_bf10;
    if (one != 0.0) {
        r.passed = false;
        r.detail += "one-sample n=1 gave " + fmt(one) + "; ";
    }
    if (r.passed) r.detail = "log BF10 is exactly 0 for sizes (1,1), (1,2), (2,1) and one-sample n=1";
    return r;
}

CheckResult check_label_invariance() {
    CheckResult r{"label invariance", true, ""};
    double worst = 0.0;
    const std::vector<std::pair<GroupStats, GroupStats>> cases{
        {{5, 2.0}, {9, 11.0}}, {{30, 0.4}, {4, 7.0}}, {{300, 280.0}, {120, 40.0}}, {{2, 1e-6}, {7, 3.0}}};
    const DeltaInterval up{1.0, kInf}, down{0.0, 1.0};
    for (const auto& [g1, g2] : cases) {
        for (auto [a1, a2] : {std::pair{0.5, 0.5}, {2.0, 2.0}, {0.7, 3.0}}) {
            worst = std::max(worst, std::abs(lbf(g1, g2, a1, a2) - lbf(g2, g1, a2, a1)));
            if (a1 == a2) {
                const PriorSpec pr{a1, a2};
                const double d1 = two_sample::log_bf_directed(g1, g2, pr, PointNull{}, up).log_bf10;
                const double d2 = two_sample::log_bf_directed(g2, g1, pr, PointNull{}, down).log_bf10;
                worst = std::max(worst, std::abs(d1 - d2));
            }
        }
    }
    r.passed = worst <= 1e-10;
    r.detail = "max |log BF(1,2) - log BF(2,1)| = " + fmt(worst);
    return r;
}

CheckResult check_measurement_invariance() {
    CheckResult r{"measurement invariance", true, ""};
    double worst = 0.0;
    const GroupStats g1{12, 5.5}, g2{20, 31.0};
    const double base = lbf(g1, g2, 0.5, 0.5);
    const double base_one = one_sample::log_bf10_one({12, 5.5, 1.7}, 1.3).log_bf10;
    for (double c : {1e-3, 0.37, 12.5, 1e4}) {
        const double c2 = c * c;
        worst = std::max(worst, std::abs(lbf({12, 5.5 * c2}, {20, 31.0 * c2}, 0.5, 0.5) - base));
        worst = std::max(worst, std::abs(one_sample::log_bf10_one({12, 5.5 * c2, 1.7 / c2}, 1.3).log_bf10 - base_one));
    }
    r.passed = worst <= 1e-10;
    r.detail = "max change of log BF under rescaling = " + fmt(worst);
    return r;
}

CheckResult check_information_consistency() {
    CheckResult r{"information consistency", true, ""};
    double prev = kInf;
    for (int j = 0; j <= 8; ++j) {
        const double ratio = std::pow(10.0, -j);
        const double bf01 = std::exp(-lbf({2, ratio}, {2, 1.0}, 0.5, 0.5));
        if (!(bf01 < prev)) r.passed = false;
        r.detail += "ss1/ss2=1e-" + std::to_string(j) + ": BF01=" + fmt(bf01) + "; ";
        prev = bf01;
    }
    return r;
}

CheckResult check_limit_consistency() {
    const GroupStats g1{10, 9 * 1.69};
    const double a = lbf(g1, {1000000, 999999.0}, 0.5, 0.5);
    const double b = lbf(g1, {10000000, 9999999.0}, 0.5, 0.5);
    return {"limit consistency", std::abs(a - b) < 1e-2,
            "log BF10 at n2=1e6: " + fmt(a) + ", at n2=1e7: " + fmt(b) + ", difference " + fmt(std::abs(a - b))};
}

CheckResult check_two_to_one_consistency() {
    const GroupStats g1{10, 9 * 1.69};
    const double two = lbf(g1, {10000000, 9999999.0}, 0.5, 0.5);
    const double one = one_sample::log_bf10_one({10, 9 * 1.69, 1.0}, 0.5).log_bf10;
    return {"two-to-one sample consistency", std::abs(two - one) < 1e-2,
            "two-sample log BF10 at n2=1e7: " + fmt(two) + ", one-sample: " + fmt(one)};
}

std::vector<CheckResult> check_model_selection(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    const double delta = 1.5;
    for (int h = 0; h < 2; ++h) {
        const std::vector<double> taus{1.0, h == 0 ? 1.0 : 1.0 / (delta * delta)};
        std::vector<double> med;
        for (std::size_t n : {std::size_t{50}, std::size_t{400}}) {
            SimulationScenario sc{taus, {n, n}, opt.replications, derive_seed(opt.seed, 10 * h + n)};
            std::vector<double> v;
            for (const auto& gs : simulate(sc)) v.push_back(lbf(gs[0], gs[1], 0.5, 0.5));
            med.push_back(median(v));
        }
        CheckResult r;
        if (h == 0) {
            r.name = "model selection consistency (null true)";
            r.passed = med[1] < med[0] && med[0] < 0;
        } else {
            r.name = "model selection consistency (delta = 1.5)";
            r.passed = med[1] > med[0] && med[0] > 0;
        }
        r.detail = "median log BF10 at n=50: " + fmt(med[0]) + ", at n=400: " + fmt(med[1]) + " (" +
                   std::to_string(opt.replications) + " replications)";
        out.push_back(r);
    }
    return out;
}

namespace {

struct JeffreysGaps {
    std::vector<double> deltas{1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    std::vector<double> ns{20, 50, 100, 200, 500, 1000};
    std::vector<std::vector<double>> gap, log_bf;
};

JeffreysGaps jeffreys_gaps() {
    JeffreysGaps j;
    for (double delta : j.deltas) {
        std::vector<double> gap, lb;
        for (double n : j.ns) {
            const auto nn = static_cast<std::size_t>(n);
            const GroupStats g1{nn, n - 1}, g2{nn, (n - 1) * delta * delta};
            const double v = lbf(g1, g2, 1.0, 1.0);
            lb.push_back(v);
            gap.push_back(std::abs(v + std::log(two_sample::jeffreys_bf01_1939(g1, g2))));
        }
        j.gap.push_back(gap);
        j.log_bf.push_back(lb);
    }
    return j;
}

}  // namespace

CheckResult check_jeffreys_agreement() {
    CheckResult r{"Jeffreys 1939 agreement (alpha = 1)", true, ""};
    const JeffreysGaps j = jeffreys_gaps();
    for (std::size_t d = 0; d < j.deltas.size(); ++d) {
        const auto& gap = j.gap[d];
        if (!(gap.back() < gap.front())) r.passed = false;
        r.detail += "delta=" + fmt(j.deltas[d]) + ": |gap| " + fmt(gap.front()) + " -> " + fmt(gap.back()) + "; ";
    }
    return r;
}

CheckResult check_jeffreys_relative_agreement() {
    CheckResult r{"Jeffreys 1939 relative agreement (alpha = 1)", true, ""};
    const JeffreysGaps j = jeffreys_gaps();
    for (std::size_t d = 0; d < j.deltas.size(); ++d) {
        const double first = j.gap[d].front() / std::max(1.0, std::abs(j.log_bf[d].front()));
        const double last = j.gap[d].back() / std::max(1.0, std::abs(j.log_bf[d].back()));
        if (!(last < first)) r.passed = false;
        r.detail += "delta=" + fmt(j.deltas[d]) + ": " + fmt(first) + " -> " + fmt(last) + "; ";
    }
    return r;
}

CheckResult check_oracle_two(const SuiteOptions& opt) {
    Engine eng(derive_seed(opt.seed, 0x0c1eULL));
    double worst = 0.0;
    std::size_t done = 0;
    while (done < opt.oracle_cases) {
        const auto n1 = static_cast<std::size_t>(std::exp(uniform01(eng) * std::log(300.0)));
        const auto n2 = static_cast<std::size_t>(std::exp(uniform01(eng) * std::log(300.0)));
        if (n1 + n2 < 3) continue;
        const GroupStats g1{n1, n1 > 1 ? std::exp(6 * uniform01(eng) - 3) * static_cast<double>(n1) : 0.0};
        const GroupStats g2{n2, n2 > 1 ? std::exp(6 * uniform01(eng) - 3) * static_cast<double>(n2) : 0.0};
        const PriorSpec pr{std::exp(uniform01(eng) * std::log(100.0)) * 0.2,
                           std::exp(uniform01(eng) * std::log(100.0)) * 0.2};
        worst = std::max(worst, std::abs(quad_ml_two(g1, g2, pr) - two_sample::log_ml_h1(g1, g2, pr)));
        ++done;
    }
    return {"closed form vs quadrature (two groups)", worst <= 1e-8,
            std::to_string(done) + " random cases, max |difference| = " + fmt(worst)};
}

std::vector<CheckResult> desiderata_suite(const SuiteOptions& opt) {
    std::vector<CheckResult> out;
    auto guarded = [&](const std::string& name, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("error: ") + e.what()});
        }
    };
    guarded("predictive matching", [&] { out.push_back(check_predictive_matching()); });
    guarded("label invariance", [&] { out.push_back(check_label_invariance()); });
    guarded("measurement invariance", [&] { out.push_back(check_measurement_invariance()); });
    guarded("information consistency", [&] { out.push_back(check_information_consistency()); });
    guarded("limit consistency", [&] { out.push_back(check_limit_consistency()); });
    guarded("two-to-one sample consistency", [&] { out.push_back(check_two_to_one_consistency()); });
    guarded("model selection consistency", [&] {
        for (auto& c : check_model_selection(opt)) out.push_back(std::move(c));
    });
    guarded("Jeffreys 1939 agreement", [&] { out.push_back(check_jeffreys_agreement()); });
    guarded("Jeffreys 1939 relative agreement", [&] { out.push_back(check_jeffreys_relative_agreement()); });
    guarded("closed form vs quadrature", [&] { out.push_back(check_oracle_two(opt)); });
    return out;
}

}  // namespace bfvar::verify
