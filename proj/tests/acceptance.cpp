#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "bfvar/elicitation.hpp"
#include "bfvar/hypotheses.hpp"
#include "bfvar/kgroups.hpp"
#include "bfvar/one_sample.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/specfun.hpp"
#include "bfvar/two_sample.hpp"
#include "bfvar/verify.hpp"
#include "cli.hpp"

using namespace bfvar;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
    bool passed = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!detail.empty()) detail += "; ";
        detail += (ok ? "" : "[fail] ") + what;
    }
};

std::string f(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

void info(const std::string& text) { std::printf("INFO %s\n", text.c_str()); }

std::vector<GroupStats> from_sds(const std::vector<std::size_t>& ns, const std::vector<double>& sds) {
    std::vector<GroupStats> out;
    for (std::size_t i = 0; i < ns.size(); ++i) out.push_back(stats_from_sd(ns[i], sds[i], SdDivisor::n));
    return out;
}

const std::vector<std::size_t> kArchNs{117, 171, 55};

Outcome pcb() {
    Outcome o;
    const auto bf0m = [](double sd) {
        const one_sample::OneSampleProblem p{7, 7 * sd * sd, 1.0 / 0.10};
        return std::exp(-one_sample::log_bf_directed_one(p, 2.16, PointNull{}, {1.0, kInf}).log_bf10);
    };
    const double v = bf0m(0.22);
    o.check(std::abs(v - 1.04) <= 0.03, "BF0m at sd=0.22 = " + f(v) + " (target 1.04 +/- 0.03)");
    info("PCB with the unrounded sample sd 0.2225394561: BF0m = " + f(bf0m(0.2225394561)));
    return o;
}

const GroupStats kLaser = stats_from_sd(990, 0.89, SdDivisor::n);
const GroupStats kDigitizer = stats_from_sd(990, 0.98, SdDivisor::n);

Outcome laser_directed() {
    Outcome o;
    const double v = std::exp(
        two_sample::log_bf_directed(kLaser, kDigitizer, PriorSpec{0.5, 0.5}, PointNull{}, {1.0, kInf}).log_bf10);
    o.check(std::abs(v - 4.93) <= 0.05, "BF+0 = " + f(v) + " (target 4.93 +/- 0.05)");
    return o;
}

Outcome laser_interval() {
    Outcome o;
    const double v = std::exp(-two_sample::log_bf_directed(kLaser, kDigitizer, PriorSpec{0.5, 0.5},
                                                           DeltaInterval{0.9, 1.1}, {1.1, kInf})
                                   .log_bf10);
    o.check(std::abs(v - 7.03) <= 0.07, "BF01 = " + f(v) + " (target 7.03 +/- 0.07)");
    return o;
}

Outcome elicit_alpha() {
    Outcome o;
    const double a = elicitation::solve_alpha({{0.5, 2.0}, 0.95, std::nullopt});
    o.check(std::abs(a - 4.50) <= 0.05, "P(0.5<=delta<=2)=0.95 gives alpha = " + f(a) + " (target 4.50 +/- 0.05)");
    const double b = elicitation::solve_alpha({{2.0, kInf}, 0.5, DeltaInterval{1.0, kInf}});
    o.check(std::abs(b - 2.16) <= 0.05, "P(delta>=2 | delta>=1)=0.5 gives alpha = " + f(b) + " (target 2.16 +/- 0.05)");
    info("variance reading P(delta^2>=2 | delta>=1)=0.5 gives alpha = " +
         f(elicitation::solve_alpha({{std::sqrt(2.0), kInf}, 0.5, DeltaInterval{1.0, kInf}})));
    return o;
}

Outcome archeology() {
    Outcome o;
    kgroups::ChainConfig cfg;
    const auto h1 = parse_hypothesis("1>2>3", 3), h0 = parse_hypothesis("1=2=3", 3);
    const auto ap = kgroups::log_bf(h1, h0, from_sds(kArchNs, {5.83, 8.13, 12.74}), 0.5, cfg, 1);
    const double se_a = ap.mc_se.value_or(kInf);
    o.check(std::abs(ap.log_bf10 - 22.0) <= 0.5, "aperture log BF10 = " + f(ap.log_bf10) + " (target 22 +/- 0.5)");
    o.check(se_a < 0.05, "aperture mc_se = " + f(se_a, 3));
    const auto ht = kgroups::log_bf(h1, h0, from_sds(kArchNs, {9.6, 7.23, 7.81}), 0.5, cfg, 1);
    const double se_h = ht.mc_se.value_or(kInf);
    o.check(std::abs(std::exp(ht.log_bf10) - 1.14) <= 0.06,
            "height BF10 = " + f(std::exp(ht.log_bf10)) + " (target 1.14 +/- 0.06)");
    o.check(se_h < 0.05, "height mc_se = " + f(se_h, 3));
    return o;
}

Outcome math_garden() {
    Outcome o;
    kgroups::ChainConfig cfg;
    const auto stats = from_sds({3280, 6007, 7549, 9160, 9395, 6410}, {5.99, 5.39, 4.97, 4.62, 3.69, 3.08});
    // sds decrease along the list, so the precision order runs upward
    const auto hr = parse_hypothesis("1<2<3<4<5<6", 6);
    const auto ev = kgroups::evaluate({hr, null_spec(6), unconstrained_spec(6)}, stats, 0.5, cfg, 1);
    const auto r0 = kgroups::compare(ev[0], ev[1]);
    const auto r1 = kgroups::compare(ev[0], ev[2]);
    o.check(std::abs(r0.log_bf10 - 1666.6) <= 1.0,
            "log BF_r0 = " + f(r0.log_bf10, 7) + " (target 1666.6 +/- 1.0), mc_se " + f(r0.mc_se.value_or(0), 3));
    o.check(std::abs(r1.log_bf10 - 6.57) <= 0.5,
            "log BF_r1 = " + f(r1.log_bf10) + " (target 6.57 +/- 0.5), mc_se " + f(r1.mc_se.value_or(0), 3));
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    const auto r = verify::check_oracle_two(verify::SuiteOptions{});
    o.check(r.passed, r.detail);

    kgroups::ChainConfig cfg;
    const GroupStats a{23, 40.0}, b{31, 21.0};
    const auto k2 = kgroups::log_bf(unconstrained_spec(2), null_spec(2), {a, b}, 0.5, cfg, 1);
    const double exact = two_sample::log_bf10(a, b, PriorSpec{0.5, 0.5}).log_bf10;
    const double se = k2.mc_se.value_or(kInf);
    o.check(std::abs(k2.log_bf10 - exact) <= std::max(0.02, 3 * se),
            "K=2 bridge " + f(k2.log_bf10) + " vs closed form " + f(exact) + " (se " + f(se, 3) + ")");

    const auto stats = from_sds(kArchNs, {5.83, 8.13, 12.74});
    const auto draws = kgroups::sample_posterior(stats, 0.5, cfg, 1);
    const auto br = kgroups::bridge_log_ml(draws, stats, 0.5);
    const double q = verify::quad_ml_k3(stats, 0.5);
    o.check(std::abs(br.log_ml - q) <= 0.02, "K=3 bridge " + f(br.log_ml, 10) + " vs quadrature " + f(q, 10));
    return o;
}

Outcome desiderata() {
    Outcome o;
    for (const auto& r : verify::desiderata_suite()) {
        if (r.name.rfind("Jeffreys", 0) == 0) {
            info(r.name + (r.passed ? " passed: " : " failed: ") + r.detail);
            continue;
        }
        o.check(r.passed, r.name + ": " + r.detail);
    }
    return o;
}

Outcome posterior_integrity() {
    Outcome o;
    const GroupStats g1{12, 9.0}, g2{20, 41.0};
    const PriorSpec p{0.5, 0.5};
    auto integ = [](const std::function<double(double)>& pdf, double lo, double hi) {
        return std::exp(specfun::log_integrate(
            [&](double x) { return x > 0 && std::isfinite(x) ? std::log(pdf(x)) : -kInf; }, lo, hi));
    };
    const double nr = integ([&](double r) { return two_sample::posterior_rho_pdf(r, g1, g2, p); }, 0.0, 1.0);
    const double nd = integ([&](double d) { return two_sample::posterior_delta_pdf(d, g1, g2, p); }, 0.0, kInf);
    o.check(std::abs(nr - 1) <= 1e-6, "rho density integrates to " + f(nr, 12));
    o.check(std::abs(nd - 1) <= 1e-6, "delta density integrates to " + f(nd, 12));

    double worst = 0.0;
    for (double d = 0.05; d < 20; d *= 1.1) {
        const RhoPoint rp = rho_of_delta(d);
        const double lhs = two_sample::posterior_delta_pdf(d, g1, g2, p);
        const double rhs = two_sample::posterior_rho_pdf(rp.rho, g1, g2, p) * 2 * d / std::pow(1 + d * d, 2);
        if (rhs > 0) worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    o.check(worst <= 1e-10, "change of variables max relative gap " + f(worst, 3));

    kgroups::ChainConfig cfg;
    cfg.draws = 25000;
    const auto draws = kgroups::sample_posterior({g1, g2}, 0.5, cfg, 1);
    std::vector<double> r;
    for (const auto& d : draws.draws) r.push_back(d[0]);
    std::sort(r.begin(), r.end());
    // exact CDF on a fine grid spanning the sample, accumulated with 24-point Gauss-Legendre panels
    const double log_ml = two_sample::log_ml_h1(g1, g2, p);
    const auto& gl = specfun::cached_gauss_legendre(24);
    const std::size_t grid = 4000;
    const double lo = r.front() * 0.999, hi = std::min(1.0, r.back() * 1.001);
    double cdf = std::exp(specfun::log_integrate(
        [&](double x) { return two_sample::log_integrand_rho(x, g1, g2, p); }, 0.0, lo) - log_ml);
    double ks = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 1; i <= grid; ++i) {
        const double a = lo + (hi - lo) * (i - 1) / grid, b = lo + (hi - lo) * i / grid;
        double s = 0.0;
        for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[j];
            s += gl.weights[j] * std::exp(two_sample::log_integrand_rho(x, g1, g2, p) - log_ml);
        }
        const std::size_t before = idx;
        while (idx < r.size() && r[idx] <= b) ++idx;
        const double n = static_cast<double>(r.size());
        ks = std::max(ks, std::abs(before / n - cdf));
        cdf += 0.5 * (b - a) * s;
        ks = std::max(ks, std::abs(idx / n - cdf));
    }
    o.check(ks < 0.02, "K=2 MCMC vs exact rho posterior KS = " + f(ks, 3));
    return o;
}

Outcome determinism() {
    Outcome o;
    cli::AnalysisRequest k;
    k.kind = cli::Kind::k;
    k.stats = from_sds(kArchNs, {5.83, 8.13, 12.74});
    k.hypotheses = {"1>2>3", "1=2=3", "1,2,3"};
    k.labels = {"Paradijon", "Dalupa", "Dangtalan"};
    k.seed = 12345;
    const std::string a = cli::run(k).dump(2), b = cli::run(k).dump(2);
    o.check(a == b, "K-group report identical across runs (" + std::to_string(a.size()) + " bytes)");
    k.seed = 12346;
    o.check(cli::run(k).dump(2) != a, "a different seed changes the report");
    cli::AnalysisRequest t;
    t.stats = {kLaser, kDigitizer};
    t.labels = {"laser", "digitizer"};
    t.alt_interval = DeltaInterval{1.0, kInf};
    o.check(cli::run(t).dump(2) == cli::run(t).dump(2), "two-group report identical across runs");
    return o;
}

struct Criterion {
    const char* name;
    double seconds;
    std::function<Outcome()> fn;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all{
        {"PCB one-sample BF0m", 1, pcb},
        {"laser vs digitizer directed BF+0", 1, laser_directed},
        {"laser vs digitizer interval BF01", 1, laser_interval},
        {"elicitation of alpha", 1, elicit_alpha},
        {"archeology K=3", 60, archeology},
        {"Math Garden K=6", 300, math_garden},
        {"oracle equivalence", 600, oracle_equivalence},
        {"desiderata suite", 600, desiderata},
        {"posterior integrity", 120, posterior_integrity},
        {"determinism", 60, determinism},
    };
    std::vector<std::size_t> pick;
    for (int i = 1; i < argc; ++i) {
        const int c = std::atoi(argv[i]);
        if (c < 1 || c > static_cast<int>(all.size())) {
            std::fprintf(stderr, "usage: acceptance [criterion 1..%zu]...\n", all.size());
            return 2;
        }
        pick.push_back(static_cast<std::size_t>(c - 1));
    }
    if (pick.empty())
        for (std::size_t i = 0; i < all.size(); ++i) pick.push_back(i);

    bool ok = true;
    for (std::size_t i : pick) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = all[i].fn();
        } catch (const std::exception& e) {
            o.passed = false;
            o.detail = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.check(secs < all[i].seconds, "time " + f(secs, 3) + " s (limit " + f(all[i].seconds) + " s)");
        std::printf("%s %zu %s: %s\n", o.passed ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str());
        ok = ok && o.passed;
    }
    return ok ? 0 : 1;
}
