#include "bfvar/kgroups.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "bfvar/errors.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/specfun.hpp"

namespace bfvar::kgroups {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogPi = 1.144729885849400174143427351353058712;
constexpr double kLog2Pi = 1.837877066409345483560659472811235279;
constexpr double kTargetAcceptance = 0.35;
constexpr std::size_t kAdaptWindow = 50;
constexpr std::size_t kMinOrderHits = 50;
constexpr std::size_t kMaxBudgetMultiplier = 8;

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Totals {
    std::size_t n = 0, members = 0;
    double ss = 0.0;
};

Totals totals(const std::vector<GroupStats>& stats) {
    Totals t;
    for (const auto& g : stats) {
        validate(g);
        t.n += g.n;
        t.members += g.members;
        t.ss += g.ss;
    }
    if (t.n <= t.members) throw DomainError("need more observations than groups (total n >= K + 1)");
    if (!(t.ss > 0)) throw DomainError("total sum of squares is 0");
    return t;
}

void check_alpha(double alpha) {
    if (!(alpha > 0) || !std::isfinite(alpha)) throw DomainError("prior shape alpha must be a positive finite number");
}

// Posterior kernel over the simplex of one collapsed model.
struct Model {
    std::size_t k = 0;
    std::vector<double> expo;  // df/2 + alpha - 1
    std::vector<double> ss;
    double A = 0.0;
    double log_const = 0.0;

    double log_post_log_rho(const double* log_rho) const {
        double s = 0.0, mix = 0.0;
        for (std::size_t b = 0; b < k; ++b) {
            s += expo[b] * log_rho[b];
            mix += std::exp(log_rho[b]) * ss[b];
        }
        return log_const + s - A * std::log(mix);
    }

    // ln target in stick-breaking coordinates, Jacobian included
    double log_target(const double* y, double* log_rho) const {
        double log_rem = 0.0, log_j = 0.0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            const double off = y[i] - std::log(static_cast<double>(k - 1 - i));
            const double lz = specfun::log_sigmoid(off), l1z = specfun::log_sigmoid(-off);
            log_rho[i] = log_rem + lz;
            log_j += log_rem + lz + l1z;
            log_rem += l1z;
        }
        log_rho[k - 1] = log_rem;
        const double v = log_post_log_rho(log_rho) + log_j;
        return std::isnan(v) ? -kInf : v;
    }
};

Model make_model(const std::vector<GroupStats>& stats, double alpha) {
    check_alpha(alpha);
    if (stats.size() < 2) throw DomainError("need at least two groups");
    const Totals t = totals(stats);
    Model m;
    m.k = stats.size();
    for (const auto& g : stats) {
        m.expo.push_back(0.5 * static_cast<double>(g.df()) + alpha - 1.0);
        m.ss.push_back(g.ss);
    }
    m.A = 0.5 * static_cast<double>(t.n - t.members);
    const double kd = static_cast<double>(m.k);
    m.log_const = log_ml_constant(stats) + specfun::log_gamma(kd * alpha) - kd * specfun::log_gamma(alpha);
    return m;
}

double eval(const Model& m, const Vec& y) {
    std::vector<double> buf(m.k);
    return m.log_target(y.data(), buf.data());
}

Vec gradient(const Model& m, const Vec& y, double h) {
    Vec g(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        Vec a = y, b = y;
        a[i] += h;
        b[i] -= h;
        g[i] = (eval(m, a) - eval(m, b)) / (2 * h);
    }
    return g;
}

Mat hessian(const Model& m, const Vec& y, double h) {
    const Eigen::Index d = y.size();
    Mat H(d, d);
    const double f0 = eval(m, y);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            double v;
            if (i == j) {
                Vec a = y, b = y;
                a[i] += h;
                b[i] -= h;
                v = (eval(m, a) - 2 * f0 + eval(m, b)) / (h * h);
            } else {
                Vec pp = y, pm = y, mp = y, mm = y;
                pp[i] += h; pp[j] += h;
                pm[i] += h; pm[j] -= h;
                mp[i] -= h; mp[j] += h;
                mm[i] -= h; mm[j] -= h;
                v = (eval(m, pp) - eval(m, pm) - eval(m, mp) + eval(m, mm)) / (4 * h * h);
            }
            H(i, j) = H(j, i) = v;
        }
    }
    return H;
}

struct Laplace {
    Vec mode;
    Mat cov;
};

// Newton ascent from a moment-based start; covariance from the curvature at the mode.
Laplace laplace(const Model& m, const std::vector<GroupStats>& stats, double alpha) {
    const std::size_t d = m.k - 1;
    double tn = 0, tss = 0;
    for (const auto& g : stats) {
        tn += static_cast<double>(g.n);
        tss += g.ss;
    }
    std::vector<double> rho0(m.k), y0(d);
    double sum = 0;
    for (std::size_t b = 0; b < m.k; ++b) {
        rho0[b] = (static_cast<double>(stats[b].df()) + 2 * alpha) / (stats[b].ss + tss / tn);
        sum += rho0[b];
    }
    for (auto& r : rho0) r /= sum;
    from_simplex(rho0, y0);
    Vec y = Eigen::Map<Vec>(y0.data(), static_cast<Eigen::Index>(d));
    double f = eval(m, y);
    for (int it = 0; it < 200; ++it) {
        const Vec g = gradient(m, y, 1e-5);
        const Mat H = hessian(m, y, 1e-4);
        Eigen::LLT<Mat> llt(-H);
        Vec step = llt.info() == Eigen::Success ? Vec(llt.solve(g)) : Vec(g * (1.0 / (1.0 + g.norm())));
        double t = 1.0;
        Vec next = y + step;
        double fn = eval(m, next);
        while (!(fn >= f) && t > 1e-12) {
            t *= 0.5;
            next = y + t * step;
            fn = eval(m, next);
        }
        if (!(fn >= f)) break;
        const double moved = (t * step).cwiseAbs().maxCoeff();
        y = next;
        f = fn;
        if (moved < 1e-10) break;
    }
    Laplace out;
    out.mode = y;
    const Mat H = hessian(m, y, 1e-4);
    Eigen::LLT<Mat> llt(-H);
    if (llt.info() == Eigen::Success) {
        out.cov = llt.solve(Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
    } else {
        out.cov = Mat::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) * 0.01;
    }
    return out;
}

Mat safe_cholesky(const Mat& cov) {
    Mat c = cov;
    const Eigen::Index d = c.rows();
    double jitter = 0.0;
    for (int attempt = 0; attempt < 20; ++attempt) {
        Eigen::LLT<Mat> llt(c + jitter * Mat::Identity(d, d));
        if (llt.info() == Eigen::Success) return llt.matrixL();
        jitter = jitter == 0.0 ? 1e-12 * (1.0 + c.diagonal().cwiseAbs().maxCoeff()) : jitter * 10;
    }
    return Mat::Identity(d, d) * 0.1;
}

Mat empirical_cov(const std::vector<Vec>& xs) {
    const Eigen::Index d = xs.front().size();
    Vec mu = Vec::Zero(d);
    for (const auto& x : xs) mu += x;
    mu /= static_cast<double>(xs.size());
    Mat c = Mat::Zero(d, d);
    for (const auto& x : xs) c += (x - mu) * (x - mu).transpose();
    return c / static_cast<double>(xs.size() - 1);
}

struct ChainOutput {
    std::vector<std::vector<double>> rho, y;
    std::size_t accepted = 0, proposed = 0;
};

ChainOutput run_chain(const Model& m, const Laplace& lap, const ChainConfig& cfg, std::uint64_t chain_seed) {
    const Eigen::Index d = static_cast<Eigen::Index>(m.k - 1);
    Engine eng(chain_seed);
    Mat L = safe_cholesky(lap.cov);
    std::vector<double> log_rho(m.k);
    auto normals = [&]() {
        Vec z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = standard_normal(eng);
        return z;
    };
    Vec y = lap.mode + L * normals();
    double lp = m.log_target(y.data(), log_rho.data());
    if (!std::isfinite(lp)) {
        y = lap.mode;
        lp = m.log_target(y.data(), log_rho.data());
    }
    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
    std::size_t window_acc = 0, window_n = 0;
    std::vector<Vec> adapt;

    auto step = [&](bool& accepted) {
        const Vec prop = y + std::exp(log_scale) * (L * normals());
        const double lpp = m.log_target(prop.data(), log_rho.data());
        accepted = std::log(uniform01(eng)) < lpp - lp;
        if (accepted) {
            y = prop;
            lp = lpp;
        }
    };

    const std::size_t W = cfg.warmup;
    const std::size_t cut1 = W / 2, cut2 = (3 * W) / 4;
    for (std::size_t it = 0; it < W; ++it) {
        bool acc;
        step(acc);
        window_acc += acc;
        if (++window_n == kAdaptWindow) {
            const double rate = static_cast<double>(window_acc) / static_cast<double>(window_n);
            log_scale += 2.0 * (rate - kTargetAcceptance);
            window_acc = window_n = 0;
        }
        if ((it >= W / 4 && it < cut1) || (it >= cut1 && it < cut2)) adapt.push_back(y);
        if ((it + 1 == cut1 || it + 1 == cut2) && adapt.size() > static_cast<std::size_t>(2 * d + 10)) {
            L = safe_cholesky(empirical_cov(adapt));
            log_scale = std::log(2.38 / std::sqrt(static_cast<double>(d)));
            adapt.clear();
        }
    }

    ChainOutput out;
    const std::size_t thin = std::max<std::size_t>(cfg.thin, 1);
    std::vector<double> rho(m.k);
    for (std::size_t it = 0; it < cfg.draws * thin; ++it) {
        bool acc;
        step(acc);
        out.accepted += acc;
        ++out.proposed;
        if ((it + 1) % thin == 0) {
            to_simplex(std::span<const double>(y.data(), static_cast<std::size_t>(d)), rho);
            out.rho.push_back(rho);
            out.y.emplace_back(y.data(), y.data() + d);
        }
    }
    return out;
}

double log_mean_exp(const std::vector<double>& v) {
    double m = -kInf;
    for (double x : v) m = std::max(m, x);
    if (m == -kInf) return -kInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s / static_cast<double>(v.size()));
}

double median(std::vector<double> v) {
    const std::size_t h = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
    double m = v[h];
    if (v.size() % 2 == 0) m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
    return m;
}

double quantile_sorted(const std::vector<double>& s, double q) {
    const double pos = q * static_cast<double>(s.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= s.size()) return s.back();
    return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

}  // namespace

double log_ml_constant(const std::vector<GroupStats>& stats) {
    const Totals t = totals(stats);
    const double A = 0.5 * static_cast<double>(t.n - t.members);
    return -A * kLogPi + specfun::log_gamma(A);
}

double log_ml_h0_k(const std::vector<GroupStats>& stats) {
    if (stats.size() < 2) throw DomainError("need at least two groups");
    const Totals t = totals(stats);
    const double A = 0.5 * static_cast<double>(t.n - t.members);
    return log_ml_constant(stats) - A * std::log(t.ss);
}

double unnorm_log_post(std::span<const double> rho, const std::vector<GroupStats>& stats, double alpha) {
    const Model m = make_model(stats, alpha);
    if (rho.size() != m.k) throw DomainError("rho length does not match the number of groups");
    std::vector<double> log_rho(m.k);
    for (std::size_t b = 0; b < m.k; ++b) {
        if (!(rho[b] > 0)) return -kInf;
        log_rho[b] = std::log(rho[b]);
    }
    return m.log_post_log_rho(log_rho.data());
}

double to_simplex(std::span<const double> y, std::span<double> rho) {
    const std::size_t k = y.size() + 1;
    if (rho.size() != k) throw DomainError("simplex dimension mismatch");
    double log_rem = 0.0, log_j = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        const double off = y[i] - std::log(static_cast<double>(k - 1 - i));
        const double lz = specfun::log_sigmoid(off), l1z = specfun::log_sigmoid(-off);
        rho[i] = std::exp(log_rem + lz);
        log_j += log_rem + lz + l1z;
        log_rem += l1z;
    }
    rho[k - 1] = std::exp(log_rem);
    return log_j;
}

void from_simplex(std::span<const double> rho, std::span<double> y) {
    const std::size_t k = rho.size();
    if (y.size() + 1 != k) throw DomainError("simplex dimension mismatch");
    // tail sums avoid the cancellation in 1 - rho_1 - ... - rho_i
    double tail = rho[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
        y[i] = std::log(rho[i]) - std::log(tail) + std::log(static_cast<double>(k - 1 - i));
        tail += rho[i];
    }
}

double effective_sample_size(std::span<const double> series, std::size_t chains) {
    if (chains == 0 || series.size() % chains != 0) throw DomainError("series length must be a multiple of the chain count");
    const std::size_t n = series.size() / chains;
    if (n < 4) return static_cast<double>(series.size());
    std::vector<double> mean(chains, 0.0), var(chains, 0.0);
    double var_sum = 0.0;
    for (std::size_t c = 0; c < chains; ++c) {
        const double* x = series.data() + c * n;
        for (std::size_t i = 0; i < n; ++i) mean[c] += x[i];
        mean[c] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) var[c] += (x[i] - mean[c]) * (x[i] - mean[c]);
        var[c] /= static_cast<double>(n);
        var_sum += var[c];
    }
    if (!(var_sum > 0)) return static_cast<double>(series.size());
    auto autocorr = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t c = 0; c < chains; ++c) {
            const double* x = series.data() + c * n;
            double a = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) a += (x[i] - mean[c]) * (x[i + lag] - mean[c]);
            s += a / static_cast<double>(n);
        }
        return s / var_sum;
    };
    double tau = -1.0, prev_pair = kInf;
    for (std::size_t t = 0; t + 1 < n; t += 2) {
        double pair = autocorr(t) + autocorr(t + 1);
        if (pair <= 0) break;
        pair = std::min(pair, prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
    }
    tau = std::max(tau, 1.0 / std::log10(static_cast<double>(series.size()) + 10.0));
    return static_cast<double>(series.size()) / tau;
}

PosteriorDraws sample_posterior(const std::vector<GroupStats>& stats, double alpha, const ChainConfig& config,
                                std::uint64_t seed) {
    if (config.chains == 0 || config.draws < 4) throw DomainError("need at least one chain and four draws per chain");
    const Model m = make_model(stats, alpha);
    const Laplace lap = laplace(m, stats, alpha);

    std::vector<ChainOutput> outs(config.chains);
    auto work = [&](std::size_t c) { outs[c] = run_chain(m, lap, config, derive_seed(seed, c)); };
    if (config.parallel && config.chains > 1) {
        std::vector<std::thread> threads;
        for (std::size_t c = 0; c < config.chains; ++c) threads.emplace_back(work, c);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t c = 0; c < config.chains; ++c) work(c);
    }

    PosteriorDraws pd;
    pd.chains = config.chains;
    pd.per_chain = config.draws;
    pd.seed = seed;
    std::size_t acc = 0, prop = 0;
    for (auto& o : outs) {
        acc += o.accepted;
        prop += o.proposed;
        for (auto& r : o.rho) pd.draws.push_back(std::move(r));
        for (auto& y : o.y) pd.unconstrained.push_back(std::move(y));
    }
    pd.acceptance_rate = static_cast<double>(acc) / static_cast<double>(prop);
    pd.ess_min = kInf;
    std::vector<double> series(pd.draws.size());
    for (std::size_t b = 0; b < m.k; ++b) {
        for (std::size_t i = 0; i < pd.draws.size(); ++i) series[i] = pd.draws[i][b];
        pd.ess_min = std::min(pd.ess_min, effective_sample_size(series, pd.chains));
    }
    pd.flagged = pd.ess_min < config.ess_threshold;
    return pd;
}

BridgeResult bridge_log_ml(const PosteriorDraws& draws, const std::vector<GroupStats>& stats, double alpha,
                           std::size_t max_iterations) {
    const Model m = make_model(stats, alpha);
    const std::size_t d = m.k - 1;
    if (draws.unconstrained.empty() || draws.unconstrained.front().size() != d)
        throw DomainError("posterior draws do not match the number of groups");
    const std::size_t half = draws.per_chain / 2;
    if (half < d + 2) throw DomainError("too few draws per chain for bridge sampling");

    std::vector<Vec> fit, post;
    for (std::size_t c = 0; c < draws.chains; ++c) {
        for (std::size_t i = 0; i < draws.per_chain; ++i) {
            const auto& y = draws.unconstrained[c * draws.per_chain + i];
            Vec v = Eigen::Map<const Vec>(y.data(), static_cast<Eigen::Index>(d));
            (i < half ? fit : post).push_back(v);
        }
    }
    Vec mu = Vec::Zero(static_cast<Eigen::Index>(d));
    for (const auto& v : fit) mu += v;
    mu /= static_cast<double>(fit.size());
    const Mat L = safe_cholesky(empirical_cov(fit));
    double log_det = 0.0;
    for (std::size_t i = 0; i < d; ++i) log_det += 2.0 * std::log(L(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    auto log_g = [&](const Vec& y) {
        const Vec z = L.triangularView<Eigen::Lower>().solve(y - mu);
        return -0.5 * static_cast<double>(d) * kLog2Pi - 0.5 * log_det - 0.5 * z.squaredNorm();
    };

    std::vector<double> buf(m.k);
    const std::size_t n1 = post.size(), n2 = post.size();
    std::vector<double> l1(n1), l2(n2);
    for (std::size_t i = 0; i < n1; ++i) l1[i] = m.log_target(post[i].data(), buf.data()) - log_g(post[i]);
    Engine eng(derive_seed(draws.seed, 0xb81d6eULL));
    for (std::size_t j = 0; j < n2; ++j) {
        Vec z(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) z[static_cast<Eigen::Index>(i)] = standard_normal(eng);
        const Vec y = mu + L * z;
        l2[j] = m.log_target(y.data(), buf.data()) - log_g(y);
    }

    const double lstar = median(l1);
    const double s1 = static_cast<double>(n1) / static_cast<double>(n1 + n2);
    const double s2 = 1.0 - s1;
    const double ls1 = std::log(s1), ls2 = std::log(s2);
    double log_r = 0.0;
    std::vector<double> num(n2), den(n1);
    BridgeResult res;
    for (std::size_t it = 1;; ++it) {
        if (it > max_iterations)
            throw NumericError("bridge sampling did not converge within " + std::to_string(max_iterations) + " iterations");
        for (std::size_t j = 0; j < n2; ++j) {
            const double l = l2[j] - lstar;
            num[j] = l - specfun::log_add_exp(ls1 + l, ls2 + log_r);
        }
        for (std::size_t i = 0; i < n1; ++i) den[i] = -specfun::log_add_exp(ls1 + l1[i] - lstar, ls2 + log_r);
        const double next = log_mean_exp(num) - log_mean_exp(den);
        if (!std::isfinite(next)) throw NumericError("bridge sampling produced a non-finite estimate");
        const double change = std::abs(next - log_r);
        log_r = next;
        if (change < 1e-10) {
            res.iterations = it;
            break;
        }
    }
    res.log_ml = lstar + log_r;

    std::vector<double> f1(n2), f2(n1);
    for (std::size_t j = 0; j < n2; ++j) f1[j] = 1.0 / (s1 + s2 * std::exp(-(l2[j] - res.log_ml)));
    for (std::size_t i = 0; i < n1; ++i) f2[i] = 1.0 / (s1 * std::exp(l1[i] - res.log_ml) + s2);
    auto mean_var = [](const std::vector<double>& v) {
        double mu_ = 0.0, var = 0.0;
        for (double x : v) mu_ += x;
        mu_ /= static_cast<double>(v.size());
        for (double x : v) var += (x - mu_) * (x - mu_);
        return std::pair{mu_, var / static_cast<double>(v.size() - 1)};
    };
    const auto [m1, v1] = mean_var(f1);
    const auto [m2, v2] = mean_var(f2);
    const double ess2 = effective_sample_size(f2, draws.chains);
    const double re2 = v1 / (static_cast<double>(n2) * m1 * m1) + v2 / (ess2 * m2 * m2);
    res.se = std::sqrt(re2);
    return res;
}

std::vector<std::vector<double>> sample_prior(std::size_t k, double alpha, std::size_t n_draws, std::uint64_t seed) {
    if (k < 2) throw DomainError("need at least two groups");
    check_alpha(alpha);
    Engine eng(derive_seed(seed, 0x9d105ULL));
    std::vector<std::vector<double>> out(n_draws, std::vector<double>(k));
    std::vector<double> lg(k);
    for (auto& row : out) {
        double mx = -kInf;
        for (std::size_t i = 0; i < k; ++i) {
            lg[i] = log_gamma_variate(eng, alpha);
            mx = std::max(mx, lg[i]);
        }
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            row[i] = std::exp(lg[i] - mx);
            s += row[i];
        }
        for (auto& r : row) r /= s;
    }
    return out;
}

namespace {

struct PosteriorHits {
    std::size_t hits;
    double log_p;
    double se2;
};

PosteriorHits posterior_hits(const HypothesisSpec& spec, const PosteriorDraws& posterior) {
    if (posterior.draws.empty()) throw DomainError("no posterior draws");
    std::vector<double> ind(posterior.draws.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < posterior.draws.size(); ++i) {
        const bool ok = satisfies_order(posterior.draws[i], spec);
        ind[i] = ok ? 1.0 : 0.0;
        hits += ok;
    }
    if (hits == 0)
        throw NumericError("no posterior draw satisfies the order constraint; increase the number of draws");
    const double n = static_cast<double>(ind.size());
    const double p = static_cast<double>(hits) / n;
    const double ess = posterior.chains > 0 && ind.size() % posterior.chains == 0
                           ? effective_sample_size(ind, posterior.chains)
                           : n;
    return {hits, std::log(p), (1.0 - p) / (p * ess)};
}

}  // namespace

FractionResult encompassing_fraction(const HypothesisSpec& spec, const PosteriorDraws& posterior,
                                     const std::vector<std::vector<double>>& prior_draws) {
    FractionResult r;
    if (spec.order.empty()) return r;
    const PosteriorHits ph = posterior_hits(spec, posterior);
    std::size_t hits = 0;
    for (const auto& d : prior_draws) hits += satisfies_order(d, spec);
    if (hits == 0) throw NumericError("no prior draw satisfies the order constraint; use the exact prior fraction");
    const double q = static_cast<double>(hits) / static_cast<double>(prior_draws.size());
    r.posterior_hits = ph.hits;
    r.prior_hits = hits;
    r.log_bf_r1 = ph.log_p - std::log(q);
    r.se = std::sqrt(ph.se2 + (1.0 - q) / (q * static_cast<double>(prior_draws.size())));
    return r;
}

FractionResult encompassing_fraction(const HypothesisSpec& spec, const PosteriorDraws& posterior) {
    FractionResult r;
    if (spec.order.empty()) return r;
    const PosteriorHits ph = posterior_hits(spec, posterior);
    r.posterior_hits = ph.hits;
    r.log_bf_r1 = ph.log_p - log_prior_order_fraction(spec);
    r.se = std::sqrt(ph.se2);
    return r;
}

std::vector<Evidence> evaluate(const std::vector<HypothesisSpec>& specs, const std::vector<GroupStats>& stats,
                               double alpha, const ChainConfig& config, std::uint64_t seed) {
    check_alpha(alpha);
    if (stats.size() < 2) throw DomainError("need at least two groups");
    struct DrawSet {
        PosteriorDraws draws;
        BridgeResult bridge;
    };
    std::map<std::string, DrawSet> cache;
    std::vector<Evidence> out;
    for (const auto& spec : specs) {
        if (spec.k != stats.size()) throw DomainError("hypothesis group count does not match the data");
        const Collapsed col = collapse(stats, spec);
        Evidence ev;
        ev.hypothesis = to_string(spec);
        if (col.stats.size() == 1) {
            ev.log_ml = log_ml_h0_k(stats);
            ev.method = Method::closed_form;
            out.push_back(ev);
            continue;
        }
        ev.method = Method::bridge_encompassing;
        const std::string partition = partition_key(spec);
        const std::uint64_t part_seed = derive_seed(seed, hash_text(partition));
        for (std::size_t mult = 1;; mult *= 2) {
            const std::string key = partition + "#" + std::to_string(mult);
            auto it = cache.find(key);
            if (it == cache.end()) {
                ChainConfig cfg = config;
                cfg.draws = config.draws * mult;
                DrawSet ds;
                ds.draws = sample_posterior(col.stats, alpha, cfg, mult == 1 ? part_seed : derive_seed(part_seed, mult));
                ds.bridge = bridge_log_ml(ds.draws, col.stats, alpha, config.max_bridge_iterations);
                it = cache.emplace(key, std::move(ds)).first;
            }
            const DrawSet& ds = it->second;
            ev.draw_set = key;
            ev.bridge_se = ds.bridge.se;
            ev.ess_min = ds.draws.ess_min;
            ev.acceptance_rate = ds.draws.acceptance_rate;
            if (ds.draws.flagged) ev.flags.push_back("effective sample size below threshold");
            if (col.spec.order.empty()) {
                ev.log_ml = ds.bridge.log_ml;
                ev.se = ds.bridge.se;
                break;
            }
            std::size_t hits = 0;
            for (const auto& d : ds.draws.draws) hits += satisfies_order(d, col.spec);
            if (hits < kMinOrderHits && mult < kMaxBudgetMultiplier) {
                ev.flags.push_back("fewer than 50 posterior draws satisfy the order; doubling the draw budget");
                continue;
            }
            if (hits < kMinOrderHits) ev.flags.push_back("fewer than 50 posterior draws satisfy the order");
            FractionResult fr;
            if (col.spec.blocks.size() <= 24) {
                fr = encompassing_fraction(col.spec, ds.draws);
                ev.log_prior_fraction = log_prior_order_fraction(col.spec);
            } else {
                const auto prior = sample_prior(col.spec.k, alpha, config.prior_mc_draws, derive_seed(part_seed, 0x9e10ULL));
                fr = encompassing_fraction(col.spec, ds.draws, prior);
                ev.log_prior_fraction = std::log(static_cast<double>(fr.prior_hits) / static_cast<double>(prior.size()));
            }
            ev.log_posterior_fraction = fr.log_bf_r1 + ev.log_prior_fraction;
            ev.fraction_se = fr.se;
            ev.log_ml = ds.bridge.log_ml + fr.log_bf_r1;
            ev.se = std::sqrt(ds.bridge.se * ds.bridge.se + fr.se * fr.se);
            break;
        }
        out.push_back(ev);
    }
    return out;
}

BayesFactorResult compare(const Evidence& a, const Evidence& b) {
    BayesFactorResult r;
    r.log_bf10 = a.log_ml - b.log_ml;
    const bool closed = a.method == Method::closed_form && b.method == Method::closed_form;
    r.method = closed ? Method::closed_form : Method::bridge_encompassing;
    if (!closed) {
        double v;
        if (!a.draw_set.empty() && a.draw_set == b.draw_set)
            v = a.fraction_se * a.fraction_se + b.fraction_se * b.fraction_se;  // shared bridge estimate cancels
        else
            v = a.se * a.se + b.se * b.se;
        r.mc_se = std::sqrt(v);
    }
    for (const auto* e : {&a, &b})
        for (const auto& f : e->flags) r.flags.push_back(e->hypothesis + ": " + f);
    return r;
}

BayesFactorResult log_bf(const HypothesisSpec& numerator, const HypothesisSpec& denominator,
                         const std::vector<GroupStats>& stats, double alpha, const ChainConfig& config,
                         std::uint64_t seed) {
    const auto ev = evaluate({numerator, denominator}, stats, alpha, config, seed);
    return compare(ev[0], ev[1]);
}

std::vector<PairwiseDelta> pairwise_deltas(const PosteriorDraws& draws) {
    std::vector<PairwiseDelta> out;
    if (draws.draws.empty()) return out;
    const std::size_t k = draws.draws.front().size();
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            PairwiseDelta p{i, j, {}, 0, 0, 0, 0};
            p.values.reserve(draws.draws.size());
            std::size_t above = 0;
            double sum = 0.0;
            for (const auto& r : draws.draws) {
                const double v = std::sqrt(r[i] / r[j]);
                p.values.push_back(v);
                sum += v;
                above += v > 1.0;
            }
            std::vector<double> sorted = p.values;
            std::sort(sorted.begin(), sorted.end());
            p.mean = sum / static_cast<double>(sorted.size());
            p.lower = quantile_sorted(sorted, 0.025);
            p.upper = quantile_sorted(sorted, 0.975);
            p.prob_greater_one = static_cast<double>(above) / static_cast<double>(sorted.size());
            out.push_back(std::move(p));
        }
    }
    return out;
}

}  // namespace bfvar::kgroups
