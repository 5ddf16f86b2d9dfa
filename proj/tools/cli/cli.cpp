#include "cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "bfvar/errors.hpp"
#include "bfvar/hypotheses.hpp"
#include "bfvar/one_sample.hpp"
#include "bfvar/rng.hpp"
#include "bfvar/two_sample.hpp"
#include "bfvar/verify.hpp"

namespace bfvar::cli {

namespace {

using Json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDisplayCap = 700.0;
constexpr double kPlotDrop = 30.0;
constexpr std::size_t kDensityPoints = 1001;

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string kind_name(Kind k) {
    switch (k) {
        case Kind::one: return "one";
        case Kind::two: return "two";
        case Kind::k: return "k";
        case Kind::elicit: return "elicit";
    }
    return "unknown";
}

std::string num_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

Json bound(double v) { return std::isinf(v) ? Json("inf") : Json(v); }

Json interval_json(const DeltaInterval& d) { return Json::array({bound(d.lo), bound(d.hi)}); }

std::string interval_text(const DeltaInterval& d) {
    return "delta in [" + num_text(d.lo) + ", " + (std::isinf(d.hi) ? std::string("inf") : num_text(d.hi)) + "]";
}

Json bf_json(double log_bf) {
    Json j;
    j["log_bf"] = log_bf;
    if (std::abs(log_bf) <= kDisplayCap) {
        j["bf"] = std::exp(log_bf);
        j["bf_display"] = num_text(std::exp(log_bf));
    } else {
        j["bf"] = nullptr;
        j["bf_display"] = log_bf > 0 ? "> exp(700)" : "< exp(-700)";
    }
    return j;
}

Json result_json(const std::string& num, const std::string& den, const BayesFactorResult& r) {
    Json j;
    j["numerator"] = num;
    j["denominator"] = den;
    const Json bf = bf_json(r.log_bf10);
    for (const auto& [k, v] : bf.items()) j[k] = v;
    j["mc_se"] = r.mc_se ? Json(*r.mc_se) : Json(nullptr);
    j["method"] = to_string(r.method);
    j["flags"] = r.flags;
    return j;
}

template <class Summary>
Json summary_json(const Summary& s) {
    Json j;
    j["mean"] = std::isfinite(s.mean) ? Json(s.mean) : Json(nullptr);
    j["median"] = s.median;
    j["lower_95"] = s.lower;
    j["upper_95"] = s.upper;
    j["prob_greater_one"] = s.prob_greater_one;
    return j;
}

Json target_json(const elicitation::ElicitationTarget& t) {
    Json j;
    j["interval"] = interval_json(t.interval);
    j["prob"] = t.prob;
    j["truncation"] = t.truncation ? interval_json(*t.truncation) : Json(nullptr);
    return j;
}

Json groups_json(const AnalysisRequest& r) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < r.stats.size(); ++i) {
        Json g;
        g["label"] = r.labels[i];
        g["n"] = r.stats[i].n;
        g["ss"] = r.stats[i].ss;
        arr.push_back(g);
    }
    return arr;
}

std::string divisor_name(SdDivisor d) { return d == SdDivisor::n ? "n" : "n-1"; }

one_sample::OneSampleProblem one_problem(const AnalysisRequest& r) {
    return {r.stats[0].n, r.stats[0].ss, 1.0 / (r.sigma0 * r.sigma0)};
}

std::vector<HypothesisSpec> parsed_hypotheses(const AnalysisRequest& r) {
    std::vector<HypothesisSpec> out;
    for (const auto& h : r.hypotheses) {
        HypothesisSpec s = parse_hypothesis(h, r.stats.size());
        if (r.order_on == OrderOn::sd) {
            for (auto& [g, l] : s.order) std::swap(g, l);
            std::sort(s.order.begin(), s.order.end());
        }
        out.push_back(std::move(s));
    }
    return out;
}

Json run_one(const AnalysisRequest& r, double alpha) {
    const auto p = one_problem(r);
    Json res = Json::array();
    res.push_back(result_json("delta != 1", "delta = 1", one_sample::log_bf10_one(p, alpha)));
    if (r.alt_interval) {
        const DeltaRestriction null = r.null_interval ? DeltaRestriction{*r.null_interval} : DeltaRestriction{PointNull{}};
        res.push_back(result_json(interval_text(*r.alt_interval),
                                  r.null_interval ? interval_text(*r.null_interval) : "delta = 1",
                                  one_sample::log_bf_directed_one(p, alpha, null, *r.alt_interval)));
    }
    Json j;
    j["sigma0"] = r.sigma0;
    j["results"] = res;
    j["posterior"]["delta"] = summary_json(one_sample::posterior_delta_summary_one(p, alpha));
    return j;
}

Json run_two(const AnalysisRequest& r, double alpha) {
    const auto prior = PriorSpec::symmetric(alpha);
    const auto& g1 = r.stats[0];
    const auto& g2 = r.stats[1];
    Json res = Json::array();
    res.push_back(result_json("delta != 1", "delta = 1", two_sample::log_bf10(g1, g2, prior)));
    if (r.alt_interval) {
        const DeltaRestriction null = r.null_interval ? DeltaRestriction{*r.null_interval} : DeltaRestriction{PointNull{}};
        res.push_back(result_json(interval_text(*r.alt_interval),
                                  r.null_interval ? interval_text(*r.null_interval) : "delta = 1",
                                  two_sample::log_bf_directed(g1, g2, prior, null, *r.alt_interval)));
    }
    Json j;
    j["results"] = res;
    j["posterior"]["delta"] = summary_json(two_sample::posterior_delta_summary(g1, g2, prior));
    return j;
}

Json run_k(const AnalysisRequest& r, double alpha) {
    const auto specs = parsed_hypotheses(r);
    const auto ev = kgroups::evaluate(specs, r.stats, alpha, r.chains, r.seed);
    Json hyps = Json::array();
    for (std::size_t i = 0; i < ev.size(); ++i) {
        Json h;
        h["hypothesis"] = r.hypotheses[i];
        h["canonical"] = ev[i].hypothesis;
        h["log_ml"] = ev[i].log_ml;
        h["mc_se"] = ev[i].method == Method::closed_form ? Json(nullptr) : Json(ev[i].se);
        h["bridge_se"] = ev[i].bridge_se;
        h["fraction_se"] = ev[i].fraction_se;
        h["log_posterior_fraction"] = ev[i].log_posterior_fraction;
        h["log_prior_fraction"] = ev[i].log_prior_fraction;
        h["method"] = to_string(ev[i].method);
        h["ess_min"] = ev[i].method == Method::closed_form ? Json(nullptr) : Json(ev[i].ess_min);
        h["acceptance_rate"] = ev[i].method == Method::closed_form ? Json(nullptr) : Json(ev[i].acceptance_rate);
        h["flags"] = ev[i].flags;
        hyps.push_back(h);
    }
    Json cmp = Json::array();
    for (std::size_t i = 0; i < ev.size(); ++i)
        for (std::size_t j = i + 1; j < ev.size(); ++j)
            cmp.push_back(result_json(r.hypotheses[i], r.hypotheses[j], kgroups::compare(ev[i], ev[j])));

    const auto free = unconstrained_spec(r.stats.size());
    const auto draws = kgroups::sample_posterior(r.stats, alpha, r.chains,
                                                 derive_seed(r.seed, hash_text(partition_key(free))));
    Json pairs = Json::array();
    for (const auto& p : kgroups::pairwise_deltas(draws)) {
        Json pj;
        pj["i"] = r.labels[p.i];
        pj["j"] = r.labels[p.j];
        pj["mean"] = p.mean;
        pj["lower_95"] = p.lower;
        pj["upper_95"] = p.upper;
        pj["prob_greater_one"] = p.prob_greater_one;
        pairs.push_back(pj);
    }
    Json j;
    j["mcmc"] = {{"chains", r.chains.chains}, {"warmup", r.chains.warmup}, {"draws", r.chains.draws}};
    j["order_on"] = r.order_on == OrderOn::precision ? "precision" : "sd";
    j["hypotheses"] = hyps;
    j["results"] = cmp;
    j["posterior"]["pairwise_delta"] = pairs;
    j["posterior"]["ess_min"] = draws.ess_min;
    j["posterior"]["acceptance_rate"] = draws.acceptance_rate;
    return j;
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t row) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw DomainError("row " + std::to_string(row) + ": unterminated quoted field");
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

void write_table(const std::filesystem::path& file, const std::string& header,
                 const std::vector<std::vector<double>>& rows) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write " + file.string());
    out << header << '\n';
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.12g", row[i]);
            out << (i ? "\t" : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("failed writing " + file.string());
}

// Grid uniform in x = ln(delta) covering where ln(delta * pdf(delta)) is within kPlotDrop of its peak.
std::vector<std::vector<double>> density_table(const std::function<double(double)>& pdf) {
    auto lf = [&](double x) {
        const double d = std::exp(x);
        const double v = pdf(d) * d;
        return v > 0 && std::isfinite(v) ? std::log(v) : -kInf;
    };
    double best = -kInf, bx = 0.0;
    for (double x = -40.0; x <= 40.0; x += 0.05) {
        const double v = lf(x);
        if (v > best) {
            best = v;
            bx = x;
        }
    }
    if (best == -kInf) throw NumericError("density vanishes on the plotting range");
    auto side = [&](double dir) {
        double near = 0.0, far = 1e-4;
        while (far < 200.0 && lf(bx + dir * far) > best - kPlotDrop) {
            near = far;
            far *= 2;
        }
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (near + far);
            (lf(bx + dir * mid) > best - kPlotDrop ? near : far) = mid;
        }
        return bx + dir * far;
    };
    const double lo = side(-1.0), hi = side(1.0);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < kDensityPoints; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(kDensityPoints - 1);
        const double d = std::exp(x);
        rows.push_back({d, pdf(d)});
    }
    return rows;
}

std::vector<double> alpha_grid(std::size_t points) {
    std::vector<double> out;
    const double a = std::log(0.5), b = std::log(100.0);
    for (std::size_t i = 0; i < points; ++i) {
        const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(i == 0 ? 0.5 : (i + 1 == points ? 100.0 : std::exp(a + t * (b - a))));
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item == "inf" || item == "Inf" || item == "infinity") {
            out.push_back(kInf);
            continue;
        }
        std::size_t used = 0;
        double v;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            throw DomainError("'" + item + "' is not a number");
        }
        if (used != item.size()) throw DomainError("'" + item + "' is not a number");
        out.push_back(v);
    }
    return out;
}

std::vector<GroupStats> stats_from_inputs(const std::vector<std::size_t>& ns, const std::vector<double>& sds,
                                          const std::vector<double>& sss, SdDivisor div) {
    if (!sds.empty() && !sss.empty()) throw DomainError("give either standard deviations or sums of squares, not both");
    const auto& vals = sds.empty() ? sss : sds;
    if (ns.size() != vals.size())
        throw DomainError("got " + std::to_string(ns.size()) + " sample sizes but " + std::to_string(vals.size()) +
                          (sds.empty() ? " sums of squares" : " standard deviations"));
    std::vector<GroupStats> out;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (ns[i] < 1) throw DomainError("sample sizes must be at least 1");
        if (sds.empty()) {
            if (!std::isfinite(sss[i]) || sss[i] < 0) throw DomainError("sums of squares must be finite and >= 0");
            out.push_back(GroupStats{ns[i], ns[i] == 1 ? 0.0 : sss[i], 1});
        } else {
            out.push_back(stats_from_sd(ns[i], sds[i], div));
        }
    }
    return out;
}

}  // namespace

DeltaInterval parse_interval(const std::string& text) {
    const auto v = split_doubles(text);
    if (v.size() != 2) throw DomainError("interval '" + text + "' must have the form lo,hi");
    DeltaInterval d{v[0], v[1]};
    validate(d);
    return d;
}

CsvGroups ingest_csv(const std::string& path, const std::string& group_column, const std::string& value_column) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open CSV file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DomainError("CSV file " + path + " is empty");
    auto header = split_csv_line(line, 1);
    for (auto& h : header) h = trim(h);
    auto find_col = [&](const std::string& name) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw DomainError("CSV file has no column named '" + name + "'");
    };
    const std::size_t vcol = find_col(value_column);
    std::optional<std::size_t> gcol;
    if (!group_column.empty()) gcol = find_col(group_column);

    std::vector<std::string> labels;
    std::map<std::string, std::size_t> index;
    std::vector<std::vector<double>> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line, row);
        const std::size_t need = std::max(vcol, gcol.value_or(0)) + 1;
        if (fields.size() < need) throw DomainError("row " + std::to_string(row) + ": missing columns");
        const std::string label = gcol ? trim(fields[*gcol]) : std::string("all");
        const std::string raw = trim(fields[vcol]);
        double v;
        std::size_t used = 0;
        try {
            v = std::stod(raw, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (raw.empty() || used != raw.size() || !std::isfinite(v))
            throw DomainError("row " + std::to_string(row) + ": value '" + raw + "' is not a finite number");
        auto it = index.find(label);
        if (it == index.end()) {
            it = index.emplace(label, labels.size()).first;
            labels.push_back(label);
            values.emplace_back();
        }
        values[it->second].push_back(v);
    }
    if (labels.empty()) throw DomainError("CSV file " + path + " has no data rows");
    CsvGroups out;
    out.labels = labels;
    for (const auto& xs : values) {
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        out.stats.push_back(GroupStats{xs.size(), xs.size() == 1 ? 0.0 : ss, 1});
    }
    return out;
}

void validate(const AnalysisRequest& r) {
    if (r.kind == Kind::elicit) {
        if (!r.elicit) throw DomainError("elicit needs --interval and --prob");
        elicitation::validate(*r.elicit);
        return;
    }
    const std::size_t want = r.kind == Kind::one ? 1 : (r.kind == Kind::two ? 2 : 0);
    if (want && r.stats.size() != want)
        throw DomainError(kind_name(r.kind) + " needs exactly " + std::to_string(want) + " group(s), got " +
                          std::to_string(r.stats.size()));
    if (r.kind == Kind::k && r.stats.size() < 2) throw DomainError("k needs at least two groups");
    if (r.labels.size() != r.stats.size()) throw DomainError("group labels do not match the number of groups");
    for (const auto& g : r.stats) validate(g);
    if (r.alpha_target) elicitation::validate(*r.alpha_target);
    else if (!(r.alpha > 0) || !std::isfinite(r.alpha)) throw DomainError("alpha must be a positive finite number");
    if (r.kind == Kind::one && (!(r.sigma0 > 0) || !std::isfinite(r.sigma0)))
        throw DomainError("population sd must be positive and finite");
    if (r.null_interval && !r.alt_interval) throw DomainError("--null-interval needs --alt-interval");
    if (r.null_interval) validate(*r.null_interval);
    if (r.alt_interval) validate(*r.alt_interval);
    if (r.kind == Kind::k) {
        if (r.hypotheses.empty()) throw DomainError("k needs at least one hypothesis (--hyp)");
        parsed_hypotheses(r);
        if (r.chains.chains == 0 || r.chains.draws < 100) throw DomainError("need at least one chain and 100 draws");
    }
    if (r.plot_grid < 2) throw DomainError("plot grid needs at least two points");
}

double effective_alpha(const AnalysisRequest& r) {
    return r.alpha_target ? elicitation::solve_alpha(*r.alpha_target) : r.alpha;
}

Json run(const AnalysisRequest& r) {
    validate(r);
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["kind"] = kind_name(r.kind);
    if (r.kind == Kind::elicit) {
        const double a = elicitation::solve_alpha(*r.elicit);
        j["target"] = target_json(*r.elicit);
        j["alpha"] = a;
        j["achieved_prob"] = elicitation::delta_interval_prob(r.elicit->interval, a, r.elicit->truncation);
        return j;
    }
    const double alpha = effective_alpha(r);
    j["groups"] = groups_json(r);
    j["sd_divisor"] = divisor_name(r.divisor);
    j["alpha"] = alpha;
    j["alpha_source"] = r.alpha_target ? Json(target_json(*r.alpha_target)) : Json("given");
    j["seed"] = r.seed;
    Json body = r.kind == Kind::one ? run_one(r, alpha) : r.kind == Kind::two ? run_two(r, alpha) : run_k(r, alpha);
    for (auto& [k, v] : body.items()) j[k] = v;
    return j;
}

std::vector<std::string> emit_plot_data(const AnalysisRequest& r, const std::string& dir) {
    validate(r);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
    const std::filesystem::path base(dir);
    std::vector<std::string> files;
    auto put = [&](const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
        write_table(base / name, header, rows);
        files.push_back(name);
    };
    if (r.kind == Kind::elicit) {
        const double a = elicitation::solve_alpha(*r.elicit);
        put("prior_delta.tsv", "delta\tdensity",
            density_table([&](double d) { return two_sample::prior_delta_pdf(d, PriorSpec::symmetric(a)); }));
        return files;
    }
    const double alpha = effective_alpha(r);
    if (r.kind == Kind::one || r.kind == Kind::two) {
        const auto prior = PriorSpec::symmetric(alpha);
        put("prior_delta.tsv", "delta\tdensity",
            density_table([&](double d) { return two_sample::prior_delta_pdf(d, prior); }));
        std::vector<std::vector<double>> sens;
        if (r.kind == Kind::one) {
            const auto p = one_problem(r);
            put("posterior_delta.tsv", "delta\tdensity",
                density_table([&](double d) { return one_sample::posterior_delta_pdf_one(d, p, alpha); }));
            for (double a : alpha_grid(r.plot_grid)) {
                std::vector<double> row{a, one_sample::log_bf10_one(p, a).log_bf10};
                if (r.alt_interval) {
                    const DeltaRestriction null = r.null_interval ? DeltaRestriction{*r.null_interval} : DeltaRestriction{PointNull{}};
                    row.push_back(one_sample::log_bf_directed_one(p, a, null, *r.alt_interval).log_bf10);
                }
                sens.push_back(row);
            }
        } else {
            const auto& g1 = r.stats[0];
            const auto& g2 = r.stats[1];
            put("posterior_delta.tsv", "delta\tdensity",
                density_table([&](double d) { return two_sample::posterior_delta_pdf(d, g1, g2, prior); }));
            for (double a : alpha_grid(r.plot_grid)) {
                const auto pa = PriorSpec::symmetric(a);
                std::vector<double> row{a, two_sample::log_bf10(g1, g2, pa).log_bf10};
                if (r.alt_interval) {
                    const DeltaRestriction null = r.null_interval ? DeltaRestriction{*r.null_interval} : DeltaRestriction{PointNull{}};
                    row.push_back(two_sample::log_bf_directed(g1, g2, pa, null, *r.alt_interval).log_bf10);
                }
                sens.push_back(row);
            }
        }
        put("alpha_sensitivity.tsv", r.alt_interval ? "alpha\tlog_bf10\tlog_bf_directed" : "alpha\tlog_bf10", sens);
        return files;
    }
    const auto free = unconstrained_spec(r.stats.size());
    const auto draws = kgroups::sample_posterior(r.stats, alpha, r.chains, derive_seed(r.seed, hash_text(partition_key(free))));
    for (const auto& p : kgroups::pairwise_deltas(draws)) {
        std::vector<double> s = p.values;
        std::sort(s.begin(), s.end());
        const double lo = s[s.size() / 1000], hi = s[s.size() - 1 - s.size() / 1000];
        const std::size_t bins = 60;
        const double w = (hi - lo) / static_cast<double>(bins);
        std::vector<std::vector<double>> rows;
        if (w > 0) {
            std::vector<double> count(bins, 0.0);
            for (double v : s)
                if (v >= lo && v <= hi) count[std::min(bins - 1, static_cast<std::size_t>((v - lo) / w))] += 1;
            for (std::size_t b = 0; b < bins; ++b)
                rows.push_back({lo + (static_cast<double>(b) + 0.5) * w, count[b] / (static_cast<double>(s.size()) * w)});
        }
        put("pairwise_delta_" + std::to_string(p.i + 1) + "_" + std::to_string(p.j + 1) + ".tsv", "delta\tdensity", rows);
    }
    return files;
}

int main_entry(int argc, char** argv) {
    CLI::App app{"Default Bayes factors for variances from summary statistics"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "bfvar 0.1.0");

    std::string output, emit_plots, csv, group_col, value_col, divisor = "n", order_on = "precision";
    std::string alpha_interval, alpha_truncate, null_iv, alt_iv, interval, truncate;
    std::optional<double> alpha_prob;
    double alpha = 0.5;
    std::size_t plot_grid = 50;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> labels, hyps;
    std::size_t n1 = 0, n2 = 0, n = 0;
    std::optional<double> sd, ss, sd1, sd2, ss1, ss2, popsd, popvar;
    std::vector<std::size_t> ns;
    std::vector<double> sds, sss;
    double prob = 0.0;
    kgroups::ChainConfig chains;
    bool sequential = false;

    auto common = [&](CLI::App* sub, bool data) {
        sub->add_option("--output,-o", output, "Write the report to this file instead of stdout");
        if (!data) return;
        sub->add_option("--alpha", alpha, "Prior shape alpha")->check(CLI::PositiveNumber);
        sub->add_option("--alpha-interval", alpha_interval, "Elicit alpha: interval lo,hi for delta");
        sub->add_option("--alpha-prob", alpha_prob, "Elicit alpha: probability of the interval");
        sub->add_option("--alpha-truncate", alpha_truncate, "Elicit alpha: condition on delta in lo,hi");
        sub->add_option("--csv", csv, "Raw data CSV file");
        sub->add_option("--group-col", group_col, "CSV column holding group labels");
        sub->add_option("--value-col", value_col, "CSV column holding values");
        sub->add_option("--labels", labels, "Group labels for summary input")->delimiter(',');
        sub->add_option("--sd-divisor", divisor, "Divisor used for the given sds")->check(CLI::IsMember({"n", "n-1"}));
        sub->add_option("--emit-plots", emit_plots, "Directory for plot tables");
        sub->add_option("--plot-grid", plot_grid, "Points in the alpha sensitivity grid");
        sub->add_option("--seed", seed, "RNG seed (default: $BFVAR_SEED or 1)");
    };

    auto* one = app.add_subcommand("one", "One group against a known population sd");
    common(one, true);
    one->add_option("--n", n, "Sample size");
    one->add_option("--sd", sd, "Sample standard deviation");
    one->add_option("--ss", ss, "Sum of squared deviations");
    one->add_option("--popsd", popsd, "Population standard deviation under the null");
    one->add_option("--popvar", popvar, "Population variance under the null");
    one->add_option("--null-interval", null_iv, "Interval null lo,hi for delta");
    one->add_option("--alt-interval", alt_iv, "Alternative interval lo,hi for delta");

    auto* two = app.add_subcommand("two", "Two groups");
    common(two, true);
    two->add_option("--n1", n1, "Size of group 1");
    two->add_option("--sd1", sd1, "Sd of group 1");
    two->add_option("--ss1", ss1, "Sum of squares of group 1");
    two->add_option("--n2", n2, "Size of group 2");
    two->add_option("--sd2", sd2, "Sd of group 2");
    two->add_option("--ss2", ss2, "Sum of squares of group 2");
    two->add_option("--null-interval", null_iv, "Interval null lo,hi for delta = sd2/sd1");
    two->add_option("--alt-interval", alt_iv, "Alternative interval lo,hi for delta = sd2/sd1");

    auto* k = app.add_subcommand("k", "K groups with equality and order hypotheses");
    common(k, true);
    k->add_option("--ns", ns, "Group sizes")->delimiter(',');
    k->add_option("--sds", sds, "Group sds")->delimiter(',');
    k->add_option("--sss", sss, "Group sums of squares")->delimiter(',');
    k->add_option("--hyp", hyps, "Hypotheses, e.g. '1=2=3' '1>2>3'");
    k->add_option("--order-on", order_on, "Quantity compared by '>'")->check(CLI::IsMember({"precision", "sd"}));
    k->add_option("--chains", chains.chains, "MCMC chains");
    k->add_option("--warmup", chains.warmup, "Warmup iterations per chain");
    k->add_option("--draws", chains.draws, "Kept draws per chain");
    k->add_flag("--sequential", sequential, "Run chains on one thread");

    auto* el = app.add_subcommand("elicit", "Solve alpha from a probability statement about delta");
    common(el, false);
    el->add_option("--interval", interval, "Interval lo,hi for delta")->required();
    el->add_option("--prob", prob, "Probability of the interval")->required();
    el->add_option("--truncate", truncate, "Condition on delta in lo,hi");
    el->add_option("--emit-plots", emit_plots, "Directory for plot tables");

    auto* ver = app.add_subcommand("verify", "");
    ver->group("");
    std::size_t reps = 200;
    ver->add_option("--replications", reps);
    ver->add_option("--output,-o", output);

    auto emit = [&](const Json& j) {
        const std::string text = j.dump(2) + "\n";
        if (output.empty()) {
            std::cout << text;
            std::cout.flush();
            return;
        }
        std::ofstream out(output);
        if (!out || !(out << text)) throw IoError("cannot write " + output);
    };
    auto fail = [&](const std::string& type, const std::string& msg, int code) {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["error"] = {{"type", type}, {"message", msg}};
        std::cout << j.dump(2) << "\n";
        return code;
    };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("validation", e.what(), 2);
    }

    try {
        if (ver->parsed()) {
            verify::SuiteOptions opt;
            opt.replications = reps;
            Json j;
            j["schema_version"] = kSchemaVersion;
            j["kind"] = "verify";
            Json checks = Json::array();
            bool all = true;
            for (const auto& c : verify::desiderata_suite(opt)) {
                checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
                all = all && c.passed;
            }
            j["checks"] = checks;
            j["passed"] = all;
            emit(j);
            return all ? 0 : 1;
        }

        AnalysisRequest r;
        r.divisor = divisor == "n" ? SdDivisor::n : SdDivisor::n_minus_1;
        r.order_on = order_on == "sd" ? OrderOn::sd : OrderOn::precision;
        r.alpha = alpha;
        r.plot_grid = plot_grid;
        if (seed) {
            r.seed = *seed;
        } else if (const char* env = std::getenv("BFVAR_SEED"); env && *env) {
            try {
                std::size_t used = 0;
                r.seed = std::stoull(env, &used);
                if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw DomainError(std::string("BFVAR_SEED='") + env + "' is not an unsigned integer");
            }
        }
        if (!alpha_interval.empty() || alpha_prob) {
            if (alpha_interval.empty() || !alpha_prob) throw DomainError("--alpha-interval and --alpha-prob go together");
            elicitation::ElicitationTarget t{parse_interval(alpha_interval), *alpha_prob, std::nullopt};
            if (!alpha_truncate.empty()) t.truncation = parse_interval(alpha_truncate);
            r.alpha_target = t;
        }
        if (!null_iv.empty()) r.null_interval = parse_interval(null_iv);
        if (!alt_iv.empty()) r.alt_interval = parse_interval(alt_iv);

        auto load_csv = [&] {
            if (value_col.empty()) throw DomainError("--csv needs --value-col");
            auto g = ingest_csv(csv, group_col, value_col);
            r.stats = g.stats;
            r.labels = g.labels;
        };
        auto check_single_source = [&](bool summary_given) {
            if (!csv.empty() && summary_given) throw DomainError("give either --csv or summary statistics, not both");
            if (csv.empty() && !summary_given) throw DomainError("no data given: use summary statistics or --csv");
        };

        if (one->parsed()) {
            r.kind = Kind::one;
            check_single_source(n > 0 || sd || ss);
            if (!csv.empty()) {
                load_csv();
            } else {
                if (n == 0) throw DomainError("--n is required");
                if (sd.has_value() == ss.has_value()) throw DomainError("give exactly one of --sd and --ss");
                r.stats = stats_from_inputs({n}, sd ? std::vector{*sd} : std::vector<double>{},
                                            ss ? std::vector{*ss} : std::vector<double>{}, r.divisor);
            }
            if (popsd.has_value() == popvar.has_value()) throw DomainError("give exactly one of --popsd and --popvar");
            if (popvar && !(*popvar > 0)) throw DomainError("population variance must be positive");
            r.sigma0 = popsd ? *popsd : std::sqrt(*popvar);
        } else if (two->parsed()) {
            r.kind = Kind::two;
            check_single_source(n1 > 0 || n2 > 0 || sd1 || sd2 || ss1 || ss2);
            if (!csv.empty()) {
                load_csv();
            } else {
                if (n1 == 0 || n2 == 0) throw DomainError("--n1 and --n2 are required");
                if (sd1.has_value() == ss1.has_value() || sd2.has_value() == ss2.has_value() ||
                    sd1.has_value() != sd2.has_value())
                    throw DomainError("give --sd1/--sd2 or --ss1/--ss2");
                r.stats = sd1 ? stats_from_inputs({n1, n2}, {*sd1, *sd2}, {}, r.divisor)
                              : stats_from_inputs({n1, n2}, {}, {*ss1, *ss2}, r.divisor);
            }
        } else if (k->parsed()) {
            r.kind = Kind::k;
            check_single_source(!ns.empty() || !sds.empty() || !sss.empty());
            if (!csv.empty()) load_csv();
            else r.stats = stats_from_inputs(ns, sds, sss, r.divisor);
            r.hypotheses = hyps;
            r.chains = chains;
            r.chains.parallel = !sequential;
        } else {
            r.kind = Kind::elicit;
            elicitation::ElicitationTarget t{parse_interval(interval), prob, std::nullopt};
            if (!truncate.empty()) t.truncation = parse_interval(truncate);
            r.elicit = t;
        }
        if (r.labels.empty() && r.kind != Kind::elicit) {
            if (!labels.empty()) {
                if (labels.size() != r.stats.size()) throw DomainError("--labels count does not match the number of groups");
                r.labels = labels;
            } else {
                for (std::size_t i = 0; i < r.stats.size(); ++i) r.labels.push_back(std::to_string(i + 1));
            }
        }

        Json report = run(r);
        if (!emit_plots.empty()) report["plot_files"] = emit_plot_data(r, emit_plots);
        emit(report);
        return 0;
    } catch (const DomainError& e) {
        return fail("validation", e.what(), 2);
    } catch (const IoError& e) {
        return fail("io", e.what(), 2);
    } catch (const NumericError& e) {
        return fail("numeric", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("numeric", e.what(), 3);
    }
}

}  // namespace bfvar::cli
