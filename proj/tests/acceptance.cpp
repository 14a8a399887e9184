// Acceptance checks 1-9. Usage: acceptance [N ...]; no arguments runs all.
// Exit status is nonzero when any selected check fails; a skipped check
// (missing mortgage data) does not fail the run.

#include "support.hpp"

#include "sorted_effects/classify.hpp"
#include "sorted_effects/cli/run.hpp"
#include "sorted_effects/cli/synth.hpp"
#include "sorted_effects/cli/table_io.hpp"
#include "sorted_effects/confset.hpp"
#include "sorted_effects/error.hpp"
#include "sorted_effects/models.hpp"
#include "sorted_effects/normal.hpp"
#include "sorted_effects/quantile.hpp"
#include "sorted_effects/spe.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>

using namespace sorted_effects;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double ape_target = 0.051, ape_tol = 0.005;
constexpr double ape_se_target = 0.019, ape_se_rel = 0.30;
constexpr double spe02_target = 0.011, spe02_tol = 0.004;
constexpr double ca_most_target = 0.45, ca_least_target = 0.09, ca_tol = 0.03;
constexpr double diff_target = 0.36, diff_tol = 0.04, diff_p_max = 0.01;
constexpr double table6[] = {0.16, 0.34, 0.37, 0.39, 0.42, 1.16};
constexpr double table6_tol = 0.02;
constexpr double mortgage_seconds = 120.0;
constexpr int quantile_instances = 1000;
constexpr double ols_tol = 1e-8;
constexpr double score_tol = 1e-6;
constexpr double gradient_tol = 1e-5;
constexpr double determinism_seconds = 10.0;
constexpr double band_seconds = 30.0;
constexpr double normal_cv = 1.6449;
constexpr double coverage_min = 0.85;
// 200 replications leave an MC sd near 2.3 points; the gate uses 1000 and
// the first 200 are reported alongside.
constexpr int coverage_reps = 1000;
constexpr int coverage_reps_reported = 200;
constexpr double coverage_seconds = 600.0;
constexpr int confset_runs = 50;

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::pass;
    std::string detail;
};

// Collects failed sub-checks; the first few are reported.
class Tally {
public:
    void check(bool ok, const std::string& what) {
        ++checks_;
        if (!ok) {
            ++failed_;
            if (failures_.size() < 5) failures_.push_back(what);
        }
    }
    Outcome outcome(const std::string& summary) const {
        if (failed_ == 0) return {Status::pass, summary + " (" + std::to_string(checks_) + " checks)"};
        std::string d = std::to_string(failed_) + "/" + std::to_string(checks_) + " failed:";
        for (const auto& f : failures_) d += " [" + f + "]";
        return {Status::fail, d};
    }

private:
    std::size_t checks_ = 0, failed_ = 0;
    std::vector<std::string> failures_;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool nondecreasing(const Eigen::VectorXd& v) {
    for (Eigen::Index k = 1; k < v.size(); ++k)
        if (v(k) < v(k - 1)) return false;
    return true;
}

bool subset(const RowMask& a, const RowMask& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

json read_json(const fs::path& p) { return json::parse(cli::read_file(p.string())); }

// ---- 1 ----

std::string mortgage_path() {
    if (const char* env = std::getenv("SORTED_EFFECTS_MORTGAGE_CSV"); env && *env) return env;
#ifdef SORTED_EFFECTS_MORTGAGE_CSV
    return SORTED_EFFECTS_MORTGAGE_CSV;
#else
    return {};
#endif
}

cli::RunConfig mortgage_config(cli::Command command, const std::string& data, const fs::path& out) {
    cli::RunConfig c;
    c.command = command;
    c.data = data;
    c.fm = "deny ~ black + p_irat + hse_inc + ccred + mcred + pubrec + ltv_med + ltv_high + denpmi + selfemp + "
           "single + hischl";
    c.method = "logit";
    c.var = "black";
    c.b = 500;
    c.alpha = 0.1;
    c.bc = true;
    c.out_dir = out.string();
    return c;
}

Outcome mortgage_tables() {
    const std::string path = mortgage_path();
    if (path.empty() || !fs::exists(path)) return {Status::skip, "mortgage extract not found at '" + path + "'"};
    const auto t0 = std::chrono::steady_clock::now();
    const auto dir = testing_support::scratch_dir("acceptance_mortgage");
    std::ostringstream log;
    Tally tally;

    auto spe = mortgage_config(cli::Command::spe, path, dir / "spe");
    spe.us = "2:98/100";
    cli::run(spe, log);
    const json s = read_json(dir / "spe" / "spe.json");
    const double ape = s["ape"]["estimate"], ape_se = s["ape"]["se"], spe02 = s["spe"]["estimate"][0];
    tally.check(std::abs(ape - ape_target) <= ape_tol, "APE " + fmt(ape));
    tally.check(std::abs(ape_se - ape_se_target) <= ape_se_rel * ape_se_target, "APE se " + fmt(ape_se));
    tally.check(std::abs(spe02 - spe02_target) <= spe02_tol, "SPE(0.02) " + fmt(spe02));

    const std::vector<std::string> t{"deny",    "p_irat",  "black",  "hse_inc", "ccred",   "mcred",   "pubrec",
                                     "denpmi", "selfemp", "single", "hischl",  "ltv_med", "ltv_high"};
    auto ca = mortgage_config(cli::Command::ca, path, dir / "ca_both");
    ca.t = t;
    cli::run(ca, log);
    const json both = read_json(dir / "ca_both" / "ca.json");
    const double most = both["most"][0], least = both["least"][0];
    tally.check(std::abs(most - ca_most_target) <= ca_tol, "CA deny most " + fmt(most));
    tally.check(std::abs(least - ca_least_target) <= ca_tol, "CA deny least " + fmt(least));

    ca.cl = "diff";
    ca.out_dir = (dir / "ca_diff").string();
    cli::run(ca, log);
    const json diff = read_json(dir / "ca_diff" / "ca.json");
    const double d = diff["diff"][0], p = diff["p_joint"][0];
    tally.check(std::abs(d - diff_target) <= diff_tol, "CA deny diff " + fmt(d));
    tally.check(p < diff_p_max, "CA deny joint p " + fmt(p));

    auto sub = mortgage_config(cli::Command::subpop, path, dir / "subpop");
    sub.vars = {"p_irat", "hse_inc"};
    cli::run(sub, log);
    const auto stats = cli::parse_csv(cli::read_file((dir / "subpop" / "subpop_stats.csv").string()));
    bool found = false;
    for (const auto& row : stats.rows) {
        if (*row[0] != "most" || *row[1] != "p_irat") continue;
        found = true;
        for (int k = 0; k < 6; ++k) {
            const double v = std::stod(*row[static_cast<std::size_t>(2 + k)]);
            tally.check(std::abs(v - table6[k]) <= table6_tol, "p_irat stat " + std::to_string(k) + " " + fmt(v));
        }
    }
    tally.check(found, "p_irat row present");
    const double secs = seconds_since(t0);
    tally.check(secs <= mortgage_seconds, "runtime " + fmt(secs) + "s");
    return tally.outcome("APE " + fmt(ape) + " se " + fmt(ape_se) + ", SPE(.02) " + fmt(spe02) + ", CA " + fmt(most) +
                         "/" + fmt(least) + ", diff " + fmt(d) + " p " + fmt(p) + ", " + fmt(secs) + "s");
}

// ---- 2 ----

double scan_quantile(const std::vector<double>& v, const std::vector<double>& w, double u) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    double total = 0;
    for (double x : w) total += x;
    double cum = 0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        cum += w[idx[k]];
        const bool last_of_value = k + 1 == idx.size() || v[idx[k + 1]] != v[idx[k]];
        if (last_of_value && cum / total >= u) return v[idx[k]];
    }
    return v[idx.back()];
}

Outcome quantile_oracle() {
    Philox4x32 g(20240601, 2);
    Tally tally;
    for (int rep = 0; rep < quantile_instances; ++rep) {
        const std::size_t n = 1 + g.below(50);
        std::vector<double> v(n), w(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = static_cast<double>(g.below(1 + n / 2));  // ties on purpose
            // Dyadic weights keep the scan's partial sums exact.
            w[i] = g.below(5) == 0 ? 0.0 : static_cast<double>(1 + g.below(512)) / 128.0;
        }
        w[g.below(n)] += 1.0;
        const double u = g.below(10) == 0 ? static_cast<double>(g.below(11)) / 10.0 : g.uniform();
        tally.check(weighted_quantile(v, w, u) == scan_quantile(v, w, u), "instance " + std::to_string(rep));
    }
    return tally.outcome(std::to_string(quantile_instances) + " instances");
}

// ---- 3 ----

Outcome solver_oracles() {
    Philox4x32 g(77, 3);
    Tally tally;
    double worst_ols = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index n = 20 + static_cast<Eigen::Index>(g.below(80)), p = 2 + static_cast<Eigen::Index>(g.below(4));
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            for (Eigen::Index j = 1; j < p; ++j) X(i, j) = g.normal();
            y(i) = g.normal() * 3.0;
            w(i) = 0.2 + g.uniform();
        }
        DesignMatrix D = testing_support::intercept_design(n);
        D.values = X;
        const auto fit = fit_ols(D, y, w);
        const Eigen::MatrixXd XtWX = X.transpose() * w.asDiagonal() * X;
        const Eigen::VectorXd beta = XtWX.ldlt().solve(X.transpose() * w.asDiagonal() * y);
        const double err = (fit.coefficients.col(0) - beta).cwiseAbs().maxCoeff();
        worst_ols = std::max(worst_ols, err);
        tally.check(err <= ols_tol, "ols instance " + std::to_string(rep) + " err " + fmt(err));
    }
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index n = 2 * static_cast<Eigen::Index>(g.below(60)) + 1;
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y(i) = g.below(3) == 0 ? std::round(g.normal() * 4) : g.normal();
        const auto fit = fit_qr(testing_support::intercept_design(n), y, testing_support::ones(n), {0.5});
        std::vector<double> v(y.data(), y.data() + n);
        std::nth_element(v.begin(), v.begin() + n / 2, v.end());
        tally.check(fit.coefficients(0, 0) == v[static_cast<std::size_t>(n / 2)], "median n=" + std::to_string(n));
    }
    double worst_score = 0;
    int converged = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const Link link = rep % 2 ? Link::probit : Link::logit;
        const Eigen::Index n = 50 + static_cast<Eigen::Index>(g.below(500)), p = 2 + static_cast<Eigen::Index>(g.below(4));
        Eigen::MatrixXd X(n, p);
        Eigen::VectorXd y(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            X(i, 0) = 1.0;
            double eta = -0.3;
            for (Eigen::Index j = 1; j < p; ++j) {
                X(i, j) = g.normal();
                eta += 0.5 * X(i, j) / static_cast<double>(j);
            }
            y(i) = g.uniform() < normal_cdf(eta) ? 1.0 : 0.0;
            w(i) = rep % 3 ? 1.0 : g.exponential();
        }
        DesignMatrix D = testing_support::intercept_design(n);
        D.values = X;
        try {
            const auto fit = fit_binary_mle(D, y, w, link);
            if (!fit.diagnostics[0].converged) continue;
            ++converged;
            const Eigen::VectorXd eta = X * fit.coefficients.col(0);
            Eigen::VectorXd s(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (link == Link::logit) {
                    s(i) = y(i) - logistic(eta(i));
                } else {
                    const double pr = normal_cdf(eta(i)), q = normal_survival(eta(i));
                    s(i) = normal_pdf(eta(i)) * (y(i) - pr) / (pr * q);
                }
            }
            // Score of the mean-one normalized weights, as the fit uses.
            const double score = (X.transpose() * w.cwiseProduct(s) / w.mean()).cwiseAbs().maxCoeff();
            worst_score = std::max(worst_score, score);
            tally.check(score <= score_tol, "binary instance " + std::to_string(rep) + " score " + fmt(score));
        } catch (const Error&) {
        }
    }
    tally.check(converged >= 90, "converged fits " + std::to_string(converged));
    return tally.outcome("ols max err " + fmt(worst_ols) + ", " + std::to_string(converged) +
                         " binary fits, max score " + fmt(worst_score));
}

// ---- 4 ----

Outcome gradient_check() {
    Philox4x32 g(4, 4);
    const std::size_t n = 200;
    std::vector<double> y(n), yb(n), t(n), x(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = g.normal();
        x[i] = g.normal();
        y[i] = 1 + 0.8 * t[i] - 0.3 * t[i] * t[i] + 0.5 * x[i] + g.normal();
        yb[i] = g.uniform() < logistic(-0.5 + 0.9 * t[i] + 0.4 * x[i]) ? 1.0 : 0.0;
    }
    Dataset d;
    d.add_numeric("y", y);
    d.add_numeric("yb", yb);
    d.add_numeric("t", t);
    d.add_numeric("x", x);
    Tally tally;

    const auto sq = expand_terms(parse_formula("y ~ t + I(t^2) + x"));
    const auto Xs = build_design(sq, d, false);
    const auto ols = fit_ols(Xs, response_vector(sq, d), testing_support::ones(200));
    const auto e1 = pe_continuous(ols, d, "t");
    double worst1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double analytic = ols.coefficients(1, 0) + 2 * ols.coefficients(2, 0) * t[i];
        worst1 = std::max(worst1, std::abs(e1.delta(static_cast<Eigen::Index>(i)) - analytic));
    }
    tally.check(worst1 <= gradient_tol, "ols-square max err " + fmt(worst1));

    const auto lg = expand_terms(parse_formula("yb ~ t + x"));
    const auto Xl = build_design(lg, d, false);
    const auto logit = fit_binary_mle(Xl, response_vector(lg, d), testing_support::ones(200), Link::logit);
    const auto e2 = pe_continuous(logit, d, "t");
    double worst2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = logistic(Xl.values.row(static_cast<Eigen::Index>(i)).dot(logit.coefficients.col(0)));
        const double analytic = p * (1 - p) * logit.coefficients(1, 0);
        worst2 = std::max(worst2, std::abs(e2.delta(static_cast<Eigen::Index>(i)) - analytic));
    }
    tally.check(worst2 <= gradient_tol, "logit max err " + fmt(worst2));
    return tally.outcome("max errors " + fmt(worst1) + " (ols-square), " + fmt(worst2) + " (logit)");
}

// ---- 5 ----

std::map<std::string, std::string> result_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name == "meta.json") continue;
        out[name] = cli::read_file(entry.path().string());
    }
    return out;
}

Outcome determinism() {
    const auto dir = testing_support::scratch_dir("acceptance_determinism");
    const auto lh = (dir / "lh.csv").string(), qr = (dir / "qr.csv").string();
    std::ostringstream log;
    cli::RunConfig synth_cfg;
    synth_cfg.command = cli::Command::synth;
    synth_cfg.dgp = "logit-het";
    synth_cfg.n = 1000;
    synth_cfg.seed = 5;
    Tally tally;
    synth_cfg.output = lh;
    cli::run(synth_cfg, log);
    const std::string first = cli::read_file(lh);
    synth_cfg.output = (dir / "lh2.csv").string();
    cli::run(synth_cfg, log);
    tally.check(first == cli::read_file(synth_cfg.output), "synth bytes");
    synth_cfg.dgp = "qr-shift";
    synth_cfg.n = 400;
    synth_cfg.output = qr;
    cli::run(synth_cfg, log);

    struct Case {
        std::string name;
        cli::RunConfig config;
    };
    std::vector<Case> cases;
    auto base = [&](cli::Command c, const std::string& data, const std::string& fm, const std::string& method,
                    const std::string& var) {
        cli::RunConfig r;
        r.command = c;
        r.data = data;
        r.fm = fm;
        r.method = method;
        r.var = var;
        r.b = 100;
        r.seed = 11;
        r.parallel = true;
        return r;
    };
    cases.push_back({"spe-logit", base(cli::Command::spe, lh, "y ~ d * x", "logit", "d")});
    auto spe_qr = base(cli::Command::spe, qr, "y ~ t + x", "qr", "t");
    spe_qr.taus = "1:9/10";
    cases.push_back({"spe-qr", spe_qr});
    auto weighted = base(cli::Command::spe, lh, "y ~ d * x", "logit", "x");
    weighted.var_type = "continuous";
    weighted.boot_type = "weighted";
    cases.push_back({"spe-weighted", weighted});
    auto ca = base(cli::Command::ca, lh, "y ~ d * x", "logit", "d");
    ca.t = {"y", "x"};
    cases.push_back({"ca-moment", ca});
    ca.interest = "dist";
    ca.t = {"x"};
    cases.push_back({"ca-dist", ca});
    auto sub = base(cli::Command::subpop, lh, "y ~ d * x", "logit", "d");
    sub.varx = "x";
    sub.vary = "y";
    cases.push_back({"subpop", sub});

    double slowest = 0;
    for (auto& c : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        c.config.ncores = 1;
        c.config.out_dir = (dir / (c.name + "_1")).string();
        cli::run(c.config, log);
        c.config.ncores = 4;
        c.config.out_dir = (dir / (c.name + "_4")).string();
        cli::run(c.config, log);
        const double secs = seconds_since(t0);
        slowest = std::max(slowest, secs);
        const auto a = result_files(dir / (c.name + "_1")), b = result_files(dir / (c.name + "_4"));
        tally.check(!a.empty() && a == b, c.name + " files differ between 1 and 4 threads");
        tally.check(secs <= determinism_seconds, c.name + " took " + fmt(secs) + "s");
    }
    return tally.outcome(std::to_string(cases.size()) + " commands, slowest pair " + fmt(slowest) + "s");
}

// ---- 6 ----

Outcome band_properties() {
    const auto t0 = std::chrono::steady_clock::now();
    const Dataset data = cli::synth("logit-het", 2000, 6);
    EffectConfig config;
    config.var = "d";
    const EffectPipeline p(data, expand_terms(parse_formula("y ~ d * x")), ModelSpec{Method::logit, {}}, config);
    BootstrapPlan plan;
    plan.replicates = 500;
    plan.seed = 6;
    Tally tally;
    std::string summary;
    for (const auto& us : {default_us(), std::vector<double>{0.02, 0.1, 0.25, 0.5, 0.75, 0.9, 0.98}}) {
        const auto res = spe_inference(p, us, plan, 0.1, true);
        const bool wide = res.uniform_cv >= normal_cv;
        if (wide) {
            for (Eigen::Index k = 0; k < res.estimate.size(); ++k) {
                tally.check(res.uniform_lower(k) <= res.pointwise_lower(k) &&
                                res.uniform_upper(k) >= res.pointwise_upper(k),
                            "containment at u=" + fmt(us[static_cast<std::size_t>(k)]));
            }
        }
        tally.check(nondecreasing(res.uniform_lower) && nondecreasing(res.uniform_upper), "uniform endpoints");
        tally.check(nondecreasing(res.pointwise_lower) && nondecreasing(res.pointwise_upper), "pointwise endpoints");
        tally.check(nondecreasing(res.estimate), "spe curve");
        summary += "cv " + fmt(res.uniform_cv) + (wide ? "" : " (below normal, containment vacuous)") + "; ";
    }
    const double secs = seconds_since(t0);
    tally.check(secs <= band_seconds, "runtime " + fmt(secs) + "s");
    return tally.outcome(summary + fmt(secs) + "s");
}

// ---- 7 ----

Outcome coverage() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto terms = expand_terms(parse_formula("y ~ t + x1"));
    EffectConfig config;
    config.var = "t";
    BootstrapPlan plan;
    plan.replicates = 200;
    const int reps = coverage_reps;
    int covered = 0;
    int covered_first = 0;
    for (int r = 0; r < reps; ++r) {
        const Dataset data = cli::synth("linear", 200, 1000 + static_cast<std::uint64_t>(r));
        const EffectPipeline p(data, terms, ModelSpec{Method::ols, {}}, config);
        plan.seed = 5000 + static_cast<std::uint64_t>(r);
        const auto res = spe_inference(p, default_us(), plan, 0.1, true);
        bool inside = true;
        for (Eigen::Index k = 0; k < res.estimate.size(); ++k) {
            inside = inside && res.uniform_lower(k) <= 0.5 && 0.5 <= res.uniform_upper(k);
        }
        covered += inside;
        if (r < coverage_reps_reported) covered_first += inside;
    }
    const double rate = static_cast<double>(covered) / reps;
    const double rate_first = static_cast<double>(covered_first) / coverage_reps_reported;
    const double secs = seconds_since(t0);
    Tally tally;
    tally.check(rate >= coverage_min, "coverage " + fmt(rate));
    tally.check(secs <= coverage_seconds, "runtime " + fmt(secs) + "s");
    return tally.outcome("coverage " + fmt(rate) + " over " + std::to_string(reps) + " replications (" + fmt(rate_first) +
                         " over the first " + std::to_string(coverage_reps_reported) + "), " + fmt(secs) + "s");
}

// ---- 8 ----

void ca_identities_on(const cli::RunConfig& base, const std::string& tag, Tally& tally) {
    std::ostringstream log;
    cli::RunConfig both = base, diff = base;
    both.cl = "both";
    diff.cl = "diff";
    both.out_dir += "_both";
    diff.out_dir += "_diff";
    cli::run(both, log);
    cli::run(diff, log);
    const json jb = read_json(fs::path(both.out_dir) / "ca.json"), jd = read_json(fs::path(diff.out_dir) / "ca.json");
    const std::size_t m = jd["diff"].size();
    for (std::size_t k = 0; k < m; ++k) {
        const std::string name = jd["variables"][k];
        const double d = jd["diff"][k], most = jb["most"][k], least = jb["least"][k];
        tally.check(d == most - least, tag + " " + name + " diff != most - least");
        if (jd["p_joint"][k].is_null()) continue;
        const double pj = jd["p_joint"][k], pp = jd["p_pointwise"][k];
        tally.check(pj >= pp, tag + " " + name + " joint < pointwise");
        if (!jd["p_cat"][k].is_null()) {
            const double pc = jd["p_cat"][k];
            tally.check(pj >= pc && pc >= pp, tag + " " + name + " cat p out of order");
        }
    }
}

Outcome ca_identities() {
    const auto dir = testing_support::scratch_dir("acceptance_ca");
    Dataset data = cli::synth("logit-het", 1500, 8);
    Philox4x32 g(8, 8);
    std::vector<std::string> region(data.rows());
    const char* names[] = {"north", "south", "east", "west"};
    for (auto& r : region) r = names[g.below(4)];
    data.add_factor("region", region);
    data.add_numeric("const", std::vector<double>(data.rows(), 2.0));
    const auto csv = (dir / "syn.csv").string();
    cli::write_file(csv, cli::dataset_csv(data));

    Tally tally;
    cli::RunConfig c;
    c.command = cli::Command::ca;
    c.data = csv;
    c.factors = {"region"};
    c.fm = "y ~ d * x + region";
    c.method = "logit";
    c.var = "d";
    c.b = 200;
    c.t = {"y", "x", "region", "const", "d"};
    c.cat = {"region"};
    c.out_dir = (dir / "syn").string();
    ca_identities_on(c, "synthetic", tally);

    // Constant in the whole sample, and d constant inside the treated subgroup.
    c.subgroup = "d == 1";
    c.out_dir = (dir / "syn_treated").string();
    ca_identities_on(c, "treated", tally);
    const json jt = read_json(dir / "syn_treated_diff" / "ca.json");
    for (std::size_t k = 0; k < jt["variables"].size(); ++k) {
        const std::string name = jt["variables"][k];
        if (name != "const" && name != "d") continue;
        tally.check(jt["diff"][k] == 0.0, name + " diff not zero");
        tally.check(jt["p_joint"][k].is_null(), name + " p should be omitted");
    }

    std::string extra;
    const std::string path = mortgage_path();
    if (!path.empty() && fs::exists(path)) {
        auto mc = mortgage_config(cli::Command::ca, path, dir / "mortgage");
        mc.b = 200;
        mc.t = {"deny", "p_irat", "black", "hse_inc", "ccred", "mcred", "pubrec",
                "denpmi", "selfemp", "single", "hischl", "ltv_med", "ltv_high"};
        mc.cat = {"ccred", "mcred"};
        ca_identities_on(mc, "mortgage", tally);
        extra = " and mortgage";
    }
    return tally.outcome("synthetic" + extra + " runs");
}

// ---- 9 ----

Outcome confset_containment() {
    Tally tally;
    EffectConfig config;
    config.var = "d";
    const auto terms = expand_terms(parse_formula("y ~ d * x"));
    int nonneg = 0;
    for (int r = 0; r < confset_runs; ++r) {
        const Dataset data = cli::synth("logit-het", 300 + 10 * static_cast<std::size_t>(r), 900 + static_cast<std::uint64_t>(r));
        const EffectPipeline p(data, terms, ModelSpec{Method::logit, {}}, config);
        BootstrapPlan plan;
        plan.replicates = 100;
        plan.seed = 77 + static_cast<std::uint64_t>(r);
        const double alpha = r % 2 ? 0.1 : 0.05;
        const double u = r % 3 == 0 ? 0.2 : 0.1;
        const auto res = subpop_inference(p, u, plan, alpha);
        if (res.c_least >= 0) {
            ++nonneg;
            tally.check(subset(res.sets.least, res.cs_least), "least not inside cs_least, run " + std::to_string(r));
        }
        if (res.c_most >= 0) {
            ++nonneg;
            tally.check(subset(res.sets.most, res.cs_most), "most not inside cs_most, run " + std::to_string(r));
        }
        tally.check(subset(res.sets.least, res.subgroup) && subset(res.sets.most, res.subgroup), "sets in subgroup");
    }

    // Hand trace: delta = 0.1..0.6, u = 0.2, three replicates perturbing unit i
    // by a_i * (-1, 0, 2) with fixed quantiles 0.2 and 0.5. See the unit test
    // for the arithmetic; expected cs_least = {1,2,3,5}, cs_most = {5,6}.
    const auto e = testing_support::effects_of({0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
    const double a[] = {0.1, 0.05, 0.1, 0.05, 0.2, 0.1};
    const double pr[] = {-1, 0, 2};
    Eigen::MatrixXd draws(3, 8);
    for (Eigen::Index r = 0; r < 3; ++r) {
        for (Eigen::Index i = 0; i < 6; ++i) draws(r, i) = e.delta(i) + a[i] * pr[r];
        draws(r, 6) = 0.2;
        draws(r, 7) = 0.5;
    }
    const auto toy = confidence_sets(e, draws, 0.2, 0.1);
    const double D = normal_quantile(0.75) - normal_quantile(0.25);
    tally.check(toy.sets.least == RowMask{true, true, false, false, false, false}, "toy least");
    tally.check(toy.sets.most == RowMask{false, false, false, false, true, true}, "toy most");
    tally.check(toy.cs_least == RowMask{true, true, true, false, true, false}, "toy cs_least");
    tally.check(toy.cs_most == RowMask{false, false, false, false, true, true}, "toy cs_most");
    tally.check(std::abs(toy.c_least - 2 * D / 3) < 1e-12 && std::abs(toy.c_most - D / 3) < 1e-12, "toy critical values");
    return tally.outcome(std::to_string(confset_runs) + " runs (" + std::to_string(nonneg) +
                         " sides with c >= 0) plus toy trace");
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"mortgage table reproduction", mortgage_tables},
        {"weighted quantile oracle", quantile_oracle},
        {"solver oracles", solver_oracles},
        {"continuous-effect gradients", gradient_check},
        {"determinism across thread counts", determinism},
        {"band properties on logit-het", band_properties},
        {"coverage on the linear design", coverage},
        {"classification identities", ca_identities},
        {"confidence-set containment", confset_containment},
    };
    std::vector<std::size_t> selected;
    for (int k = 1; k < argc; ++k) {
        const int n = std::atoi(argv[k]);
        if (n < 1 || n > static_cast<int>(criteria.size())) {
            std::cerr << "unknown criterion '" << argv[k] << "'\n";
            return 2;
        }
        selected.push_back(static_cast<std::size_t>(n));
    }
    if (selected.empty())
        for (std::size_t k = 1; k <= criteria.size(); ++k) selected.push_back(k);

    int failed = 0;
    for (std::size_t k : selected) {
        const auto& [name, fn] = criteria[k - 1];
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("threw: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::fail ? "FAIL" : "SKIP";
        std::cout << "criterion " << k << " " << tag << " " << name << ": " << o.detail << std::endl;
        failed += o.status == Status::fail;
    }
    return failed ? 1 : 0;
}
