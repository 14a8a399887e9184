#include "sorted_effects/models.hpp"

#include "sorted_effects/error.hpp"
#include "sorted_effects/normal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace sorted_effects {

namespace {

constexpr int binary_max_iterations = 50;
constexpr double score_tolerance = 1e-8;
constexpr double loglik_tolerance = 1e-10;
// The likelihood-change rule only ends the iterations once the score is this small.
constexpr double score_gate = 1e-7;
constexpr double separation_bound = 1e-10;

constexpr int qr_max_iterations = 100;
constexpr double qr_gap_tolerance = 1e-7;
constexpr double qr_step_fraction = 0.99995;

void check_inputs(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    if (X.rows() != y.size() || X.rows() != w.size()) {
        throw Error(ErrorCategory::model, "design, response and weights differ in length");
    }
    if (X.cols() == 0) throw Error(ErrorCategory::model, "design matrix has no columns");
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (!(w(i) >= 0.0) || !std::isfinite(w(i))) {
            throw Error(ErrorCategory::model, "weights must be finite and nonnegative");
        }
    }
    if (!(w.sum() > 0.0)) throw Error(ErrorCategory::model, "total weight is zero");
}

Eigen::VectorXd normalized(const Eigen::VectorXd& w) { return w * (static_cast<double>(w.size()) / w.sum()); }

// log Phi(x), accurate far into the lower tail.
double log_normal_cdf(double x) {
    if (x > -30.0) return std::log(normal_cdf(x));
    // Asymptotic series of the Mills ratio.
    const double x2 = x * x;
    return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * 3.14159265358979323846) +
           std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double softplus(double eta) { return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

struct BinaryState {
    double loglik = 0.0;
    Eigen::VectorXd score;
    Eigen::VectorXd irls_weight;
    Eigen::VectorXd prob;
};

BinaryState binary_state(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                         const Eigen::VectorXd& beta, Link link) {
    const Eigen::VectorXd eta = X * beta;
    const Eigen::Index n = eta.size();
    BinaryState st;
    st.prob.resize(n);
    st.irls_weight.resize(n);
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = eta(i);
        if (link == Link::logit) {
            const double p = logistic(e);
            st.prob(i) = p;
            if (w(i) > 0.0) st.loglik += w(i) * (y(i) * e - softplus(e));
            resid(i) = w(i) * (y(i) - p);
            st.irls_weight(i) = w(i) * p * (1.0 - p);
        } else {
            const double p = normal_cdf(e);
            const double log_p = log_normal_cdf(e);
            const double log_q = log_normal_cdf(-e);
            const double log_pdf = -0.5 * e * e - 0.91893853320467274178;
            st.prob(i) = p;
            if (w(i) > 0.0) st.loglik += w(i) * (y(i) * log_p + (1.0 - y(i)) * log_q);
            // Mills ratios in log space so neither tail overflows.
            const double ratio_p = std::exp(log_pdf - log_p);
            const double ratio_q = std::exp(log_pdf - log_q);
            resid(i) = w(i) * (y(i) * ratio_p - (1.0 - y(i)) * ratio_q);
            // Observed information; positive because log Phi is concave.
            st.irls_weight(i) = w(i) * (y(i) * ratio_p * (e + ratio_p) + (1.0 - y(i)) * ratio_q * (ratio_q - e));
        }
    }
    st.score = X.transpose() * resid;
    return st;
}

// Frisch-Newton interior point for  max c'y  s.t.  A'y + z - w = c  with the
// bounded dual 0 <= x <= 1 (primal-dual, Mehrotra predictor-corrector).
// A is p x n. Returns the dual vector y, which is -beta for the rq problem.
struct FnbResult {
    Eigen::VectorXd y;
    int iterations = 0;
    double gap = 0.0;
    bool converged = false;
};

FnbResult frisch_newton(const Eigen::MatrixXd& A, const Eigen::VectorXd& c, const Eigen::VectorXd& b,
                        Eigen::VectorXd x, double gap_tolerance) {
    const Eigen::Index n = A.cols();
    const double big = 1e20;
    const double eps = 1e-7;

    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    Eigen::LLT<Eigen::MatrixXd> chol(A * A.transpose());
    if (chol.info() != Eigen::Success) throw Error(ErrorCategory::model, "quantile regression design is singular");
    Eigen::VectorXd y = chol.solve(A * c);

    Eigen::VectorXd s = c - A.transpose() * y;
    Eigen::VectorXd z(n), w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double extra = std::abs(s(i)) < eps ? eps : 0.0;
        z(i) = std::max(s(i), 0.0) + extra;
        w(i) = std::max(-s(i), 0.0) + extra;
        s(i) = 1.0 - x(i);
    }
    double gap = z.dot(x) + w.dot(s);

    Eigen::VectorXd dx(n), ds(n), dz(n), dw(n), dr(n), u(n);
    FnbResult out;
    while (gap > gap_tolerance && out.iterations < qr_max_iterations) {
        ++out.iterations;
        for (Eigen::Index i = 0; i < n; ++i) {
            d(i) = 1.0 / (z(i) / x(i) + w(i) / s(i));
            ds(i) = z(i) - w(i);
            dz(i) = d(i) * ds(i);
        }
        Eigen::VectorXd dy = b - A * x + A * dz;
        const Eigen::VectorXd rhs = dy;
        chol.compute(A * d.asDiagonal() * A.transpose());
        if (chol.info() != Eigen::Success) break;
        dy = chol.solve(dy);
        ds = A.transpose() * dy - ds;

        double deltap = big;
        double deltad = big;
        for (Eigen::Index i = 0; i < n; ++i) {
            dx(i) = d(i) * ds(i);
            ds(i) = -dx(i);
            dz(i) = -z(i) * (dx(i) / x(i) + 1.0);
            dw(i) = -w(i) * (ds(i) / s(i) + 1.0);
            if (dx(i) < 0.0) deltap = std::min(deltap, -x(i) / dx(i));
            if (ds(i) < 0.0) deltap = std::min(deltap, -s(i) / ds(i));
            if (dz(i) < 0.0) deltad = std::min(deltad, -z(i) / dz(i));
            if (dw(i) < 0.0) deltad = std::min(deltad, -w(i) / dw(i));
        }
        deltap = std::min(qr_step_fraction * deltap, 1.0);
        deltad = std::min(qr_step_fraction * deltad, 1.0);

        if (std::min(deltap, deltad) < 1.0) {
            // Corrector step with a centering parameter.
            double mu = x.dot(z) + s.dot(w);
            const double g = mu + deltap * dx.dot(z) + deltad * dz.dot(x) + deltap * deltad * dz.dot(dx) +
                             deltap * ds.dot(w) + deltad * dw.dot(s) + deltap * deltad * ds.dot(dw);
            mu = mu * std::pow(g / mu, 3) / (2.0 * static_cast<double>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                dr(i) = d(i) * (mu * (1.0 / s(i) - 1.0 / x(i)) + dx(i) * dz(i) / x(i) - ds(i) * dw(i) / s(i));
            }
            dy = chol.solve(rhs + A * dr);
            u = A.transpose() * dy;
            deltap = big;
            deltad = big;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double dxdz = dx(i) * dz(i);
                const double dsdw = ds(i) * dw(i);
                dx(i) = d(i) * (u(i) - z(i) + w(i)) - dr(i);
                ds(i) = -dx(i);
                dz(i) = -z(i) + (mu - z(i) * dx(i) - dxdz) / x(i);
                dw(i) = -w(i) + (mu - w(i) * ds(i) - dsdw) / s(i);
                if (dx(i) < 0.0) deltap = std::min(deltap, -x(i) / dx(i));
                if (ds(i) < 0.0) deltap = std::min(deltap, -s(i) / ds(i));
                if (dz(i) < 0.0) deltad = std::min(deltad, -z(i) / dz(i));
                if (dw(i) < 0.0) deltad = std::min(deltad, -w(i) / dw(i));
            }
            deltap = std::min(qr_step_fraction * deltap, 1.0);
            deltad = std::min(qr_step_fraction * deltad, 1.0);
        }
        x += deltap * dx;
        s += deltap * ds;
        y += deltad * dy;
        z += deltad * dz;
        w += deltad * dw;
        gap = z.dot(x) + w.dot(s);
        if (!std::isfinite(gap)) break;
    }
    out.y = std::move(y);
    out.gap = gap;
    out.converged = gap <= gap_tolerance;
    return out;
}

// Basic solution through the p observations with the smallest absolute
// residuals that span the column space.
std::optional<Eigen::VectorXd> nearby_vertex(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& beta) {
    const Eigen::Index n = X.rows();
    const Eigen::Index p = X.cols();
    const Eigen::VectorXd r = (y - X * beta).cwiseAbs();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return r(a) < r(b); });

    Eigen::MatrixXd basis(p, p);
    std::vector<Eigen::Index> chosen;
    for (Eigen::Index idx : order) {
        if (static_cast<Eigen::Index>(chosen.size()) == p) break;
        Eigen::VectorXd v = X.row(idx).transpose();
        const double norm = v.norm();
        if (norm == 0.0) continue;
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t k = 0; k < chosen.size(); ++k) {
                const auto col = basis.col(static_cast<Eigen::Index>(k));
                v -= col.dot(v) * col;
            }
        }
        if (v.norm() <= 1e-9 * norm) continue;
        basis.col(static_cast<Eigen::Index>(chosen.size())) = v / v.norm();
        chosen.push_back(idx);
    }
    if (static_cast<Eigen::Index>(chosen.size()) < p) return std::nullopt;
    Eigen::MatrixXd Xh(p, p);
    Eigen::VectorXd yh(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        Xh.row(k) = X.row(chosen[static_cast<std::size_t>(k)]);
        yh(k) = y(chosen[static_cast<std::size_t>(k)]);
    }
    Eigen::VectorXd sol = Xh.fullPivLu().solve(yh);
    if (!sol.allFinite()) return std::nullopt;
    return sol;
}

}  // namespace

const char* method_name(Method method) {
    switch (method) {
        case Method::ols: return "ols";
        case Method::logit: return "logit";
        case Method::probit: return "probit";
        case Method::qr: return "qr";
    }
    return "unknown";
}

Method parse_method(std::string_view text) {
    if (text == "ols") return Method::ols;
    if (text == "logit") return Method::logit;
    if (text == "probit") return Method::probit;
    if (text == "qr" || text == "QR") return Method::qr;
    throw Error(ErrorCategory::config, "unknown method '" + std::string(text) + "'");
}

std::vector<double> default_taus() {
    std::vector<double> taus;
    for (int k = 5; k <= 95; ++k) taus.push_back(k / 100.0);
    return taus;
}

void ModelSpec::validate() const {
    if (method != Method::qr) return;
    if (taus.empty()) throw Error(ErrorCategory::config, "quantile regression needs at least one tau");
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (!(taus[i] > 0.0 && taus[i] < 1.0)) throw Error(ErrorCategory::config, "taus must lie in (0, 1)");
        if (i > 0 && !(taus[i] > taus[i - 1])) throw Error(ErrorCategory::config, "taus must be strictly increasing");
    }
}

double logistic(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

FittedModel fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
    check_inputs(X, y, w);
    const Eigen::VectorXd sw = normalized(w).cwiseSqrt();
    const Eigen::MatrixXd A = sw.asDiagonal() * X.values;
    const Eigen::VectorXd rhs = sw.cwiseProduct(y);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols()) {
        throw Error(ErrorCategory::model, "weighted design is rank deficient (rank " + std::to_string(qr.rank()) +
                                              " < " + std::to_string(A.cols()) + ")");
    }
    FittedModel m;
    m.spec.method = Method::ols;
    m.spec.taus.clear();
    m.coefficients = qr.solve(rhs);
    m.info = X.info;
    FitDiagnostics diag;
    diag.converged = true;
    diag.iterations = 1;
    diag.criterion = (A.transpose() * (rhs - A * m.coefficients.col(0))).cwiseAbs().maxCoeff();
    m.diagnostics.push_back(diag);
    return m;
}

FittedModel fit_binary_mle(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w, Link link) {
    check_inputs(X, y, w);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) throw Error(ErrorCategory::model, "binary response must be coded 0/1");
    }
    const Eigen::VectorXd wn = normalized(w);
    const Eigen::MatrixXd& A = X.values;
    const Eigen::Index p = A.cols();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    BinaryState st = binary_state(A, y, wn, beta, link);
    FitDiagnostics diag;
    bool converged = false;
    bool stalled = false;
    // Likelihood stopped moving while the score stayed large: a direction of
    // (quasi-)separation along which the optimum is at infinity.
    bool flat = false;
    for (int iter = 0; iter < binary_max_iterations; ++iter) {
        if (st.score.cwiseAbs().maxCoeff() <= score_tolerance) {
            converged = true;
            break;
        }
        const Eigen::MatrixXd H = A.transpose() * st.irls_weight.asDiagonal() * A;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
        Eigen::VectorXd step = ldlt.solve(st.score);
        if (ldlt.info() != Eigen::Success || !step.allFinite()) {
            stalled = true;
            break;
        }
        // Near the optimum the gain is below the rounding of the log-likelihood.
        const double slack = 1e-12 * (std::abs(st.loglik) + 1.0);
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        BinaryState next = binary_state(A, y, wn, candidate, link);
        int halvings = 0;
        while (!(next.loglik >= st.loglik - slack) && halvings < 30) {
            scale *= 0.5;
            candidate = beta + scale * step;
            next = binary_state(A, y, wn, candidate, link);
            ++halvings;
        }
        diag.iterations = iter + 1;
        if (!(next.loglik >= st.loglik - slack)) {
            stalled = true;
            break;
        }
        const double change = std::abs(next.loglik - st.loglik) / (std::abs(st.loglik) + 0.1);
        beta = std::move(candidate);
        st = std::move(next);
        if (change <= loglik_tolerance) {
            if (st.score.cwiseAbs().maxCoeff() <= score_gate) {
                converged = true;
                break;
            }
            flat = true;
        }
    }
    diag.criterion = st.score.cwiseAbs().maxCoeff();
    diag.log_likelihood = st.loglik;
    diag.converged = converged;
    bool extreme = false;
    for (Eigen::Index i = 0; i < st.prob.size(); ++i) {
        if (wn(i) > 0.0 && (st.prob(i) < separation_bound || st.prob(i) > 1.0 - separation_bound)) extreme = true;
    }
    const std::string which = link == Link::logit ? "logit" : "probit";
    if (extreme) {
        throw SeparationError(which + " fit: fitted probabilities at 0 or 1 indicate (quasi-)separation");
    }
    // A flat likelihood is kept as the fit (converged = false), as common GLM
    // software does; the diverging coefficient barely moves the predictions.
    if (!converged && !flat) {
        throw ConvergenceError(which + " fit did not converge after " + std::to_string(diag.iterations) +
                               " iterations" + (stalled ? " (no ascent direction)" : ""));
    }
    FittedModel m;
    m.spec.method = link == Link::logit ? Method::logit : Method::probit;
    m.spec.taus.clear();
    m.coefficients = beta;
    m.info = X.info;
    m.diagnostics.push_back(diag);
    return m;
}

double check_loss(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                  const Eigen::VectorXd& beta, double tau) {
    const Eigen::VectorXd r = y - X * beta;
    double total = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) total += w(i) * r(i) * (tau - (r(i) < 0.0 ? 1.0 : 0.0));
    return total;
}

FittedModel fit_qr(const DesignMatrix& X, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                   const std::vector<double>& taus) {
    check_inputs(X, y, w);
    ModelSpec spec;
    spec.method = Method::qr;
    spec.taus = taus;
    spec.validate();

    // rho_tau is positively homogeneous, so weights scale the rows.
    const Eigen::VectorXd wn = normalized(w);
    std::vector<Eigen::Index> rows;
    for (Eigen::Index i = 0; i < wn.size(); ++i) {
        if (wn(i) > 0.0) rows.push_back(i);
    }
    const auto m = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index p = X.cols();
    if (m < p) throw Error(ErrorCategory::model, "fewer weighted observations than coefficients");
    Eigen::MatrixXd Xw(m, p);
    Eigen::VectorXd yw(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const Eigen::Index i = rows[static_cast<std::size_t>(k)];
        Xw.row(k) = wn(i) * X.values.row(i);
        yw(k) = wn(i) * y(i);
    }
    const Eigen::MatrixXd A = Xw.transpose();
    const Eigen::VectorXd c = -yw;
    const double gap_tolerance = qr_gap_tolerance * std::max(1.0, yw.cwiseAbs().sum());

    FittedModel model;
    model.spec = spec;
    model.info = X.info;
    model.coefficients.resize(p, static_cast<Eigen::Index>(taus.size()));
    for (std::size_t t = 0; t < taus.size(); ++t) {
        const double tau = taus[t];
        const Eigen::VectorXd b = (1.0 - tau) * A.rowwise().sum();
        const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(m, 1.0 - tau);
        FnbResult res = frisch_newton(A, c, b, x0, gap_tolerance);
        if (!res.converged) {
            throw ConvergenceError("quantile regression did not converge at tau = " + std::to_string(tau));
        }
        Eigen::VectorXd beta = -res.y;
        FitDiagnostics diag;
        diag.converged = true;
        diag.iterations = res.iterations;
        diag.criterion = res.gap / std::max(1.0, yw.cwiseAbs().sum());
        diag.tau = tau;
        // Xw, yw already carry the weights, so unit weights here.
        const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
        if (auto vertex = nearby_vertex(Xw, yw, beta)) {
            const double loss_ip = check_loss(Xw, yw, ones, beta, tau);
            const double loss_v = check_loss(Xw, yw, ones, *vertex, tau);
            if (loss_v <= loss_ip + 1e-12 * (1.0 + std::abs(loss_ip))) {
                beta = *vertex;
                diag.vertex = true;
            }
        }
        model.coefficients.col(static_cast<Eigen::Index>(t)) = beta;
        model.diagnostics.push_back(diag);
    }
    return model;
}

FittedModel fit_model(const ModelSpec& spec, const DesignMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& w) {
    switch (spec.method) {
        case Method::ols: return fit_ols(X, y, w);
        case Method::logit: return fit_binary_mle(X, y, w, Link::logit);
        case Method::probit: return fit_binary_mle(X, y, w, Link::probit);
        case Method::qr: return fit_qr(X, y, w, spec.taus);
    }
    throw Error(ErrorCategory::model, "unknown method");
}

Eigen::MatrixXd predict(const FittedModel& model, const DesignMatrix& X) {
    if (X.cols() != model.coefficients.rows()) {
        throw Error(ErrorCategory::model, "design has " + std::to_string(X.cols()) + " columns, model expects " +
                                              std::to_string(model.coefficients.rows()));
    }
    if (model.info && X.info && model.info != X.info && model.info->column_names() != X.info->column_names()) {
        throw Error(ErrorCategory::model, "design columns do not match the fitted model");
    }
    Eigen::MatrixXd eta = X.values * model.coefficients;
    switch (model.spec.method) {
        case Method::logit: return eta.unaryExpr([](double e) { return logistic(e); });
        case Method::probit: return eta.unaryExpr([](double e) { return normal_cdf(e); });
        default: return eta;
    }
}

}  // namespace sorted_effects
