#include "failfoundry/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "failfoundry/csv.hpp"
#include "failfoundry/errors.hpp"
#include "failfoundry/metrics.hpp"
#include "failfoundry/rng.hpp"

namespace ff::lasso {

namespace {

constexpr double kWeightFloor = 1e-5;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// Standardized design: column j holds (x - mean)/sd; constant columns keep
// sd = 0 and are excluded from every update.
struct Standardized {
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<double> x;  // column-major
    std::vector<double> mean, sd;
    std::vector<int> active;  // columns with sd > 0
    std::vector<int> y;
    double ybar = 0.0;
};

Standardized standardize(const Dataset& d) {
    if (!d.labels) throw ValueError("lasso: dataset has no labels");
    Standardized s;
    s.n = d.n_rows();
    s.p = d.n_cols();
    s.y = *d.labels;
    std::int64_t n_pos = 0;
    for (int v : s.y) n_pos += v;
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(s.n)) {
        throw ValueError("lasso: both classes must be present");
    }
    s.ybar = static_cast<double>(n_pos) / static_cast<double>(s.n);
    s.mean.resize(s.p);
    s.sd.resize(s.p);
    s.x.resize(s.n * s.p);
    for (std::size_t j = 0; j < s.p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            const double v = d.at(i, j);
            if (std::isnan(v)) {
                throw ValueError("lasso: NA in column " + d.columns[j].name +
                                 ", impute first");
            }
            mean += v;
        }
        mean /= static_cast<double>(s.n);
        double var = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) {
            const double dv = d.at(i, j) - mean;
            var += dv * dv;
        }
        var /= static_cast<double>(s.n);
        const double sd = std::sqrt(var);
        s.mean[j] = mean;
        s.sd[j] = sd;
        if (sd > 0.0) {
            s.active.push_back(static_cast<int>(j));
            for (std::size_t i = 0; i < s.n; ++i) {
                s.x[j * s.n + i] = (d.at(i, j) - mean) / sd;
            }
        }
    }
    return s;
}

// max_j |<x_j, y - ybar>| / n over active columns; the entry point of the
// first coefficient on the path.
double lambda_max_of(const Standardized& s) {
    std::vector<double> r(s.n);
    for (std::size_t i = 0; i < s.n; ++i) r[i] = static_cast<double>(s.y[i]) - s.ybar;
    double lmax = 0.0;
    for (int j : s.active) {
        double dot = 0.0;
        const double* col = &s.x[static_cast<std::size_t>(j) * s.n];
        for (std::size_t i = 0; i < s.n; ++i) dot += col[i] * r[i];
        lmax = std::max(lmax, std::abs(dot) / static_cast<double>(s.n));
    }
    return lmax;
}

struct WorkingState {
    std::vector<double> beta;  // standardized scale
    double beta0 = 0.0;
    std::vector<double> eta;   // linear predictor per row
    std::vector<double> prob;  // sigmoid(eta), or the exact null value initially
};

WorkingState null_state(const Standardized& s) {
    WorkingState w;
    w.beta.assign(s.p, 0.0);
    w.beta0 = logit(s.ybar);
    w.eta.assign(s.n, w.beta0);
    // prob is set to ybar directly (not sigmoid(logit(ybar))) so the first
    // gradient pass reproduces the lambda_max computation bit for bit and
    // every coefficient stays exactly zero there.
    w.prob.assign(s.n, s.ybar);
    return w;
}

double penalized_objective(const Standardized& s, const WorkingState& w, double lambda) {
    double nll = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) {
        const double eta = w.eta[i];
        nll += std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))) -
               static_cast<double>(s.y[i]) * eta;
    }
    nll /= static_cast<double>(s.n);
    double l1 = 0.0;
    for (int j : s.active) l1 += std::abs(w.beta[j]);
    return nll + lambda * l1;
}

// One lambda, warm-started IRLS + cyclical coordinate descent. Returns the
// largest standardized coefficient move of the final outer iteration.
void fit_at_lambda(const Standardized& s, double lambda, const FitOptions& opts,
                   WorkingState& w, FitDiagnostics* diag) {
    const double n = static_cast<double>(s.n);
    std::vector<double> wvec(s.n), wr(s.n), wxx(s.p);
    for (int outer = 0; outer < opts.max_outer; ++outer) {
        // Quadratic approximation at the current eta. wr holds w*(z - eta),
        // which is exactly y - p at the top of the loop.
        for (std::size_t i = 0; i < s.n; ++i) {
            const double p = w.prob[i];
            wvec[i] = std::max(p * (1.0 - p), kWeightFloor);
            wr[i] = static_cast<double>(s.y[i]) - p;
        }
        double sum_w = 0.0;
        for (std::size_t i = 0; i < s.n; ++i) sum_w += wvec[i];
        for (int j : s.active) {
            double acc = 0.0;
            const double* col = &s.x[static_cast<std::size_t>(j) * s.n];
            for (std::size_t i = 0; i < s.n; ++i) acc += wvec[i] * col[i] * col[i];
            wxx[j] = acc / n;
        }
        double outer_change = 0.0;
        for (int inner = 0; inner < opts.max_inner; ++inner) {
            double cycle_change = 0.0;
            // Coefficients first: at lambda_max the very first pass then sees
            // the untouched y - ybar residual, so every soft-threshold lands
            // on exactly zero.
            for (int j : s.active) {
                const double* col = &s.x[static_cast<std::size_t>(j) * s.n];
                double dot = 0.0;
                for (std::size_t i = 0; i < s.n; ++i) dot += col[i] * wr[i];
                const double z = dot / n + wxx[j] * w.beta[j];
                const double nb = soft_threshold(z, lambda) / wxx[j];
                const double delta = nb - w.beta[j];
                if (delta != 0.0) {
                    w.beta[j] = nb;
                    for (std::size_t i = 0; i < s.n; ++i) {
                        wr[i] -= wvec[i] * col[i] * delta;
                        w.eta[i] += col[i] * delta;
                    }
                    cycle_change = std::max(cycle_change, std::abs(delta));
                }
            }
            {  // intercept, unpenalized
                double acc = 0.0;
                for (std::size_t i = 0; i < s.n; ++i) acc += wr[i];
                const double delta = acc / sum_w;
                if (delta != 0.0) {
                    w.beta0 += delta;
                    for (std::size_t i = 0; i < s.n; ++i) {
                        wr[i] -= wvec[i] * delta;
                        w.eta[i] += delta;
                    }
                    cycle_change = std::max(cycle_change, std::abs(delta));
                }
            }
            outer_change = std::max(outer_change, cycle_change);
            if (cycle_change < opts.tol) break;
        }
        for (std::size_t i = 0; i < s.n; ++i) w.prob[i] = sigmoid(w.eta[i]);
        if (diag) diag->objective_trace.push_back(penalized_objective(s, w, lambda));
        if (outer_change < opts.tol) return;
    }
    throw ValueError("lasso: no convergence after " + std::to_string(opts.max_outer) +
                     " IRLS iterations at lambda=" + csv::format_double(lambda));
}

GlmModel to_original_scale(const Dataset& d, const Standardized& s,
                           const WorkingState& w) {
    GlmModel m;
    m.coefficients.assign(s.p, 0.0);
    m.feature_means = s.mean;
    m.feature_sds = s.sd;
    for (const auto& c : d.columns) m.feature_names.push_back(c.name);
    double intercept = w.beta0;
    for (int j : s.active) {
        m.coefficients[j] = w.beta[j] / s.sd[j];
        intercept -= w.beta[j] * s.mean[j] / s.sd[j];
    }
    m.intercept = intercept;
    return m;
}

std::vector<double> lambda_grid(double lmax, const FitOptions& opts) {
    if (opts.n_lambdas < 1) throw ConfigError("lasso: n_lambdas must be >= 1");
    std::vector<double> grid;
    if (opts.n_lambdas == 1) {
        grid.push_back(lmax);
        return grid;
    }
    const double lmin = lmax * opts.lambda_min_ratio;
    const double step = (std::log(lmax) - std::log(lmin)) /
                        static_cast<double>(opts.n_lambdas - 1);
    for (int k = 0; k < opts.n_lambdas; ++k) {
        grid.push_back(k == 0 ? lmax : std::exp(std::log(lmax) - step * k));
    }
    return grid;
}

LassoPath fit_path_standardized(const Dataset& d, const Standardized& s,
                                const FitOptions& opts) {
    LassoPath path;
    for (std::size_t j = 0; j < s.p; ++j) {
        if (s.sd[j] == 0.0) {
            path.dropped_features.push_back(d.columns[j].name);
            std::cerr << "lasso: warning: dropping constant feature "
                      << d.columns[j].name << "\n";
        }
    }
    const double lmax = lambda_max_of(s);
    path.lambdas = lambda_grid(lmax, opts);
    WorkingState w = null_state(s);
    for (double lambda : path.lambdas) {
        fit_at_lambda(s, lambda, opts, w, nullptr);
        GlmModel m = to_original_scale(d, s, w);
        path.nonzero_counts.push_back(count_nonzero(m));
        path.models.push_back(std::move(m));
    }
    return path;
}

}  // namespace

LassoPath fit_path(const Dataset& d, const FitOptions& opts) {
    Standardized s = standardize(d);
    return fit_path_standardized(d, s, opts);
}

GlmModel fit_single(const Dataset& d, double lambda, const FitOptions& opts,
                    FitDiagnostics* diag) {
    Standardized s = standardize(d);
    WorkingState w = null_state(s);
    fit_at_lambda(s, lambda, opts, w, diag);
    return to_original_scale(d, s, w);
}

CvResult cross_validate(const Dataset& d, const LassoPath& path, int n_folds,
                        std::uint64_t seed, const FitOptions& opts) {
    if (n_folds < 2) throw ConfigError("cross_validate: need at least 2 folds");
    if (!d.labels) throw ValueError("cross_validate: dataset has no labels");
    const std::size_t n = d.n_rows();
    // Stratified assignment: shuffle within class, deal round-robin.
    std::vector<int> fold(n, -1);
    {
        std::vector<std::size_t> pos, neg;
        for (std::size_t i = 0; i < n; ++i) ((*d.labels)[i] == 1 ? pos : neg).push_back(i);
        Rng rng(seed);
        auto deal = [&](std::vector<std::size_t>& group) {
            for (std::size_t i = 0; i + 1 < group.size(); ++i) {
                std::size_t j = i + static_cast<std::size_t>(
                                        rng.uniform_below(group.size() - i));
                std::swap(group[i], group[j]);
            }
            for (std::size_t i = 0; i < group.size(); ++i) {
                fold[group[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
            }
        };
        deal(pos);
        deal(neg);
    }
    for (int f = 0; f < n_folds; ++f) {
        int fp = 0, fn_ = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] == f) ((*d.labels)[i] == 1 ? fp : fn_)++;
        }
        if (fp == 0 || fn_ == 0) {
            throw ValueError("cross_validate: fold " + std::to_string(f) +
                             " is missing a class; use fewer folds");
        }
    }

    const std::size_t n_lambda = path.lambdas.size();
    // auc[fold * n_lambda + l]
    std::vector<double> auc(static_cast<std::size_t>(n_folds) * n_lambda, 0.0);
    std::vector<std::string> errors(n_folds);
#pragma omp parallel for schedule(dynamic)
    for (int f = 0; f < n_folds; ++f) {
        try {
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < n; ++i) {
                (fold[i] == f ? test_rows : train_rows).push_back(i);
            }
            Dataset train = d.take_rows(train_rows);
            Dataset test = d.take_rows(test_rows);
            Standardized s = standardize(train);
            WorkingState w = null_state(s);
            std::vector<int> test_y = *test.labels;
            for (std::size_t l = 0; l < n_lambda; ++l) {
                fit_at_lambda(s, path.lambdas[l], opts, w, nullptr);
                GlmModel m = to_original_scale(train, s, w);
                std::vector<double> probs = predict_proba(m, test);
                bool constant = true;
                for (std::size_t i = 1; i < probs.size(); ++i) {
                    if (probs[i] != probs[0]) {
                        constant = false;
                        break;
                    }
                }
                // All-ties convention: a constant predictor scores 0.5.
                auc[static_cast<std::size_t>(f) * n_lambda + l] =
                    constant ? 0.5 : metrics::roc_auc(test_y, probs).auc;
            }
        } catch (const std::exception& e) {
            errors[f] = e.what();
        }
    }
    for (const auto& msg : errors) {
        if (!msg.empty()) throw ValueError("cross_validate: " + msg);
    }

    CvResult cv;
    cv.lambdas = path.lambdas;
    cv.mean_auc.resize(n_lambda);
    cv.se_auc.resize(n_lambda);
    for (std::size_t l = 0; l < n_lambda; ++l) {
        double mean = 0.0;
        for (int f = 0; f < n_folds; ++f) {
            mean += auc[static_cast<std::size_t>(f) * n_lambda + l];
        }
        mean /= n_folds;
        double var = 0.0;
        for (int f = 0; f < n_folds; ++f) {
            const double dv = auc[static_cast<std::size_t>(f) * n_lambda + l] - mean;
            var += dv * dv;
        }
        var /= (n_folds > 1 ? n_folds - 1 : 1);
        cv.mean_auc[l] = mean;
        cv.se_auc[l] = std::sqrt(var / n_folds);
    }
    // Max mean AUC; on ties the smallest lambda, i.e. the last index since
    // lambdas decrease along the path.
    cv.best_index = 0;
    for (std::size_t l = 0; l < n_lambda; ++l) {
        if (cv.mean_auc[l] >= cv.mean_auc[static_cast<std::size_t>(cv.best_index)]) {
            cv.best_index = static_cast<int>(l);
        }
    }
    cv.lambda_best = cv.lambdas[static_cast<std::size_t>(cv.best_index)];
    return cv;
}

std::vector<double> predict_proba(const GlmModel& m, const Dataset& d) {
    if (d.n_cols() != m.coefficients.size()) {
        throw ValueError("glm predict: feature count mismatch");
    }
    const std::size_t n = d.n_rows();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = m.intercept;
        for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
            if (m.coefficients[j] == 0.0) continue;
            const double v = d.at(i, j);
            if (std::isnan(v)) {
                throw ValueError("glm predict: NA in row " + std::to_string(i) +
                                 ", imputation is the caller's job");
            }
            eta += m.coefficients[j] * v;
        }
        out[i] = sigmoid(eta);
    }
    return out;
}

double kkt_max_residual(const Dataset& d, const GlmModel& m) {
    const std::size_t n = d.n_rows();
    if (!d.labels) throw ValueError("kkt_max_residual: dataset has no labels");
    // Residual y - p from the model's own predictions.
    std::vector<double> resid(n);
    for (std::size_t i = 0; i < n; ++i) {
        double eta = m.intercept;
        for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
            if (m.coefficients[j] != 0.0) eta += m.coefficients[j] * d.at(i, j);
        }
        resid[i] = static_cast<double>((*d.labels)[i]) - sigmoid(eta);
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
        if (m.feature_sds[j] == 0.0) continue;  // dropped constant column
        double dot = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dot += (d.at(i, j) - m.feature_means[j]) / m.feature_sds[j] * resid[i];
        }
        worst = std::max(worst, std::abs(dot) / static_cast<double>(n));
    }
    return worst;
}

int count_nonzero(const GlmModel& m) {
    int k = 0;
    for (double b : m.coefficients) {
        if (b != 0.0) ++k;
    }
    return k;
}

void export_coefficients_csv(const GlmModel& m, const std::string& path) {
    csv::Table t;
    t.header = {"feature", "coefficient"};
    t.rows.push_back({"(Intercept)", csv::format_double(m.intercept)});
    for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
        t.rows.push_back({m.feature_names[j], csv::format_double(m.coefficients[j])});
    }
    csv::write_file(path, t);
}

}  // namespace ff::lasso
