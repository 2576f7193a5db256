#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "failfoundry/dataset.hpp"

namespace ff::lasso {

// Logistic model on the original feature scale. Standardization constants
// are kept so diagnostics (KKT checks) can move back to the internal scale.
struct GlmModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<double> feature_means;
    std::vector<double> feature_sds;  // 0 marks a dropped constant feature
    std::vector<std::string> feature_names;
};

struct LassoPath {
    std::vector<double> lambdas;  // strictly decreasing, lambdas[0] == lambda_max
    std::vector<GlmModel> models;
    std::vector<int> nonzero_counts;
    std::vector<std::string> dropped_features;  // constant columns, warned on stderr
};

struct CvResult {
    std::vector<double> lambdas;
    std::vector<double> mean_auc;
    std::vector<double> se_auc;
    double lambda_best = 0.0;  // max mean AUC, smallest lambda on ties
    int best_index = -1;
};

struct FitOptions {
    int n_lambdas = 100;
    double lambda_min_ratio = 1e-3;
    double tol = 1e-7;       // max standardized-coefficient change
    int max_outer = 100;     // IRLS loops per lambda
    int max_inner = 1000;    // coordinate-descent cycles per IRLS loop
};

// Collects the penalized objective (mean NLL + lambda*||beta||_1 on the
// standardized scale) after each outer IRLS iteration.
struct FitDiagnostics {
    std::vector<double> objective_trace;
};

// L1-penalized logistic regression over a log-spaced lambda grid, fit by
// cyclical coordinate descent inside an IRLS approximation with warm starts.
// Features are standardized internally; reported coefficients are on the
// original scale and the intercept is never penalized. Requires labels, both
// classes, and no NA values.
LassoPath fit_path(const Dataset& d, const FitOptions& opts = {});

// Single-lambda fit, cold start.
GlmModel fit_single(const Dataset& d, double lambda, const FitOptions& opts = {},
                    FitDiagnostics* diag = nullptr);

// Stratified k-fold CV: refit the path's lambda grid on each fold complement,
// score held-out AUC. Every fold must contain both classes.
CvResult cross_validate(const Dataset& d, const LassoPath& path, int n_folds,
                        std::uint64_t seed, const FitOptions& opts = {});

// Elementwise logistic of the linear predictor. NA anywhere -> error.
std::vector<double> predict_proba(const GlmModel& m, const Dataset& d);

// Max over features of |(1/n) <x_j_std, y - p>|: at an exact LASSO solution
// this never exceeds lambda.
double kkt_max_residual(const Dataset& d, const GlmModel& m);

int count_nonzero(const GlmModel& m);

// (feature name, coefficient) rows with a leading "(Intercept)" row.
void export_coefficients_csv(const GlmModel& m, const std::string& path);

}  // namespace ff::lasso
