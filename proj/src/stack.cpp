#include "failfoundry/stack.hpp"

#include <algorithm>
#include <cmath>

#include "failfoundry/errors.hpp"
#include "failfoundry/metrics.hpp"
#include "failfoundry/rng.hpp"

namespace ff::stack {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Dataset covariate_dataset(const std::vector<double>& matrix, std::size_t n,
                          const std::vector<std::string>& names,
                          const std::optional<std::vector<int>>& labels) {
    Dataset d;
    d.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.ids[i] = static_cast<std::int64_t>(i);
    for (const auto& name : names) d.columns.push_back({name, ColumnType::Numeric, {}});
    d.values = matrix;
    d.labels = labels;
    return d;
}

std::vector<int> stratified_folds(const std::vector<int>& y, int n_folds,
                                  std::uint64_t seed) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] == 1 ? pos : neg).push_back(i);
    Rng rng(seed);
    std::vector<int> fold(y.size(), -1);
    auto deal = [&](std::vector<std::size_t>& group) {
        for (std::size_t i = 0; i + 1 < group.size(); ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(group.size() - i));
            std::swap(group[i], group[j]);
        }
        for (std::size_t i = 0; i < group.size(); ++i) {
            fold[group[i]] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
        }
    };
    deal(pos);
    deal(neg);
    return fold;
}

}  // namespace

std::vector<gbt::GbtParams> paper_base_configs() {
    gbt::GbtParams set1, set2, set3;
    set1.max_depth = 15;
    set1.colsample_bytree = 0.7;
    set2.max_depth = 5;
    set2.colsample_bytree = 0.7;
    set3.max_depth = 15;
    set3.colsample_bytree = 0.3;
    return {set1, set2, set3};
}

StackModel fit_stack(const Dataset& d, const StackSpec& spec,
                     const std::vector<int>* fold_override) {
    if (spec.base_configs.empty()) {
        throw ConfigError("stack: at least one base config required");
    }
    if (spec.oof_folds < 2) throw ConfigError("stack: oof_folds must be >= 2");
    if (!d.labels) throw ValueError("stack: dataset has no labels");
    const std::vector<int>& y = *d.labels;
    const std::size_t n = d.n_rows();

    std::vector<int> fold;
    if (fold_override) {
        fold = *fold_override;
        if (fold.size() != n) throw ConfigError("stack: fold override size mismatch");
    } else {
        fold = stratified_folds(y, spec.oof_folds, spec.seed);
    }
    for (int f = 0; f < spec.oof_folds; ++f) {
        int fp = 0, fn_ = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (fold[i] == f) ((y[i] == 1) ? fp : fn_)++;
        }
        if (fp == 0 || fn_ == 0) {
            throw ValueError("stack: fold " + std::to_string(f) + " is missing a class");
        }
    }

    // Base model roster: configs crossed with sample seeds.
    struct BaseDef {
        gbt::GbtParams params;
        std::uint64_t sample_seed = 0;
        bool undersample = false;
        std::string name;
    };
    std::vector<BaseDef> defs;
    for (std::size_t c = 0; c < spec.base_configs.size(); ++c) {
        if (spec.base_sample_seeds.empty()) {
            defs.push_back({spec.base_configs[c], 0, false,
                            "gbt" + std::to_string(c + 1)});
        } else {
            for (std::size_t s = 0; s < spec.base_sample_seeds.size(); ++s) {
                defs.push_back({spec.base_configs[c], spec.base_sample_seeds[s],
                                spec.undersample_ratio > 0.0,
                                "gbt" + std::to_string(c + 1) + "_s" +
                                    std::to_string(s + 1)});
            }
        }
    }
    const std::size_t n_base = defs.size();

    StackModel model;
    model.level2_kind = spec.level2;
    for (const auto& def : defs) model.base_names.push_back(def.name);
    model.oof_fold = fold;
    model.oof_matrix.assign(n * n_base, 0.0);

    // OOF pass: (fold, base) tasks are independent; each writes a disjoint
    // slice of the OOF matrix.
    const std::size_t n_tasks = static_cast<std::size_t>(spec.oof_folds) * n_base;
    std::vector<std::string> task_errors(n_tasks);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t task = 0; task < n_tasks; ++task) {
        const int f = static_cast<int>(task / n_base);
        const std::size_t b = task % n_base;
        try {
            std::vector<std::size_t> train_rows, test_rows;
            for (std::size_t i = 0; i < n; ++i) {
                (fold[i] == f ? test_rows : train_rows).push_back(i);
            }
            Dataset train = d.take_rows(train_rows);
            if (defs[b].undersample) {
                train = undersample(train, spec.undersample_ratio, defs[b].sample_seed);
            }
            Dataset test = d.take_rows(test_rows);
            gbt::TreeEnsemble ensemble = gbt::fit(train, defs[b].params);
            std::vector<double> probs = gbt::predict_proba(ensemble, test);
            for (std::size_t t = 0; t < test_rows.size(); ++t) {
                model.oof_matrix[test_rows[t] * n_base + b] = probs[t];
            }
        } catch (const std::exception& e) {
            task_errors[task] = e.what();
        }
    }
    for (const auto& msg : task_errors) {
        if (!msg.empty()) throw ValueError("stack: " + msg);
    }

    model.oof_auc.resize(n_base);
    for (std::size_t b = 0; b < n_base; ++b) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = model.oof_matrix[i * n_base + b];
        model.oof_auc[b] = metrics::roc_auc(y, col).auc;
    }

    // Level-2 on the OOF covariates.
    Dataset oof = covariate_dataset(model.oof_matrix, n, model.base_names, d.labels);
    if (spec.level2 == Level2::Glm) {
        lasso::LassoPath path = lasso::fit_path(oof, spec.glm_options);
        lasso::CvResult cv =
            lasso::cross_validate(oof, path, spec.glm_cv_folds, spec.seed, spec.glm_options);
        model.level2_model = path.models[static_cast<std::size_t>(cv.best_index)];
    } else {
        model.level2_posterior = bayes::sample(oof, spec.bayes_spec);
        bayes::PosteriorSummary summary = bayes::summarize(model.level2_posterior);
        lasso::GlmModel glm;
        glm.intercept = summary["b0"].mean;
        glm.feature_names = model.base_names;
        glm.coefficients.resize(n_base);
        glm.feature_means.assign(n_base, 0.0);
        glm.feature_sds.assign(n_base, 1.0);
        for (std::size_t b = 0; b < n_base; ++b) {
            glm.coefficients[b] = summary["b" + std::to_string(b + 1)].mean;
        }
        model.level2_model = glm;
    }

    // Deployment base models: refit on everything.
    model.base_models.resize(n_base);
    std::vector<std::string> refit_errors(n_base);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t b = 0; b < n_base; ++b) {
        try {
            Dataset train = d;
            if (defs[b].undersample) {
                train = undersample(d, spec.undersample_ratio, defs[b].sample_seed);
            }
            model.base_models[b] = gbt::fit(train, defs[b].params);
        } catch (const std::exception& e) {
            refit_errors[b] = e.what();
        }
    }
    for (const auto& msg : refit_errors) {
        if (!msg.empty()) throw ValueError("stack: " + msg);
    }
    return model;
}

namespace {

std::vector<double> base_probability_matrix(const StackModel& m, const Dataset& d) {
    const std::size_t n = d.n_rows();
    const std::size_t n_base = m.base_models.size();
    std::vector<double> matrix(n * n_base);
    for (std::size_t b = 0; b < n_base; ++b) {
        std::vector<double> probs = gbt::predict_proba(m.base_models[b], d);
        for (std::size_t i = 0; i < n; ++i) matrix[i * n_base + b] = probs[i];
    }
    return matrix;
}

}  // namespace

std::vector<double> predict_stack(const StackModel& m, const Dataset& d) {
    std::vector<double> matrix = base_probability_matrix(m, d);
    Dataset cov = covariate_dataset(matrix, d.n_rows(), m.base_names, std::nullopt);
    return lasso::predict_proba(m.level2_model, cov);
}

std::vector<std::vector<double>> predict_stack_draws(const StackModel& m,
                                                     const Dataset& d,
                                                     std::size_t stride) {
    if (m.level2_kind != Level2::Bayes) {
        throw ValueError("stack: draw-wise prediction needs a bayes level-2");
    }
    if (stride == 0) throw ConfigError("stack: stride must be positive");
    const auto& post = m.level2_posterior;
    const std::size_t n = d.n_rows();
    const std::size_t n_base = m.base_models.size();
    std::vector<double> matrix = base_probability_matrix(m, d);
    std::vector<std::vector<double>> out;
    for (std::size_t c = 0; c < post.n_chains(); ++c) {
        for (std::size_t it = 0; it < post.n_draws; it += stride) {
            std::vector<double> probs(n);
            for (std::size_t i = 0; i < n; ++i) {
                double eta = post.draw(c, it, 0);
                for (std::size_t b = 0; b < n_base; ++b) {
                    eta += post.draw(c, it, b + 1) * matrix[i * n_base + b];
                }
                probs[i] = sigmoid(eta);
            }
            out.push_back(std::move(probs));
        }
    }
    return out;
}

}  // namespace ff::stack
