#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "failfoundry/bayes.hpp"
#include "failfoundry/dataset.hpp"
#include "failfoundry/gbt.hpp"
#include "failfoundry/lasso.hpp"

namespace ff::stack {

enum class Level2 { Glm, Bayes };

struct StackSpec {
    std::vector<gbt::GbtParams> base_configs;
    // One base model per (config, sample seed) pair; seeds feed the
    // undersampler so each model sees a different negative subset. An empty
    // list means one model per config on the untouched training data.
    std::vector<std::uint64_t> base_sample_seeds;
    double undersample_ratio = 0.0;  // 0 disables undersampling
    Level2 level2 = Level2::Glm;
    int oof_folds = 5;
    std::uint64_t seed = 0;  // fold assignment
    bayes::BayesLogisticSpec bayes_spec{};
    lasso::FitOptions glm_options{};
    int glm_cv_folds = 5;
};

// The paper's three base parameter sets.
std::vector<gbt::GbtParams> paper_base_configs();

struct StackModel {
    std::vector<gbt::TreeEnsemble> base_models;  // refit on the full data
    std::vector<std::string> base_names;
    Level2 level2_kind = Level2::Glm;
    lasso::GlmModel level2_model;  // bayes level-2 stores posterior means here
    bayes::PosteriorSamples level2_posterior;  // bayes level-2 only

    // Out-of-fold training artifacts, kept for inspection and tests.
    std::vector<double> oof_matrix;  // n x n_base, row-major
    std::vector<int> oof_fold;       // fold per training row
    std::vector<double> oof_auc;     // per base model
};

// Two-level stacking with mandatory out-of-fold discipline: each row's
// level-2 covariates come from base models trained without that row's fold.
// Base models are refit on the full data for deployment afterwards.
// `fold_override` pins fold assignments (testing hook).
StackModel fit_stack(const Dataset& d, const StackSpec& spec,
                     const std::vector<int>* fold_override = nullptr);

std::vector<double> predict_stack(const StackModel& m, const Dataset& d);

// Draw-wise probabilities under a bayes level-2 (posterior predictive),
// one row of output per kept draw, subsampled by `stride`.
std::vector<std::vector<double>> predict_stack_draws(const StackModel& m,
                                                     const Dataset& d,
                                                     std::size_t stride = 1);

}  // namespace ff::stack
