#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "failfoundry/dataset.hpp"

namespace ff::gbt {

struct GbtParams {
    int n_trees = 100;
    int max_depth = 6;
    double learning_rate = 0.1;
    double colsample_bytree = 1.0;
    double min_child_weight = 1.0;  // minimum hessian sum per child
    double l2_reg = 1.0;
    std::uint64_t seed = 0;
};

// Binary tree as a flat node array; node 0 is the root. Leaves have
// left == right == -1 and carry the (learning-rate scaled) weight.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;  // where NA rows go
    int left = -1;
    int right = -1;
    double weight = 0.0;
    double gain = 0.0;  // split nodes only; feeds importance
};

struct Tree {
    std::vector<TreeNode> nodes;
};

struct TreeEnsemble {
    std::vector<Tree> trees;
    double base_score = 0.5;  // probability scale
    GbtParams params;
    std::vector<std::string> feature_names;
    std::vector<double> round_losses;  // mean training logistic loss after each round
};

struct FeatureImportance {
    std::vector<double> gain;  // accumulated split gain per feature index
    std::vector<std::string> names;
};

// Second-order gradient boosting with logistic loss and exact greedy splits.
// Per round: g = p - y, h = p(1-p); split gain is the usual
// 0.5*[GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)]; leaf weight -G/(H+l) scaled by
// the learning rate. NA rows follow a learned default direction, chosen by
// evaluating both sides during split search. Deterministic for a fixed seed
// regardless of thread count.
TreeEnsemble fit(const Dataset& d, const GbtParams& params);

// logistic(logit(base_score) + sum of routed leaf weights). Errors when a
// feature the trees reference is missing from the dataset.
std::vector<double> predict_proba(const TreeEnsemble& m, const Dataset& d);
// Same, on the logit scale.
std::vector<double> predict_raw(const TreeEnsemble& m, const Dataset& d);

FeatureImportance importance(const TreeEnsemble& m);

// Indices of the k highest-gain features; zero-gain features never appear,
// ties broken by ascending feature index.
std::vector<int> top_k_features(const FeatureImportance& fi, int k);

// Line-oriented text model format (one node per line) readable without this
// library; see save_model's header lines for the layout.
void save_model(const TreeEnsemble& m, const std::string& path);
TreeEnsemble load_model(const std::string& path);

}  // namespace ff::gbt
