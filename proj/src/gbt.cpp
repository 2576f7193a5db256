#include "failfoundry/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "failfoundry/csv.hpp"
#include "failfoundry/errors.hpp"
#include "failfoundry/metrics.hpp"
#include "failfoundry/rng.hpp"

namespace ff::gbt {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool default_left = true;
    bool valid = false;
};

// Best split for one feature within one node. rows index into the column
// data; g/h are aligned with rows of the full training set.
SplitCandidate best_split_for_feature(const std::vector<double>& col,
                                      const std::vector<int>& rows,
                                      const std::vector<double>& g,
                                      const std::vector<double>& h, double sum_g,
                                      double sum_h, const GbtParams& params,
                                      int feature) {
    thread_local std::vector<std::pair<double, int>> sorted;
    sorted.clear();
    double g_na = 0.0, h_na = 0.0;
    for (int r : rows) {
        const double v = col[r];
        if (std::isnan(v)) {
            g_na += g[r];
            h_na += h[r];
        } else {
            sorted.emplace_back(v, r);
        }
    }
    SplitCandidate best;
    best.feature = feature;
    if (sorted.size() < 2) return best;
    std::sort(sorted.begin(), sorted.end());

    const double lambda = params.l2_reg;
    const double parent = sum_g * sum_g / (sum_h + lambda);
    double gl = 0.0, hl = 0.0;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        gl += g[sorted[i].second];
        hl += h[sorted[i].second];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const double threshold = (sorted[i].first + sorted[i + 1].first) / 2.0;
        // NA rows tried on each side; the better one becomes the default.
        for (int na_left = 0; na_left < 2; ++na_left) {
            const double gl2 = gl + (na_left ? g_na : 0.0);
            const double hl2 = hl + (na_left ? h_na : 0.0);
            const double gr2 = sum_g - gl2;
            const double hr2 = sum_h - hl2;
            if (hl2 < params.min_child_weight || hr2 < params.min_child_weight) continue;
            const double gain =
                0.5 * (gl2 * gl2 / (hl2 + lambda) + gr2 * gr2 / (hr2 + lambda) - parent);
            if (gain > best.gain) {
                best.gain = gain;
                best.threshold = threshold;
                best.default_left = na_left != 0;
                best.valid = true;
            }
        }
    }
    if (!(best.gain > 0.0)) best.valid = false;
    return best;
}

}  // namespace

TreeEnsemble fit(const Dataset& d, const GbtParams& params) {
    if (d.n_rows() == 0) throw ValueError("gbt::fit: empty dataset");
    if (!d.labels) throw ValueError("gbt::fit: dataset has no labels");
    for (const auto& c : d.columns) {
        if (c.type == ColumnType::Categorical) {
            throw ValueError("gbt::fit: categorical column " + c.name +
                             " present, apply one_hot first");
        }
    }
    const std::size_t n = d.n_rows();
    const std::size_t p = d.n_cols();
    const std::vector<int>& y = *d.labels;
    std::int64_t n_pos = 0;
    for (int v : y) n_pos += v;
    if (n_pos == 0 || n_pos == static_cast<std::int64_t>(n)) {
        throw ValueError("gbt::fit: both classes must be present");
    }

    // Column-major copy: split search scans one feature at a time.
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) cols[j][i] = d.at(i, j);
    }

    TreeEnsemble m;
    m.params = params;
    for (const auto& c : d.columns) m.feature_names.push_back(c.name);
    m.base_score = static_cast<double>(n_pos) / static_cast<double>(n);
    const double base_margin = logit(m.base_score);

    std::vector<double> margin(n, base_margin);
    std::vector<double> prob(n), g(n), h(n);

    for (int t = 0; t < params.n_trees; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            prob[i] = sigmoid(margin[i]);
            g[i] = prob[i] - static_cast<double>(y[i]);
            h[i] = prob[i] * (1.0 - prob[i]);
        }
        // Column subsample, drawn once per tree.
        std::vector<int> features;
        if (params.colsample_bytree >= 1.0) {
            features.resize(p);
            for (std::size_t j = 0; j < p; ++j) features[j] = static_cast<int>(j);
        } else {
            const auto want = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::ceil(params.colsample_bytree *
                                                      static_cast<double>(p))));
            std::vector<int> all(p);
            for (std::size_t j = 0; j < p; ++j) all[j] = static_cast<int>(j);
            Rng rng(Rng::derive(params.seed, static_cast<std::uint64_t>(t)));
            for (std::size_t i = 0; i < want; ++i) {
                std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(p - i));
                std::swap(all[i], all[j]);
            }
            features.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(want));
            std::sort(features.begin(), features.end());
        }

        Tree tree;
        struct Work {
            int node;
            std::vector<int> rows;
            int depth;
        };
        std::vector<Work> stack;
        {
            std::vector<int> all_rows(n);
            for (std::size_t i = 0; i < n; ++i) all_rows[i] = static_cast<int>(i);
            tree.nodes.emplace_back();
            stack.push_back({0, std::move(all_rows), 0});
        }
        while (!stack.empty()) {
            Work w = std::move(stack.back());
            stack.pop_back();
            double sum_g = 0.0, sum_h = 0.0;
            for (int r : w.rows) {
                sum_g += g[r];
                sum_h += h[r];
            }
            TreeNode& node_ref = tree.nodes[w.node];
            auto make_leaf = [&](TreeNode& nd) {
                nd.feature = -1;
                nd.left = nd.right = -1;
                nd.weight = -params.learning_rate * sum_g / (sum_h + params.l2_reg);
            };
            if (w.depth >= params.max_depth || w.rows.size() < 2) {
                make_leaf(node_ref);
                continue;
            }
            // Parallel search over candidate features; the serial reduction
            // below keeps the winner independent of thread count (lowest
            // feature index wins ties).
            std::vector<SplitCandidate> per_feature(features.size());
#pragma omp parallel for schedule(dynamic)
            for (std::size_t fi = 0; fi < features.size(); ++fi) {
                per_feature[fi] =
                    best_split_for_feature(cols[features[fi]], w.rows, g, h, sum_g,
                                           sum_h, params, features[fi]);
            }
            SplitCandidate best;
            for (const auto& cand : per_feature) {
                if (cand.valid && cand.gain > best.gain) best = cand;
            }
            if (!best.valid) {
                make_leaf(node_ref);
                continue;
            }
            std::vector<int> left_rows, right_rows;
            const auto& col = cols[best.feature];
            for (int r : w.rows) {
                const double v = col[r];
                const bool go_left =
                    std::isnan(v) ? best.default_left : v < best.threshold;
                (go_left ? left_rows : right_rows).push_back(r);
            }
            const int left_id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            const int right_id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            TreeNode& nd = tree.nodes[w.node];  // re-take: vector may have grown
            nd.feature = best.feature;
            nd.threshold = best.threshold;
            nd.default_left = best.default_left;
            nd.gain = best.gain;
            nd.left = left_id;
            nd.right = right_id;
            stack.push_back({right_id, std::move(right_rows), w.depth + 1});
            stack.push_back({left_id, std::move(left_rows), w.depth + 1});
        }

        // Apply the new tree to the running margins.
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < n; ++i) {
            int node = 0;
            while (tree.nodes[node].left >= 0) {
                const TreeNode& nd = tree.nodes[node];
                const double v = cols[nd.feature][i];
                node = (std::isnan(v) ? nd.default_left : v < nd.threshold) ? nd.left
                                                                            : nd.right;
            }
            margin[i] += tree.nodes[node].weight;
        }
        m.trees.push_back(std::move(tree));

        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // log(1+e^eta) - y*eta, stabilized
            const double eta = margin[i];
            loss += std::max(eta, 0.0) + std::log1p(std::exp(-std::abs(eta))) -
                    static_cast<double>(y[i]) * eta;
        }
        m.round_losses.push_back(loss / static_cast<double>(n));
    }
    return m;
}

namespace {

std::vector<int> map_features(const TreeEnsemble& m, const Dataset& d) {
    std::vector<int> map(m.feature_names.size(), -1);
    for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
        map[j] = d.find_column(m.feature_names[j]);
    }
    // Only error for features actually referenced by some split.
    for (const auto& tree : m.trees) {
        for (const auto& nd : tree.nodes) {
            if (nd.left >= 0 && map[nd.feature] < 0) {
                throw ValueError("gbt::predict: dataset is missing feature " +
                                 m.feature_names[nd.feature]);
            }
        }
    }
    return map;
}

}  // namespace

std::vector<double> predict_raw(const TreeEnsemble& m, const Dataset& d) {
    const std::vector<int> fmap = map_features(m, d);
    const std::size_t n = d.n_rows();
    std::vector<double> out(n, logit(m.base_score));
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        double acc = out[i];
        for (const auto& tree : m.trees) {
            int node = 0;
            while (tree.nodes[node].left >= 0) {
                const TreeNode& nd = tree.nodes[node];
                const double v = d.at(i, static_cast<std::size_t>(fmap[nd.feature]));
                node = (std::isnan(v) ? nd.default_left : v < nd.threshold) ? nd.left
                                                                            : nd.right;
            }
            acc += tree.nodes[node].weight;
        }
        out[i] = acc;
    }
    return out;
}

std::vector<double> predict_proba(const TreeEnsemble& m, const Dataset& d) {
    std::vector<double> out = predict_raw(m, d);
    for (double& v : out) v = sigmoid(v);
    return out;
}

FeatureImportance importance(const TreeEnsemble& m) {
    FeatureImportance fi;
    fi.names = m.feature_names;
    fi.gain.assign(m.feature_names.size(), 0.0);
    for (const auto& tree : m.trees) {
        for (const auto& nd : tree.nodes) {
            if (nd.left >= 0) fi.gain[nd.feature] += nd.gain;
        }
    }
    return fi;
}

std::vector<int> top_k_features(const FeatureImportance& fi, int k) {
    if (k < 1) throw ValueError("top_k_features: k must be >= 1");
    std::vector<int> idx;
    for (std::size_t j = 0; j < fi.gain.size(); ++j) {
        if (fi.gain[j] > 0.0) idx.push_back(static_cast<int>(j));
    }
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (fi.gain[a] != fi.gain[b]) return fi.gain[a] > fi.gain[b];
        return a < b;
    });
    if (idx.size() > static_cast<std::size_t>(k)) idx.resize(static_cast<std::size_t>(k));
    return idx;
}

void save_model(const TreeEnsemble& m, const std::string& path) {
    std::ostringstream os;
    os << "failfoundry-gbt 1\n";
    os << "base_score " << csv::format_double(m.base_score) << "\n";
    os << "n_features " << m.feature_names.size() << "\n";
    for (std::size_t j = 0; j < m.feature_names.size(); ++j) {
        os << "feature " << j << " " << m.feature_names[j] << "\n";
    }
    os << "n_trees " << m.trees.size() << "\n";
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
        os << "tree " << t << " " << m.trees[t].nodes.size() << "\n";
        const auto& nodes = m.trees[t].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const TreeNode& nd = nodes[i];
            // node id, kind, feature, threshold, default dir, left, right, weight
            if (nd.left >= 0) {
                os << i << " split " << nd.feature << " "
                   << csv::format_double(nd.threshold) << " "
                   << (nd.default_left ? "L" : "R") << " " << nd.left << " " << nd.right
                   << " 0\n";
            } else {
                os << i << " leaf -1 0 L -1 -1 " << csv::format_double(nd.weight) << "\n";
            }
        }
    }
    csv::write_text_file(path, os.str());
}

TreeEnsemble load_model(const std::string& path) {
    std::istringstream is(csv::read_text_file(path));
    std::string word;
    auto expect = [&](const char* tag) {
        if (!(is >> word) || word != tag) {
            throw ParseError("gbt model " + path + ": expected \"" + tag + "\"");
        }
    };
    expect("failfoundry-gbt");
    int version = 0;
    is >> version;
    if (version != 1) throw ParseError("gbt model " + path + ": unsupported version");
    TreeEnsemble m;
    expect("base_score");
    is >> m.base_score;
    expect("n_features");
    std::size_t n_features = 0;
    is >> n_features;
    m.feature_names.resize(n_features);
    for (std::size_t j = 0; j < n_features; ++j) {
        expect("feature");
        std::size_t idx;
        is >> idx >> m.feature_names.at(idx);
    }
    expect("n_trees");
    std::size_t n_trees = 0;
    is >> n_trees;
    m.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        expect("tree");
        std::size_t tid = 0, n_nodes = 0;
        is >> tid >> n_nodes;
        auto& nodes = m.trees.at(tid).nodes;
        nodes.resize(n_nodes);
        for (std::size_t i = 0; i < n_nodes; ++i) {
            std::size_t id;
            std::string kind, dir;
            TreeNode nd;
            is >> id >> kind >> nd.feature >> nd.threshold >> dir >> nd.left >>
                nd.right >> nd.weight;
            if (!is) throw ParseError("gbt model " + path + ": truncated node line");
            nd.default_left = dir == "L";
            if (kind == "leaf") {
                nd.feature = -1;
                nd.left = nd.right = -1;
            } else if (kind != "split") {
                throw ParseError("gbt model " + path + ": unknown node kind " + kind);
            }
            nodes.at(id) = nd;
        }
    }
    return m;
}

}  // namespace ff::gbt
