#include "failfoundry/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "failfoundry/errors.hpp"
#include "failfoundry/rng.hpp"

namespace ff::cluster {

namespace {

double sq_dist(const double* a, const double* b, std::size_t p) {
    double acc = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        const double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

// k-means++: first centroid uniform, the rest proportional to the squared
// distance to the nearest centroid chosen so far.
std::vector<double> seed_centroids(const std::vector<double>& data, std::size_t n,
                                   std::size_t p, int k, Rng& rng) {
    std::vector<double> centroids(static_cast<std::size_t>(k) * p);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());
    std::size_t first = static_cast<std::size_t>(rng.uniform_below(n));
    std::copy_n(&data[first * p], p, centroids.begin());
    for (int c = 1; c < k; ++c) {
        const double* last = &centroids[static_cast<std::size_t>(c - 1) * p];
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(&data[i * p], last, p));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform01() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc > target) {
                    pick = i;
                    break;
                }
            }
        } else {
            // All remaining points coincide with chosen centroids.
            pick = static_cast<std::size_t>(rng.uniform_below(n));
        }
        std::copy_n(&data[pick * p], p, &centroids[static_cast<std::size_t>(c) * p]);
    }
    return centroids;
}

}  // namespace

KmeansResult kmeans(const std::vector<double>& data, std::size_t n_rows,
                    std::size_t n_cols, int k, std::uint64_t seed, int max_iter) {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (static_cast<std::size_t>(k) > n_rows) {
        throw ValueError("kmeans: k exceeds the number of rows");
    }
    if (data.size() != n_rows * n_cols) throw ValueError("kmeans: bad matrix shape");
    for (double v : data) {
        if (std::isnan(v)) throw ValueError("kmeans: NA in input matrix");
    }

    KmeansResult res;
    res.k = k;
    res.n_cols = n_cols;
    Rng rng(seed);
    res.centroids = seed_centroids(data, n_rows, n_cols, k, rng);
    res.assignments.assign(n_rows, -1);
    std::vector<double> dist_to_own(n_rows, 0.0);

    for (int iter = 0; iter < max_iter; ++iter) {
        if (iter > 0) {
            // Centroid update, serial accumulation in row order.
            std::vector<double> sums(static_cast<std::size_t>(k) * n_cols, 0.0);
            std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
            for (std::size_t i = 0; i < n_rows; ++i) {
                const int c = res.assignments[i];
                counts[static_cast<std::size_t>(c)]++;
                for (std::size_t j = 0; j < n_cols; ++j) {
                    sums[static_cast<std::size_t>(c) * n_cols + j] += data[i * n_cols + j];
                }
            }
            for (int c = 0; c < k; ++c) {
                if (counts[static_cast<std::size_t>(c)] == 0) {
                    // Re-seed an emptied cluster at the point farthest from
                    // its own centroid; the objective is untouched until the
                    // next assignment, which can only lower it.
                    std::size_t far = 0;
                    for (std::size_t i = 1; i < n_rows; ++i) {
                        if (dist_to_own[i] > dist_to_own[far]) far = i;
                    }
                    std::copy_n(&data[far * n_cols], n_cols,
                                &res.centroids[static_cast<std::size_t>(c) * n_cols]);
                    continue;
                }
                for (std::size_t j = 0; j < n_cols; ++j) {
                    res.centroids[static_cast<std::size_t>(c) * n_cols + j] =
                        sums[static_cast<std::size_t>(c) * n_cols + j] /
                        static_cast<double>(counts[static_cast<std::size_t>(c)]);
                }
            }
        }
        // Assignment: rows are independent, so this is the parallel kernel;
        // everything that sums floats stays serial to keep results identical
        // across thread counts.
        bool changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::size_t i = 0; i < n_rows; ++i) {
            int best = 0;
            double best_d = sq_dist(&data[i * n_cols], &res.centroids[0], n_cols);
            for (int c = 1; c < k; ++c) {
                const double dcur = sq_dist(
                    &data[i * n_cols],
                    &res.centroids[static_cast<std::size_t>(c) * n_cols], n_cols);
                if (dcur < best_d) {
                    best_d = dcur;
                    best = c;
                }
            }
            if (res.assignments[i] != best) {
                res.assignments[i] = best;
                changed = true;
            }
            dist_to_own[i] = best_d;
        }
        double wcss = 0.0;
        for (std::size_t i = 0; i < n_rows; ++i) wcss += dist_to_own[i];
        res.wcss_history.push_back(wcss);
        res.wcss = wcss;
        res.iterations = iter + 1;
        if (!changed) break;
    }
    return res;
}

KmeansResult kmeans(const MissingMask& mask, int k, std::uint64_t seed, int max_iter) {
    return kmeans(mask.mask, mask.n_rows, mask.n_cols, k, seed, max_iter);
}

std::vector<std::pair<int, double>> elbow(const std::vector<double>& data,
                                          std::size_t n_rows, std::size_t n_cols,
                                          const std::vector<int>& k_values,
                                          std::uint64_t seed, int restarts) {
    if (k_values.empty()) throw ConfigError("elbow: empty k list");
    for (std::size_t i = 0; i + 1 < k_values.size(); ++i) {
        if (k_values[i] >= k_values[i + 1] || k_values[i] < 1) {
            throw ConfigError("elbow: k values must be positive and ascending");
        }
    }
    if (restarts < 1) throw ConfigError("elbow: restarts must be >= 1");
    std::vector<std::pair<int, double>> out(k_values.size());
    // (k, restart) tasks are independent; restart seeds are derived by
    // counter so every k sees the same candidate seeds.
    const std::size_t total = k_values.size() * static_cast<std::size_t>(restarts);
    std::vector<double> wcss_all(total);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t t = 0; t < total; ++t) {
        const std::size_t ki = t / static_cast<std::size_t>(restarts);
        const std::size_t r = t % static_cast<std::size_t>(restarts);
        wcss_all[t] =
            kmeans(data, n_rows, n_cols, k_values[ki], Rng::derive(seed, r)).wcss;
    }
    for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
        double best = wcss_all[ki * static_cast<std::size_t>(restarts)];
        for (int r = 1; r < restarts; ++r) {
            best = std::min(best,
                            wcss_all[ki * static_cast<std::size_t>(restarts) +
                                     static_cast<std::size_t>(r)]);
        }
        out[ki] = {k_values[ki], best};
    }
    return out;
}

std::vector<std::pair<int, double>> elbow(const MissingMask& mask,
                                          const std::vector<int>& k_values,
                                          std::uint64_t seed, int restarts) {
    return elbow(mask.mask, mask.n_rows, mask.n_cols, k_values, seed, restarts);
}

int knee_by_second_difference(const std::vector<std::pair<int, double>>& curve) {
    if (curve.size() < 3) throw ValueError("knee: need at least 3 (k,wcss) points");
    int best_k = curve[1].first;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i + 1 < curve.size(); ++i) {
        const double second_diff =
            curve[i - 1].second - 2.0 * curve[i].second + curve[i + 1].second;
        if (second_diff > best) {
            best = second_diff;
            best_k = curve[i].first;
        }
    }
    return best_k;
}

std::pair<Dataset, ImputationReport> filter_and_impute(const Dataset& d,
                                                       double col_na_max,
                                                       double row_na_max) {
    if (col_na_max < 0 || col_na_max > 1 || row_na_max < 0 || row_na_max > 1) {
        throw ConfigError("filter_and_impute: thresholds must be in [0,1]");
    }
    const std::size_t n = d.n_rows();
    const std::size_t p = d.n_cols();
    ImputationReport report;
    std::vector<std::size_t> keep_cols;
    for (std::size_t j = 0; j < p; ++j) {
        std::size_t na = 0;
        for (std::size_t i = 0; i < n; ++i) na += d.is_na(i, j);
        if (n > 0 && static_cast<double>(na) / static_cast<double>(n) > col_na_max) {
            report.dropped_columns.push_back(d.columns[j].name);
        } else {
            keep_cols.push_back(j);
        }
    }
    if (keep_cols.empty()) {
        throw ValueError("filter_and_impute: every column exceeded the NA threshold");
    }
    std::vector<std::size_t> keep_rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t na = 0;
        for (std::size_t j : keep_cols) na += d.is_na(i, j);
        if (static_cast<double>(na) / static_cast<double>(keep_cols.size()) > row_na_max) {
            report.dropped_rows.push_back(d.ids[i]);
        } else {
            keep_rows.push_back(i);
        }
    }

    Dataset out;
    out.ids.reserve(keep_rows.size());
    for (std::size_t i : keep_rows) out.ids.push_back(d.ids[i]);
    if (d.labels) {
        out.labels.emplace();
        for (std::size_t i : keep_rows) out.labels->push_back((*d.labels)[i]);
    }
    for (std::size_t j : keep_cols) out.columns.push_back(d.columns[j]);
    out.values.resize(keep_rows.size() * keep_cols.size());
    for (std::size_t a = 0; a < keep_rows.size(); ++a) {
        for (std::size_t b = 0; b < keep_cols.size(); ++b) {
            out.values[a * keep_cols.size() + b] = d.at(keep_rows[a], keep_cols[b]);
        }
    }

    // Median imputation over survivors; even counts average the middle two.
    report.retained_columns.reserve(keep_cols.size());
    report.imputed_counts.assign(keep_cols.size(), 0);
    report.medians.assign(keep_cols.size(), 0.0);
    std::vector<double> buf;
    for (std::size_t b = 0; b < keep_cols.size(); ++b) {
        report.retained_columns.push_back(out.columns[b].name);
        buf.clear();
        for (std::size_t a = 0; a < keep_rows.size(); ++a) {
            const double v = out.values[a * keep_cols.size() + b];
            if (!std::isnan(v)) buf.push_back(v);
        }
        double median = 0.0;
        if (!buf.empty()) {
            std::sort(buf.begin(), buf.end());
            const std::size_t m = buf.size();
            median = (m % 2 == 1) ? buf[m / 2] : (buf[m / 2 - 1] + buf[m / 2]) / 2.0;
        }
        report.medians[b] = median;
        for (std::size_t a = 0; a < keep_rows.size(); ++a) {
            double& v = out.values[a * keep_cols.size() + b];
            if (std::isnan(v)) {
                v = median;
                report.imputed_counts[b]++;
            }
        }
    }
    return {std::move(out), std::move(report)};
}

Dataset select_cluster(const Dataset& d, const KmeansResult& r, int cluster_id) {
    if (cluster_id < 0 || cluster_id >= r.k) {
        throw ValueError("select_cluster: cluster id out of range");
    }
    if (r.assignments.size() != d.n_rows()) {
        throw ValueError("select_cluster: assignments do not match the dataset");
    }
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        if (r.assignments[i] == cluster_id) rows.push_back(i);
    }
    if (rows.empty()) {
        throw ValueError("select_cluster: cluster " + std::to_string(cluster_id) +
                         " is empty");
    }
    return d.take_rows(rows);
}

}  // namespace ff::cluster
