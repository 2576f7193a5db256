#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "failfoundry/dataset.hpp"

namespace ff::cluster {

struct KmeansResult {
    int k = 0;
    std::size_t n_cols = 0;
    std::vector<double> centroids;  // k x n_cols, row-major
    std::vector<int> assignments;   // per row
    double wcss = 0.0;
    int iterations = 0;
    // Objective after each assignment step; non-increasing by construction.
    std::vector<double> wcss_history;
};

// Lloyd's algorithm with k-means++ seeding on an arbitrary numeric matrix
// (the missingness mask, in this pipeline). Stops when assignments are
// stable or max_iter is reached. Ties in distance go to the lowest centroid
// index; an emptied cluster is re-seeded at the point farthest from its own
// centroid. Deterministic for a fixed seed regardless of thread count.
KmeansResult kmeans(const std::vector<double>& data, std::size_t n_rows,
                    std::size_t n_cols, int k, std::uint64_t seed, int max_iter = 100);
KmeansResult kmeans(const MissingMask& mask, int k, std::uint64_t seed,
                    int max_iter = 100);

// Best-of-`restarts` WCSS per k; restart seeds are shared across k values.
std::vector<std::pair<int, double>> elbow(const std::vector<double>& data,
                                          std::size_t n_rows, std::size_t n_cols,
                                          const std::vector<int>& k_values,
                                          std::uint64_t seed, int restarts = 5);
std::vector<std::pair<int, double>> elbow(const MissingMask& mask,
                                          const std::vector<int>& k_values,
                                          std::uint64_t seed, int restarts = 5);

// k at the maximum second difference of the WCSS curve (interior points).
int knee_by_second_difference(const std::vector<std::pair<int, double>>& curve);

struct ImputationReport {
    std::vector<std::string> dropped_columns;
    std::vector<std::int64_t> dropped_rows;  // by id
    std::vector<std::string> retained_columns;
    std::vector<int> imputed_counts;  // per retained column
    std::vector<double> medians;      // per retained column
};

// Drops columns with NA fraction > col_na_max, then rows with NA fraction
// (over surviving columns) > row_na_max, then imputes the per-column median.
// The order (columns before rows) is fixed and observable in the report.
std::pair<Dataset, ImputationReport> filter_and_impute(const Dataset& d,
                                                       double col_na_max,
                                                       double row_na_max);

// Rows of one cluster, as a Dataset.
Dataset select_cluster(const Dataset& d, const KmeansResult& r, int cluster_id);

}  // namespace ff::cluster
