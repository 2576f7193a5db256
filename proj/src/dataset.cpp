#include "failfoundry/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "failfoundry/csv.hpp"
#include "failfoundry/errors.hpp"
#include "failfoundry/rng.hpp"

namespace ff {

namespace {
constexpr double kNa = std::numeric_limits<double>::quiet_NaN();

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
}  // namespace

bool Dataset::is_na(std::size_t i, std::size_t j) const {
    return std::isnan(at(i, j));
}

int Dataset::find_column(const std::string& name) const {
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].name == name) return static_cast<int>(j);
    }
    return -1;
}

void Dataset::check_invariants() const {
    if (values.size() != n_rows() * n_cols()) {
        throw ValueError("dataset: values size does not match rows*cols");
    }
    std::unordered_set<std::int64_t> seen;
    for (auto id : ids) {
        if (!seen.insert(id).second) {
            throw ValueError("dataset: duplicate id " + std::to_string(id));
        }
    }
    if (labels) {
        if (labels->size() != n_rows()) {
            throw ValueError("dataset: label count does not match row count");
        }
        for (int y : *labels) {
            if (y != 0 && y != 1) {
                throw ValueError("dataset: labels must be 0 or 1");
            }
        }
    }
    std::unordered_set<std::string> names;
    for (const auto& c : columns) {
        if (!names.insert(c.name).second) {
            throw ValueError("dataset: duplicate column name " + c.name);
        }
    }
}

Dataset Dataset::take_rows(const std::vector<std::size_t>& row_indices) const {
    Dataset out;
    out.columns = columns;
    out.ids.reserve(row_indices.size());
    out.values.reserve(row_indices.size() * n_cols());
    if (labels) out.labels.emplace();
    for (std::size_t i : row_indices) {
        out.ids.push_back(ids[i]);
        for (std::size_t j = 0; j < n_cols(); ++j) out.values.push_back(at(i, j));
        if (labels) out.labels->push_back((*labels)[i]);
    }
    return out;
}

MissingMask missing_mask(const Dataset& d) {
    MissingMask m;
    m.n_rows = d.n_rows();
    m.n_cols = d.n_cols();
    m.mask.resize(m.n_rows * m.n_cols);
    for (std::size_t i = 0; i < m.n_rows; ++i) {
        for (std::size_t j = 0; j < m.n_cols; ++j) {
            m.mask[i * m.n_cols + j] = d.is_na(i, j) ? 0.0 : 1.0;
        }
    }
    return m;
}

const SchemaEntry* Schema::find(const std::string& column) const {
    for (const auto& e : entries) {
        if (e.column == column) return &e;
    }
    return nullptr;
}

Schema load_schema(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header.size() != 2 || t.header[0] != "column" || t.header[1] != "type") {
        throw ParseError("schema " + path + ": expected header \"column,type\"");
    }
    Schema s;
    bool have_id = false, have_label = false;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& tag = t.rows[i][1];
        if (tag != "id" && tag != "label" && tag != "numeric" && tag != "categorical" &&
            tag != "date") {
            throw ParseError("schema " + path + ": unknown type \"" + tag +
                             "\" for column " + t.rows[i][0]);
        }
        if (tag == "id") {
            if (have_id) throw ParseError("schema " + path + ": more than one id column");
            have_id = true;
        }
        if (tag == "label") {
            if (have_label) throw ParseError("schema " + path + ": more than one label column");
            have_label = true;
        }
        s.entries.push_back({t.rows[i][0], tag});
    }
    return s;
}

void save_schema(const Dataset& d, const std::string& path) {
    csv::Table t;
    t.header = {"column", "type"};
    t.rows.push_back({"Id", "id"});
    for (const auto& c : d.columns) {
        const char* tag = c.type == ColumnType::Numeric      ? "numeric"
                          : c.type == ColumnType::Categorical ? "categorical"
                                                              : "date";
        t.rows.push_back({c.name, tag});
    }
    if (d.labels) t.rows.push_back({"Response", "label"});
    csv::write_file(path, t);
}

Dataset load_csv(const std::string& path, const Schema& schema) {
    csv::Table t = csv::read_file(path);
    {
        std::unordered_set<std::string> names;
        for (const auto& h : t.header) {
            if (!names.insert(h).second) {
                throw ParseError(path + ": duplicate header name \"" + h + "\"");
            }
        }
    }
    int id_col = -1, label_col = -1;
    std::vector<int> feature_cols;
    Dataset d;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
        const SchemaEntry* e = schema.find(t.header[j]);
        if (!e) throw ParseError(path + ": column \"" + t.header[j] + "\" not in schema");
        if (e->tag == "id") {
            id_col = static_cast<int>(j);
        } else if (e->tag == "label") {
            label_col = static_cast<int>(j);
        } else {
            feature_cols.push_back(static_cast<int>(j));
            Column c;
            c.name = t.header[j];
            c.type = e->tag == "numeric"      ? ColumnType::Numeric
                     : e->tag == "categorical" ? ColumnType::Categorical
                                               : ColumnType::Date;
            d.columns.push_back(std::move(c));
        }
    }
    for (const auto& e : schema.entries) {
        if (t.find(e.column) < 0) {
            throw ParseError(path + ": schema column \"" + e.column + "\" missing from file");
        }
    }
    if (label_col >= 0) d.labels.emplace();
    const std::size_t n = t.rows.size();
    d.values.reserve(n * d.columns.size());
    // level string -> index, per categorical column
    std::vector<std::map<std::string, int>> level_index(d.columns.size());
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = t.rows[i];
        const std::string line = "at line " + std::to_string(i + 2);
        if (id_col >= 0) {
            d.ids.push_back(csv::parse_int(row[id_col], "in id column " + line));
        } else {
            d.ids.push_back(static_cast<std::int64_t>(i));
        }
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            const std::string& cell = row[feature_cols[f]];
            if (csv::is_missing(cell)) {
                d.values.push_back(kNa);
                continue;
            }
            Column& col = d.columns[f];
            if (col.type == ColumnType::Categorical) {
                auto [it, inserted] =
                    level_index[f].try_emplace(cell, static_cast<int>(col.levels.size()));
                if (inserted) col.levels.push_back(cell);
                d.values.push_back(static_cast<double>(it->second));
            } else {
                d.values.push_back(
                    csv::parse_double(cell, "in column " + col.name + " " + line));
            }
        }
        if (label_col >= 0) {
            long long y = csv::parse_int(row[label_col], "in label column " + line);
            if (y != 0 && y != 1) {
                throw ParseError(path + ": label must be 0 or 1 " + line);
            }
            d.labels->push_back(static_cast<int>(y));
        }
    }
    d.check_invariants();
    return d;
}

void save_csv(const Dataset& d, const std::string& path) {
    csv::Table t;
    t.header.push_back("Id");
    for (const auto& c : d.columns) t.header.push_back(c.name);
    if (d.labels) t.header.push_back("Response");
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        std::vector<std::string> row;
        row.reserve(t.header.size());
        row.push_back(std::to_string(d.ids[i]));
        for (std::size_t j = 0; j < d.n_cols(); ++j) {
            if (d.is_na(i, j)) {
                row.emplace_back();
            } else if (d.columns[j].type == ColumnType::Categorical) {
                row.push_back(d.columns[j].levels.at(static_cast<std::size_t>(d.at(i, j))));
            } else {
                row.push_back(csv::format_double(d.at(i, j)));
            }
        }
        if (d.labels) row.push_back(std::to_string((*d.labels)[i]));
        t.rows.push_back(std::move(row));
    }
    csv::write_file(path, t);
}

std::vector<double> time_on_line(const Dataset& d,
                                 const std::vector<std::string>& date_columns) {
    if (date_columns.empty()) {
        throw ConfigError("time_on_line: no date columns named");
    }
    std::vector<int> cols;
    for (const auto& name : date_columns) {
        int j = d.find_column(name);
        if (j < 0) throw ConfigError("time_on_line: no such column " + name);
        if (d.columns[j].type != ColumnType::Date) {
            throw ConfigError("time_on_line: column " + name + " is not Date-tagged");
        }
        cols.push_back(j);
    }
    std::vector<double> out(d.n_rows(), kNa);
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        double lo = 0, hi = 0;
        bool any = false;
        for (int j : cols) {
            if (d.is_na(i, j)) continue;
            double v = d.at(i, j);
            if (!any) {
                lo = hi = v;
                any = true;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        if (any) out[i] = hi - lo;
    }
    return out;
}

Dataset add_time_on_line(const Dataset& d, const std::vector<std::string>& date_columns,
                         const std::string& name) {
    std::vector<double> col = time_on_line(d, date_columns);
    Dataset out;
    out.ids = d.ids;
    out.labels = d.labels;
    out.columns = d.columns;
    out.columns.push_back({name, ColumnType::Numeric, {}});
    const std::size_t p = d.n_cols();
    out.values.reserve(d.n_rows() * (p + 1));
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        for (std::size_t j = 0; j < p; ++j) out.values.push_back(d.at(i, j));
        out.values.push_back(col[i]);
    }
    return out;
}

std::vector<std::string> categorical_column_names(const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& c : d.columns) {
        if (c.type == ColumnType::Categorical) out.push_back(c.name);
    }
    return out;
}

std::vector<std::string> date_column_names(const Dataset& d) {
    std::vector<std::string> out;
    for (const auto& c : d.columns) {
        if (c.type == ColumnType::Date) out.push_back(c.name);
    }
    return out;
}

Dataset one_hot(const Dataset& d, const std::vector<std::string>& cat_columns) {
    std::set<int> targets;
    for (const auto& name : cat_columns) {
        int j = d.find_column(name);
        if (j < 0) throw ConfigError("one_hot: no such column " + name);
        if (d.columns[j].type != ColumnType::Categorical) {
            throw ConfigError("one_hot: column " + name + " is not Categorical");
        }
        targets.insert(j);
    }
    // Output column layout: indicators take the place of their source column,
    // ordered lexicographically by level string.
    struct OutCol {
        int src;         // source column index
        int level = -1;  // -1 = passthrough
        std::string name;
    };
    std::vector<OutCol> layout;
    for (std::size_t j = 0; j < d.n_cols(); ++j) {
        if (!targets.count(static_cast<int>(j))) {
            layout.push_back({static_cast<int>(j), -1, d.columns[j].name});
            continue;
        }
        std::vector<std::pair<std::string, int>> levels;
        for (std::size_t l = 0; l < d.columns[j].levels.size(); ++l) {
            levels.emplace_back(d.columns[j].levels[l], static_cast<int>(l));
        }
        std::sort(levels.begin(), levels.end());
        for (const auto& [name, idx] : levels) {
            layout.push_back({static_cast<int>(j), idx, d.columns[j].name + "=" + name});
        }
    }
    Dataset out;
    out.ids = d.ids;
    out.labels = d.labels;
    for (const auto& oc : layout) {
        if (oc.level < 0) {
            out.columns.push_back(d.columns[oc.src]);
        } else {
            out.columns.push_back({oc.name, ColumnType::Numeric, {}});
        }
    }
    out.values.reserve(d.n_rows() * layout.size());
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        for (const auto& oc : layout) {
            if (oc.level < 0) {
                out.values.push_back(d.at(i, oc.src));
            } else if (d.is_na(i, oc.src)) {
                out.values.push_back(0.0);
            } else {
                out.values.push_back(d.at(i, oc.src) == oc.level ? 1.0 : 0.0);
            }
        }
    }
    return out;
}

Dataset undersample(const Dataset& d, double ratio, std::uint64_t seed) {
    if (!d.labels) throw ValueError("undersample: dataset has no labels");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < d.n_rows(); ++i) {
        ((*d.labels)[i] == 1 ? pos : neg).push_back(i);
    }
    if (pos.empty()) throw ValueError("undersample: no positive samples, ratio undefined");
    std::size_t want = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(pos.size())));
    want = std::min(want, neg.size());
    // Partial Fisher-Yates: the first `want` entries are the sample.
    Rng rng(seed);
    for (std::size_t i = 0; i < want; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(neg.size() - i));
        std::swap(neg[i], neg[j]);
    }
    neg.resize(want);
    std::vector<std::size_t> keep = pos;
    keep.insert(keep.end(), neg.begin(), neg.end());
    std::sort(keep.begin(), keep.end());
    return d.take_rows(keep);
}

std::pair<Dataset, Dataset> train_validation_split(const Dataset& d, const SplitSpec& spec) {
    if (!(spec.validation_fraction > 0.0 && spec.validation_fraction < 1.0)) {
        throw ConfigError("split: validation_fraction must be in (0,1)");
    }
    std::vector<std::size_t> order(d.n_rows());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(spec.seed);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(order.size() - i));
        std::swap(order[i], order[j]);
    }
    std::vector<std::size_t> train_idx, valid_idx;
    if (d.labels) {
        // Stratify so both parts keep both classes when possible.
        std::vector<std::size_t> pos, neg;
        for (std::size_t i : order) ((*d.labels)[i] == 1 ? pos : neg).push_back(i);
        auto deal = [&](const std::vector<std::size_t>& group) {
            std::size_t n_valid =
                static_cast<std::size_t>(std::round(spec.validation_fraction *
                                                    static_cast<double>(group.size())));
            for (std::size_t i = 0; i < group.size(); ++i) {
                (i < n_valid ? valid_idx : train_idx).push_back(group[i]);
            }
        };
        deal(pos);
        deal(neg);
    } else {
        std::size_t n_valid = static_cast<std::size_t>(
            std::round(spec.validation_fraction * static_cast<double>(order.size())));
        for (std::size_t i = 0; i < order.size(); ++i) {
            (i < n_valid ? valid_idx : train_idx).push_back(order[i]);
        }
    }
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());
    return {d.take_rows(train_idx), d.take_rows(valid_idx)};
}

Dataset make_synthetic(const SyntheticSpec& spec) {
    if (!(spec.positive_rate > 0.0 && spec.positive_rate < 1.0)) {
        throw ConfigError("make_synthetic: positive_rate must be in (0,1)");
    }
    if (spec.coefficients.size() > spec.n_features) {
        throw ConfigError("make_synthetic: more planted coefficients than features");
    }
    if (spec.n_part_types < 1) {
        throw ConfigError("make_synthetic: n_part_types must be >= 1");
    }
    const std::size_t n = spec.n_rows;
    const std::size_t p = spec.n_features;
    Dataset d;
    d.ids.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.ids[i] = static_cast<std::int64_t>(i);
    d.columns.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        d.columns.push_back({"f" + std::to_string(j), ColumnType::Numeric, {}});
    }
    d.values.resize(n * p);
    d.labels.emplace(n, 0);

    const double b0 = logit(spec.positive_rate);
    Rng rng(spec.seed);
    std::vector<std::size_t> part_type(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (spec.n_part_types > 1) {
            part_type[i] = static_cast<std::size_t>(rng.uniform_below(spec.n_part_types));
        }
        double eta = b0;
        for (std::size_t j = 0; j < p; ++j) {
            double x = rng.normal();
            d.values[i * p + j] = x;
            if (j < spec.coefficients.size()) eta += spec.coefficients[j] * x;
        }
        (*d.labels)[i] = rng.uniform01() < sigmoid(eta) ? 1 : 0;
    }
    // Masking happens after label generation: the label reflects the part,
    // the mask reflects which measurements its line records.
    if (spec.n_part_types > 1 || spec.mask_noise > 0.0) {
        const std::size_t block = (p + spec.n_part_types - 1) / spec.n_part_types;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t lo = part_type[i] * block;
            const std::size_t hi = std::min(p, lo + block);
            for (std::size_t j = 0; j < p; ++j) {
                bool present = (j >= lo && j < hi);
                if (spec.mask_noise > 0.0 && rng.uniform01() < spec.mask_noise) {
                    present = !present;
                }
                if (!present) d.values[i * p + j] = kNa;
            }
        }
    }
    return d;
}

}  // namespace ff
