#include "failfoundry/bayes.hpp"

#include <algorithm>
#include <cmath>

#include "failfoundry/csv.hpp"
#include "failfoundry/errors.hpp"

namespace ff::bayes {

namespace {

// log(1 + e^x) without overflow.
double log1pexp(double x) {
    if (x > 35.0) return x;
    if (x < -35.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

// Type-7 quantile (linear interpolation) on sorted data.
double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted[n - 1];
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace

double prior_sd(const BayesLogisticSpec& spec) {
    if (!(spec.prior_precision > 0.0)) {
        throw ConfigError("bayes: prior precision must be positive");
    }
    return 1.0 / std::sqrt(spec.prior_precision);
}

int PosteriorSamples::param_index(const std::string& name) const {
    for (std::size_t j = 0; j < names.size(); ++j) {
        if (names[j] == name) return static_cast<int>(j);
    }
    return -1;
}

std::vector<double> PosteriorSamples::pooled(std::size_t param) const {
    std::vector<double> out;
    out.reserve(n_chains() * n_draws);
    for (std::size_t c = 0; c < n_chains(); ++c) {
        for (std::size_t d = 0; d < n_draws; ++d) out.push_back(draw(c, d, param));
    }
    return out;
}

const ParamSummary& PosteriorSummary::operator[](const std::string& name) const {
    for (const auto& p : params) {
        if (p.name == name) return p;
    }
    throw ValueError("summary: unknown parameter " + name);
}

PosteriorSamples from_chains(const std::vector<mcmc::ChainResult>& chains,
                             std::vector<std::string> names) {
    PosteriorSamples s;
    s.names = std::move(names);
    s.n_params = s.names.size();
    s.n_draws = chains.empty() ? 0 : chains[0].draws.size() / s.n_params;
    std::vector<std::int64_t> acc(s.n_params, 0), prop(s.n_params, 0);
    for (const auto& c : chains) {
        s.chains.push_back(c.draws);
        for (std::size_t j = 0; j < s.n_params; ++j) {
            acc[j] += c.accepted[j];
            prop[j] += c.proposed[j];
        }
    }
    s.acceptance_rates.resize(s.n_params);
    for (std::size_t j = 0; j < s.n_params; ++j) {
        s.acceptance_rates[j] =
            prop[j] > 0 ? static_cast<double>(acc[j]) / static_cast<double>(prop[j]) : 0.0;
    }
    return s;
}

PosteriorSamples sample(const Dataset& d, const BayesLogisticSpec& spec) {
    if (!d.labels && d.n_rows() > 0) throw ValueError("bayes: dataset has no labels");
    const std::size_t n = d.n_rows();
    const std::size_t p = d.n_cols();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (d.is_na(i, j)) throw ValueError("bayes: NA in features, impute first");
        }
    }
    const double sd = prior_sd(spec);
    const double mean = spec.prior_mean;
    const std::vector<double>& x = d.values;
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<double>((*d.labels)[i]);

    mcmc::LogDensity target = [&x, &y, n, p, mean, sd](std::span<const double> theta) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double eta = theta[0];
            const double* row = &x[i * p];
            for (std::size_t j = 0; j < p; ++j) eta += theta[j + 1] * row[j];
            ll += y[i] * eta - log1pexp(eta);
        }
        for (std::size_t j = 0; j < p + 1; ++j) {
            const double z = (theta[j] - mean) / sd;
            ll -= 0.5 * z * z;
        }
        return ll;
    };

    mcmc::Options opts;
    opts.n_chains = spec.n_chains;
    opts.n_burnin = spec.n_burnin;
    opts.n_samples = spec.n_samples;
    opts.thin = spec.thin;
    opts.seed = spec.seed;
    // Flat priors leave the posterior as wide as the prior when there is no
    // data; start the proposal near that scale so adaptation has less to do.
    opts.init_scale = n == 0 ? sd : 1.0;

    std::vector<std::string> names;
    names.push_back("b0");
    for (std::size_t j = 0; j < p; ++j) names.push_back("b" + std::to_string(j + 1));
    return from_chains(mcmc::run_chains(target, p + 1, opts), std::move(names));
}

PosteriorSummary summarize(const PosteriorSamples& s) {
    if (s.n_chains() == 0 || s.n_draws * s.n_chains() < 2) {
        throw ValueError("summarize: need at least 2 draws");
    }
    PosteriorSummary out;
    for (std::size_t j = 0; j < s.n_params; ++j) {
        ParamSummary ps;
        ps.name = s.names[j];
        std::vector<double> pooled = s.pooled(j);
        const double n = static_cast<double>(pooled.size());
        double mean = 0.0;
        for (double v : pooled) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : pooled) var += (v - mean) * (v - mean);
        var /= (n - 1.0);
        ps.mean = mean;
        ps.sd = std::sqrt(var);
        std::sort(pooled.begin(), pooled.end());
        ps.q2_5 = quantile_sorted(pooled, 0.025);
        ps.q25 = quantile_sorted(pooled, 0.25);
        ps.q50 = quantile_sorted(pooled, 0.50);
        ps.q75 = quantile_sorted(pooled, 0.75);
        ps.q97_5 = quantile_sorted(pooled, 0.975);

        // Split-chain potential scale reduction: halve every chain, compare
        // between- and within-half variances.
        std::vector<std::pair<double, double>> half_stats;  // (mean, var)
        const std::size_t half = s.n_draws / 2;
        if (half >= 2) {
            for (std::size_t c = 0; c < s.n_chains(); ++c) {
                for (int part = 0; part < 2; ++part) {
                    const std::size_t lo = part == 0 ? 0 : half;
                    const std::size_t hi = part == 0 ? half : 2 * half;
                    double m = 0.0;
                    for (std::size_t i = lo; i < hi; ++i) m += s.draw(c, i, j);
                    m /= static_cast<double>(hi - lo);
                    double v = 0.0;
                    for (std::size_t i = lo; i < hi; ++i) {
                        v += (s.draw(c, i, j) - m) * (s.draw(c, i, j) - m);
                    }
                    v /= static_cast<double>(hi - lo - 1);
                    half_stats.emplace_back(m, v);
                }
            }
        }
        if (half_stats.size() >= 2) {
            const double m_chains = static_cast<double>(half_stats.size());
            const double len = static_cast<double>(half);
            double grand = 0.0;
            for (const auto& [m, v] : half_stats) grand += m;
            grand /= m_chains;
            double b = 0.0, w = 0.0;
            for (const auto& [m, v] : half_stats) {
                b += (m - grand) * (m - grand);
                w += v;
            }
            b *= len / (m_chains - 1.0);
            w /= m_chains;
            if (w <= 0.0) {
                ps.rhat = 1.0;  // constant chains: diagnostic undefined
            } else {
                const double var_plus = (len - 1.0) / len * w + b / len;
                ps.rhat = std::sqrt(var_plus / w);
            }
        }
        out.params.push_back(std::move(ps));
    }
    return out;
}

std::vector<TracePoint> trace_export(const PosteriorSamples& s, const std::string& param) {
    const int j = s.param_index(param);
    if (j < 0) throw ValueError("trace_export: unknown parameter " + param);
    std::vector<TracePoint> out;
    out.reserve(s.n_chains() * s.n_draws);
    for (std::size_t c = 0; c < s.n_chains(); ++c) {
        for (std::size_t i = 0; i < s.n_draws; ++i) {
            out.push_back({static_cast<int>(c), static_cast<int>(i),
                           s.draw(c, i, static_cast<std::size_t>(j))});
        }
    }
    return out;
}

void export_draws_csv(const PosteriorSamples& s, const std::string& path) {
    csv::Table t;
    t.header = {"chain", "iteration", "parameter", "value"};
    for (std::size_t c = 0; c < s.n_chains(); ++c) {
        for (std::size_t i = 0; i < s.n_draws; ++i) {
            for (std::size_t j = 0; j < s.n_params; ++j) {
                t.rows.push_back({std::to_string(c), std::to_string(i), s.names[j],
                                  csv::format_double(s.draw(c, i, j))});
            }
        }
    }
    csv::write_file(path, t);
}

PosteriorSamples load_draws_csv(const std::string& path) {
    csv::Table t = csv::read_file(path);
    if (t.header != std::vector<std::string>{"chain", "iteration", "parameter", "value"}) {
        throw ParseError("draws csv " + path + ": unexpected header");
    }
    PosteriorSamples s;
    std::size_t max_chain = 0, max_iter = 0;
    for (const auto& row : t.rows) {
        max_chain = std::max(max_chain, static_cast<std::size_t>(
                                            csv::parse_int(row[0], "in chain column")));
        max_iter = std::max(max_iter, static_cast<std::size_t>(
                                          csv::parse_int(row[1], "in iteration column")));
        if (s.param_index(row[2]) < 0) s.names.push_back(row[2]);
    }
    s.n_params = s.names.size();
    s.n_draws = max_iter + 1;
    s.chains.assign(max_chain + 1,
                    std::vector<double>(s.n_draws * s.n_params, 0.0));
    for (const auto& row : t.rows) {
        const auto c = static_cast<std::size_t>(csv::parse_int(row[0], "chain"));
        const auto i = static_cast<std::size_t>(csv::parse_int(row[1], "iteration"));
        const auto j = static_cast<std::size_t>(s.param_index(row[2]));
        s.chains[c][i * s.n_params + j] = csv::parse_double(row[3], "value");
    }
    s.acceptance_rates.assign(s.n_params, 0.0);
    return s;
}

double mc_standard_error(const PosteriorSamples& s, std::size_t param) {
    // Batch means within each chain; batches of sqrt(n) draws.
    std::vector<double> batch_means;
    const auto batch = static_cast<std::size_t>(
        std::max(2.0, std::floor(std::sqrt(static_cast<double>(s.n_draws)))));
    for (std::size_t c = 0; c < s.n_chains(); ++c) {
        for (std::size_t start = 0; start + batch <= s.n_draws; start += batch) {
            double m = 0.0;
            for (std::size_t i = start; i < start + batch; ++i) m += s.draw(c, i, param);
            batch_means.push_back(m / static_cast<double>(batch));
        }
    }
    if (batch_means.size() < 2) throw ValueError("mc_standard_error: too few draws");
    double grand = 0.0;
    for (double v : batch_means) grand += v;
    grand /= static_cast<double>(batch_means.size());
    double var = 0.0;
    for (double v : batch_means) var += (v - grand) * (v - grand);
    var /= static_cast<double>(batch_means.size() - 1);
    return std::sqrt(var / static_cast<double>(batch_means.size()));
}

}  // namespace ff::bayes
