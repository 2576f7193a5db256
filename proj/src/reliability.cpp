#include "failfoundry/reliability.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "failfoundry/csv.hpp"
#include "failfoundry/errors.hpp"
#include "failfoundry/rng.hpp"

namespace ff::reliability {

namespace {

void check_scales(const WeibullModel& m,
                  const std::vector<std::array<double, 3>>& covariates) {
    std::string bad;
    int n_bad = 0;
    for (std::size_t i = 0; i < covariates.size(); ++i) {
        if (m.scale_at(covariates[i]) <= 0.0) {
            ++n_bad;
            if (n_bad <= 5) bad += (bad.empty() ? "" : ", ") + std::to_string(i);
        }
    }
    if (n_bad > 0) {
        throw ValueError("weibull: scale alpha(x) <= 0 for " + std::to_string(n_bad) +
                         " rows (first: " + bad + ")");
    }
}

}  // namespace

LifetimeData simulate(const WeibullModel& m,
                      const std::vector<std::array<double, 3>>& covariates,
                      std::uint64_t seed) {
    if (!(m.shape > 0.0)) throw ConfigError("weibull: shape must be positive");
    check_scales(m, covariates);
    LifetimeData data;
    data.covariates = covariates;
    data.lifetimes.resize(covariates.size());
    const double inv_shape = 1.0 / m.shape;
    Rng rng(seed);
    for (std::size_t i = 0; i < covariates.size(); ++i) {
        const double u = rng.uniform_open();
        data.lifetimes[i] = m.scale_at(covariates[i]) * std::pow(-std::log(u), inv_shape);
    }
    return data;
}

bayes::PosteriorSamples fit_bayes(const LifetimeData& data,
                                  const bayes::BayesLogisticSpec& spec) {
    const std::size_t n = data.lifetimes.size();
    if (data.covariates.size() != n) {
        throw ValueError("weibull fit: covariate/lifetime count mismatch");
    }
    for (double t : data.lifetimes) {
        if (!(t > 0.0)) throw ValueError("weibull fit: lifetimes must be positive");
    }
    const double sd = bayes::prior_sd(spec);
    const double mean = spec.prior_mean;
    std::vector<double> log_t(n);
    for (std::size_t i = 0; i < n; ++i) log_t[i] = std::log(data.lifetimes[i]);

    // theta = (ln shape, b0, b1, b2, b3)
    const auto& cov = data.covariates;
    const auto& t = data.lifetimes;
    mcmc::LogDensity target = [&cov, &t, &log_t, n, mean, sd](
                                  std::span<const double> theta) {
        const double log_shape = theta[0];
        const double shape = std::exp(log_shape);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double alpha = theta[1] + theta[2] * cov[i][0] +
                                 theta[3] * cov[i][1] + theta[4] * cov[i][2];
            if (alpha <= 0.0) return -std::numeric_limits<double>::infinity();
            const double log_alpha = std::log(alpha);
            ll += log_shape - log_alpha + (shape - 1.0) * (log_t[i] - log_alpha) -
                  std::pow(t[i] / alpha, shape);
        }
        // Normal priors on ln(shape) and on each b.
        for (std::size_t j = 0; j < 5; ++j) {
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
    opts.init.assign(5, 0.0);
    if (n > 0) {
        // b0 at the mean lifetime keeps alpha positive at the start.
        double mean_t = 0.0;
        for (double v : t) mean_t += v;
        opts.init[1] = mean_t / static_cast<double>(n);
        opts.init_jitter = 0.01 * opts.init[1];
    } else {
        opts.init[1] = 1.0;  // prior-only run still needs alpha > 0 at init
        opts.init_jitter = 0.01;
    }

    auto chains = mcmc::run_chains(target, 5, opts);
    // Report shape on the natural scale.
    for (auto& c : chains) {
        for (std::size_t d = 0; d < c.draws.size(); d += 5) {
            c.draws[d] = std::exp(c.draws[d]);
        }
    }
    return bayes::from_chains(chains, {"shape", "b0", "b1", "b2", "b3"});
}

double lifetime_predictive(const bayes::PosteriorSamples& s,
                           const std::array<double, 3>& x, double q) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("lifetime quantile: q must be in (0,1)");
    const int shape_ix = s.param_index("shape");
    const int b0_ix = s.param_index("b0");
    if (shape_ix < 0 || b0_ix < 0 || s.n_params < 5) {
        throw ValueError("lifetime quantile: samples do not look like a weibull fit");
    }
    const double base = -std::log1p(-q);
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t c = 0; c < s.n_chains(); ++c) {
        for (std::size_t i = 0; i < s.n_draws; ++i) {
            const double shape = s.draw(c, i, static_cast<std::size_t>(shape_ix));
            const double alpha =
                s.draw(c, i, static_cast<std::size_t>(b0_ix)) +
                s.draw(c, i, static_cast<std::size_t>(b0_ix) + 1) * x[0] +
                s.draw(c, i, static_cast<std::size_t>(b0_ix) + 2) * x[1] +
                s.draw(c, i, static_cast<std::size_t>(b0_ix) + 3) * x[2];
            if (alpha <= 0.0 || !(shape > 0.0)) continue;
            acc += alpha * std::pow(base, 1.0 / shape);
            ++used;
        }
    }
    if (used == 0) {
        throw ValueError("lifetime quantile: alpha(x) <= 0 for every posterior draw");
    }
    return acc / static_cast<double>(used);
}

double weibull_cdf(double t, double shape, double scale) {
    if (t <= 0.0) return 0.0;
    return -std::expm1(-std::pow(t / scale, shape));
}

void save_lifetimes_csv(const LifetimeData& data, const std::string& path) {
    csv::Table tab;
    tab.header = {"x1", "x2", "x3", "lifetime"};
    for (std::size_t i = 0; i < data.lifetimes.size(); ++i) {
        tab.rows.push_back({csv::format_double(data.covariates[i][0]),
                            csv::format_double(data.covariates[i][1]),
                            csv::format_double(data.covariates[i][2]),
                            csv::format_double(data.lifetimes[i])});
    }
    csv::write_file(path, tab);
}

LifetimeData load_lifetimes_csv(const std::string& path) {
    csv::Table tab = csv::read_file(path);
    if (tab.header != std::vector<std::string>{"x1", "x2", "x3", "lifetime"}) {
        throw ParseError("lifetimes csv " + path + ": expected header x1,x2,x3,lifetime");
    }
    LifetimeData data;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
        const auto& row = tab.rows[i];
        const std::string where = "at line " + std::to_string(i + 2);
        data.covariates.push_back({csv::parse_double(row[0], where),
                                   csv::parse_double(row[1], where),
                                   csv::parse_double(row[2], where)});
        data.lifetimes.push_back(csv::parse_double(row[3], where));
    }
    return data;
}

}  // namespace ff::reliability
