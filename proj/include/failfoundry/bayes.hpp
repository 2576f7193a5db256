#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "failfoundry/dataset.hpp"
#include "failfoundry/mcmc.hpp"

namespace ff::bayes {

// Independent normal priors on every coefficient, stated BUGS-style as
// (mean, precision) and converted to sd exactly once, here.
struct BayesLogisticSpec {
    double prior_mean = 0.0;
    double prior_precision = 1e-4;  // sd 100
    int n_chains = 4;
    int n_burnin = 1000;
    int n_samples = 5000;
    int thin = 1;
    std::uint64_t seed = 0;
};

double prior_sd(const BayesLogisticSpec& spec);

struct PosteriorSamples {
    std::vector<std::string> names;           // b0, b1, ...
    std::size_t n_params = 0;
    std::size_t n_draws = 0;                  // per chain
    std::vector<std::vector<double>> chains;  // chains[c][draw * n_params + j]
    std::vector<double> acceptance_rates;     // per parameter, pooled over chains

    std::size_t n_chains() const { return chains.size(); }
    double draw(std::size_t chain, std::size_t iter, std::size_t param) const {
        return chains[chain][iter * n_params + param];
    }
    int param_index(const std::string& name) const;
    // All chains concatenated for one parameter.
    std::vector<double> pooled(std::size_t param) const;
};

struct ParamSummary {
    std::string name;
    double mean = 0.0;
    double sd = 0.0;
    double q2_5 = 0.0, q25 = 0.0, q50 = 0.0, q75 = 0.0, q97_5 = 0.0;
    double rhat = 1.0;  // split-chain potential scale reduction
};

struct PosteriorSummary {
    std::vector<ParamSummary> params;
    const ParamSummary& operator[](const std::string& name) const;
};

// Bayesian logistic regression: y ~ Bernoulli(logistic(b0 + b.x)), normal
// priors on b0 and every b_j. Sampled with the adaptive component-wise
// random-walk engine in mcmc.hpp; chains start at zero plus per-chain jitter.
PosteriorSamples sample(const Dataset& d, const BayesLogisticSpec& spec);

// Pooled-chain moments and type-7 quantiles; rhat is the split-chain
// diagnostic and reports 1.0 for constant chains.
PosteriorSummary summarize(const PosteriorSamples& s);

struct TracePoint {
    int chain = 0;
    int iteration = 0;
    double value = 0.0;
};
// Ordered draws for one parameter, chain by chain.
std::vector<TracePoint> trace_export(const PosteriorSamples& s, const std::string& param);

// Long-format CSV: chain, iteration, parameter, value.
void export_draws_csv(const PosteriorSamples& s, const std::string& path);
PosteriorSamples load_draws_csv(const std::string& path);

// Batch-means Monte Carlo standard error of a pooled posterior mean.
double mc_standard_error(const PosteriorSamples& s, std::size_t param);

// Shared by tests and the reliability module: package raw engine output.
PosteriorSamples from_chains(const std::vector<mcmc::ChainResult>& chains,
                             std::vector<std::string> names);

}  // namespace ff::bayes
