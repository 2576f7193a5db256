#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ff::mcmc {

// Joint log density up to a constant; -inf rejects the proposal outright
// (used for hard support constraints).
using LogDensity = std::function<double(std::span<const double>)>;

struct Options {
    int n_chains = 4;
    int n_burnin = 1000;
    int n_samples = 5000;
    int thin = 1;
    std::uint64_t seed = 0;
    double target_accept = 0.44;  // componentwise random-walk optimum
    int adapt_interval = 50;      // Robbins-Monro batch size, burn-in only
    double init_scale = 1.0;
    std::vector<double> init;     // defaults to zeros
    double init_jitter = 0.1;     // per-chain spread around init
};

struct ChainResult {
    // draws[d * dim + j], post-thinning
    std::vector<double> draws;
    std::vector<std::int64_t> accepted;  // per component, sampling phase only
    std::vector<std::int64_t> proposed;
    std::vector<double> final_scales;
};

// Component-wise random-walk Metropolis within a Gibbs sweep. Proposal
// scales adapt during burn-in (Robbins-Monro on the log scale, every
// adapt_interval iterations) and freeze afterwards, so the kept draws target
// the exact stationary distribution.
ChainResult run_chain(const LogDensity& target, std::size_t dim, const Options& opts,
                      int chain_index);

// All chains; independent seeds derived per chain, run in parallel.
std::vector<ChainResult> run_chains(const LogDensity& target, std::size_t dim,
                                    const Options& opts);

}  // namespace ff::mcmc
