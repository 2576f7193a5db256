#include "failfoundry/mcmc.hpp"

#include <cmath>
#include <stdexcept>

#include "failfoundry/errors.hpp"
#include "failfoundry/rng.hpp"

namespace ff::mcmc {

ChainResult run_chain(const LogDensity& target, std::size_t dim, const Options& opts,
                      int chain_index) {
    if (dim == 0) throw ConfigError("mcmc: dimension must be positive");
    if (opts.n_samples < 1) throw ConfigError("mcmc: n_samples must be >= 1");
    if (opts.thin < 1) throw ConfigError("mcmc: thin must be >= 1");

    Rng rng(Rng::derive(opts.seed, static_cast<std::uint64_t>(chain_index)));
    std::vector<double> state(dim, 0.0);
    if (!opts.init.empty()) {
        if (opts.init.size() != dim) throw ConfigError("mcmc: init size mismatch");
        state = opts.init;
    }
    if (chain_index > 0 && opts.init_jitter > 0.0) {
        for (double& v : state) v += opts.init_jitter * rng.normal();
    }
    double logp = target(state);
    if (!std::isfinite(logp)) {
        throw ValueError("mcmc: log density not finite at the initial state");
    }

    std::vector<double> log_scale(dim, std::log(opts.init_scale));
    std::vector<std::int64_t> batch_acc(dim, 0);
    ChainResult res;
    res.accepted.assign(dim, 0);
    res.proposed.assign(dim, 0);
    res.draws.reserve(static_cast<std::size_t>(opts.n_samples) * dim);

    const std::int64_t total =
        static_cast<std::int64_t>(opts.n_burnin) +
        static_cast<std::int64_t>(opts.n_samples) * opts.thin;
    int adapt_batch = 0;
    for (std::int64_t iter = 0; iter < total; ++iter) {
        const bool burnin = iter < opts.n_burnin;
        for (std::size_t j = 0; j < dim; ++j) {
            const double old = state[j];
            state[j] = old + std::exp(log_scale[j]) * rng.normal();
            const double cand = target(state);
            const double log_u = std::log(rng.uniform_open());
            if (cand - logp > log_u) {
                logp = cand;
                if (burnin) {
                    batch_acc[j]++;
                } else {
                    res.accepted[j]++;
                }
            } else {
                state[j] = old;
            }
            if (!burnin) res.proposed[j]++;
        }
        if (burnin && (iter + 1) % opts.adapt_interval == 0) {
            ++adapt_batch;
            const double step = 1.0 / std::sqrt(static_cast<double>(adapt_batch));
            for (std::size_t j = 0; j < dim; ++j) {
                const double rate = static_cast<double>(batch_acc[j]) /
                                    static_cast<double>(opts.adapt_interval);
                log_scale[j] += step * (rate - opts.target_accept);
                batch_acc[j] = 0;
            }
        }
        if (!burnin) {
            const std::int64_t k = iter - opts.n_burnin;
            if ((k + 1) % opts.thin == 0) {
                res.draws.insert(res.draws.end(), state.begin(), state.end());
            }
        }
    }
    res.final_scales.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) res.final_scales[j] = std::exp(log_scale[j]);
    return res;
}

std::vector<ChainResult> run_chains(const LogDensity& target, std::size_t dim,
                                    const Options& opts) {
    if (opts.n_chains < 1) throw ConfigError("mcmc: n_chains must be >= 1");
    std::vector<ChainResult> out(static_cast<std::size_t>(opts.n_chains));
    std::vector<std::string> errors(static_cast<std::size_t>(opts.n_chains));
#pragma omp parallel for schedule(dynamic)
    for (int c = 0; c < opts.n_chains; ++c) {
        try {
            out[static_cast<std::size_t>(c)] = run_chain(target, dim, opts, c);
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(c)] = e.what();
        }
    }
    for (const auto& msg : errors) {
        if (!msg.empty()) throw ValueError("mcmc: " + msg);
    }
    return out;
}

}  // namespace ff::mcmc
