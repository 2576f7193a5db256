#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "failfoundry/bayes.hpp"

namespace ff::reliability {

// Weibull lifetime model with shape > 0 and a linear (not log-linked) scale
// alpha = b0 + b1 x1 + b2 x2 + b3 x3, which must stay positive for every row
// it is applied to.
struct WeibullModel {
    double shape = 1.0;
    std::array<double, 4> scale_coefficients{1.0, 0.0, 0.0, 0.0};  // b0..b3

    double scale_at(const std::array<double, 3>& x) const {
        return scale_coefficients[0] + scale_coefficients[1] * x[0] +
               scale_coefficients[2] * x[1] + scale_coefficients[3] * x[2];
    }
};

struct LifetimeData {
    std::vector<std::array<double, 3>> covariates;
    std::vector<double> lifetimes;  // strictly positive
};

// Inverse-CDF sampling: t = alpha(x) * (-ln U)^(1/shape). Errors (listing the
// offending rows) when any alpha(x) <= 0.
LifetimeData simulate(const WeibullModel& m, const std::vector<std::array<double, 3>>& covariates,
                      std::uint64_t seed);

// MCMC over (shape, b0..b3) with the Weibull log likelihood; shape moves on
// the log scale so proposals never cross zero, and states with any
// alpha(x) <= 0 are rejected outright. Parameter names: shape, b0..b3; the
// exported shape draws are on the natural scale.
bayes::PosteriorSamples fit_bayes(const LifetimeData& data,
                                  const bayes::BayesLogisticSpec& spec);

// Posterior-mean q-quantile of the lifetime at covariates x: per draw
// alpha(x) * (-ln(1-q))^(1/shape), averaged over draws with alpha(x) > 0.
// Errors when every draw is excluded.
double lifetime_predictive(const bayes::PosteriorSamples& s,
                           const std::array<double, 3>& x, double q);

double weibull_cdf(double t, double shape, double scale);

void save_lifetimes_csv(const LifetimeData& data, const std::string& path);
LifetimeData load_lifetimes_csv(const std::string& path);

}  // namespace ff::reliability
