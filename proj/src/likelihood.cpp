#include "bison/likelihood.hpp"

#include <cmath>
#include <stdexcept>

namespace bison {

double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

std::vector<double> estimate_size_factors(const CountMatrix& Y) {
    std::vector<double> s(Y.spots(), 0.0);
    const double total = static_cast<double>(Y.total());
    for (std::size_t j = 0; j < Y.genes(); ++j) {
        const auto row = Y.row(j);
        for (std::size_t i = 0; i < Y.spots(); ++i) s[i] += static_cast<double>(row[i]);
    }
    for (double& v : s) v /= total;
    return s;
}

std::vector<double> estimate_gene_effects(const CountMatrix& Y) {
    std::vector<double> g(Y.genes(), 0.0);
    for (std::size_t j = 0; j < Y.genes(); ++j) {
        Count sum = 0;
        for (Count v : Y.row(j)) sum += v;
        g[j] = static_cast<double>(sum);
    }
    return g;
}

ScalingFactors estimate_scaling_factors(const CountMatrix& Y) {
    return {estimate_size_factors(Y), estimate_gene_effects(Y)};
}

double log_block_marginal(Count count_sum, double exposure_sum, GammaPrior prior,
                          double logconst) {
    if (count_sum < 0 || !(exposure_sum >= 0.0) || !std::isfinite(exposure_sum) ||
        !std::isfinite(logconst) || !(prior.shape > 0.0) || !(prior.rate > 0.0))
        throw std::invalid_argument("log_block_marginal: invalid arguments");
    const double a = prior.shape, b = prior.rate;
    const double y = static_cast<double>(count_sum);
    return a * std::log(b) - log_gamma(a) + log_gamma(a + y) - (a + y) * std::log(b + exposure_sum) +
           logconst;
}

double log_block_gain(Count count_sum, double exposure_sum, Count dy, double ds, GammaPrior prior) {
    const double a = prior.shape + static_cast<double>(count_sum);
    const double b = prior.rate + exposure_sum;
    const double y = static_cast<double>(dy);
    return log_gamma(a + y) - log_gamma(a) - (a + y) * std::log(b + ds) + a * std::log(b);
}

double log_poisson(Count y, double rate) {
    if (y == 0) return -rate;
    const double yd = static_cast<double>(y);
    return yd * std::log(rate) - rate - log_gamma(yd + 1.0);
}

std::vector<double> loglik_plugin(const CountMatrix& Y, const ScalingFactors& factors,
                                  const Labels& z, const Labels& rho, const RateEstimates& rates) {
    check_labels(Y, z, rho, rates.K, rates.R);
    if (static_cast<int>(rates.mu.size()) != rates.R * rates.K)
        throw std::invalid_argument("rate matrix has the wrong size");
    std::vector<double> out(Y.genes(), 0.0);
    for (std::size_t j = 0; j < Y.genes(); ++j) {
        const auto row = Y.row(j);
        const int r = rho[j];
        double sum = 0.0;
        for (std::size_t i = 0; i < Y.spots(); ++i) {
            const double mu = r == 0 ? rates.mu0 : rates.at(r, z[i]);
            sum += log_poisson(row[i], factors.s[i] * factors.g[j] * mu);
        }
        out[j] = sum;
    }
    return out;
}

} // namespace bison
