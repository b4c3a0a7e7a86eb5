#pragma once

#include "bison/types.hpp"

#include <vector>

namespace bison {

// Thread-safe log Gamma for positive arguments.
double log_gamma(double x);

// s_i = column sum / grand total, so the s_i sum to one.
std::vector<double> estimate_size_factors(const CountMatrix& Y);

// g_j = row sum.
std::vector<double> estimate_gene_effects(const CountMatrix& Y);

ScalingFactors estimate_scaling_factors(const CountMatrix& Y);

struct GammaPrior {
    double shape = 1.0;
    double rate = 1.0;
};

// Log marginal likelihood of a Poisson block with a Gamma(shape, rate) rate
// integrated out:
//   a log b - lgamma(a) + lgamma(a + Y) - (a + Y) log(b + S) + logconst
// where Y is the block count sum and S the block exposure sum. logconst is
// the per-cell sum of y log(s g) - lgamma(y + 1); it is identical for every
// candidate label of a single Gibbs move, so callers pass 0 there.
double log_block_marginal(Count count_sum, double exposure_sum, GammaPrior prior,
                          double logconst = 0.0);

// Change in log_block_marginal (logconst excluded) when a cell group with
// count sum dy and exposure ds joins a block currently at (Y, S).
double log_block_gain(Count count_sum, double exposure_sum, Count dy, double ds, GammaPrior prior);

double log_poisson(Count y, double rate);

// Point estimates of the block rates. mu is R x K, index (r - 1) * K + k.
struct RateEstimates {
    int R = 0;
    int K = 0;
    std::vector<double> mu;
    double mu0 = 0.0;

    double at(int r, int k) const { return mu[static_cast<std::size_t>((r - 1) * K + k)]; }
};

// Per-gene Poisson log-likelihood at plug-in rates: gene j in group r > 0
// uses rate s_i g_j mu(r, z_i), null genes use s_i g_j mu0.
std::vector<double> loglik_plugin(const CountMatrix& Y, const ScalingFactors& factors,
                                  const Labels& z, const Labels& rho, const RateEstimates& rates);

} // namespace bison
