#pragma once

#include "bison/types.hpp"

#include <span>
#include <vector>

namespace bison {

// Zero-inflated Polya urn over gene labels with the null probability
// integrated out under Beta(alpha_pi, beta_pi).
struct UrnPrior {
    double gamma = 1.0;
    double alpha_pi = 1.0;
    double beta_pi = 1.0;
};

inline UrnPrior urn_prior(const Hyperparameters& hp) { return {hp.gamma, hp.alpha_pi, hp.beta_pi}; }

// Log prior of the gene partition induced by rho (label 0 = null):
//   log B(a + p0, b + p - p0) - log B(a, b)
//   + m log gamma + sum_r lgamma(p_r) - sum_{t=1}^{p-p0} log(gamma + t - 1)
// with m the number of occupied discriminating groups. Only the size
// multiset matters.
double log_urn_prior(const Labels& rho, UrnPrior prior);

// Prior on labelled vectors when exactly R group labels are available: the
// partition prior spread evenly over the R!/(R-m)! labellings of the m
// occupied groups. This is the density the fixed-R Gibbs conditional targets.
double log_urn_prior_labeled(const Labels& rho, int R, UrnPrior prior);

// Same, from group sizes (sizes[0] = null count, R = sizes.size() - 1).
double log_urn_prior_labeled(std::span<const int> group_sizes, UrnPrior prior);

// Unnormalised log weights over labels 0..R for one gene, given the group
// sizes of all other genes (sizes[0] = null count, sizes.size() == R + 1).
// Occupied groups get weight proportional to their size; the urn's new-group
// mass gamma is split evenly across the currently empty groups.
void urn_log_weights(std::span<const int> sizes_without_gene, UrnPrior prior,
                     std::vector<double>& out);

// Normalised conditional P(rho_j = c | rho_-j) for c = 0..R. rho[j] is ignored.
std::vector<double> gene_prior_conditional(std::size_t j, const Labels& rho, int R, UrnPrior prior);

// sum_i b[z_i] + h * sum_{i < i'} e_ii' I(z_i = z_i'), for 0-based z.
double log_mrf_prior_unnormalized(const Labels& z, const SpatialLayout& layout,
                                  std::span<const double> b, double h);

// out[k] = b[k] + h * #(neighbours of spot i labelled k).
void mrf_log_weights(std::size_t i, const Labels& z, const SpatialLayout& layout,
                     std::span<const double> b, double h, std::vector<double>& out);

std::vector<double> spot_prior_conditional(std::size_t i, const Labels& z,
                                           const SpatialLayout& layout, std::span<const double> b,
                                           double h);

} // namespace bison
