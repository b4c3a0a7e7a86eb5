#pragma once

#include "bison/likelihood.hpp"
#include "bison/sampler.hpp"
#include "bison/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace bison {

// Posterior pairwise co-clustering probabilities, dense and symmetric.
struct Ppm {
    std::size_t size = 0;
    std::vector<double> values;

    double operator()(std::size_t a, std::size_t b) const { return values[a * size + b]; }
};

// PPM_ab = fraction of draws in which a and b share a label. Label 0 is an
// ordinary label here, so two null genes co-cluster.
Ppm compute_ppm(std::span<const Labels> draws);

// sum_{a<b} (I(labels_a = labels_b) - PPM_ab)^2
double dahl_loss(const Labels& labels, const Ppm& ppm);

// Index of the draw with the smallest Dahl loss; ties go to the earliest.
std::size_t dahl_point_estimate(std::span<const Labels> draws, const Ppm& ppm);

struct ChainDiagnostics {
    std::uint64_t seed = 0;
    std::size_t kept = 0;
    double mean_log_posterior = 0.0; // over kept draws
    double max_log_posterior = 0.0;
    double final_log_posterior = 0.0;
    // Least-squares slope of the trace over the second half of the kept
    // draws, per iteration.
    double late_slope = 0.0;
};

struct FitSummary {
    int n = 0;
    int p = 0;
    int K = 0;
    int R = 0;
    Ppm ppm_spot;  // empty when not retained
    Ppm ppm_gene;
    Labels z_hat;  // 0-based
    Labels rho_hat;
    std::size_t z_draw = 0;   // index into the pooled kept draws
    std::size_t rho_draw = 0;
    RateEstimates rates;
    double pi0_hat = 0.0;
    int p0_hat = 0;
    int realized_K = 0;
    int realized_R = 0;
    std::vector<ChainDiagnostics> chains;
};

// Pools the kept draws of all chains, forms both PPMs and their Dahl point
// estimates, then evaluates the conjugate rate estimates at (z_hat, rho_hat).
// pi0_hat = (alpha_pi + p0_hat) / (alpha_pi + beta_pi + p).
FitSummary summarize_fit(const McmcSamples& samples, const CountMatrix& counts,
                         const ScalingFactors& factors, const Hyperparameters& hyper,
                         bool keep_ppm = true);

// Key-value JSON document (PPMs excluded; they go to CSV when requested).
std::string summary_json(const FitSummary& fit, double micl);

// Flat exports.
void write_spot_table(const FitSummary& fit, const std::vector<std::string>& spot_ids,
                      const std::vector<Point>& coords, const std::string& path);
void write_gene_table(const FitSummary& fit, const std::vector<std::string>& gene_ids,
                      const std::string& path);
void write_mu_table(const FitSummary& fit, const std::string& path);
void write_ppm(const Ppm& ppm, const std::vector<std::string>& ids, const std::string& path);

} // namespace bison
