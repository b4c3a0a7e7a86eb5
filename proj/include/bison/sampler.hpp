#pragma once

#include "bison/categorical.hpp"
#include "bison/likelihood.hpp"
#include "bison/priors.hpp"
#include "bison/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bison {

struct WarmStart {
    Labels z;   // 0-based spot clusters
    Labels rho; // 0 = null
};

struct McmcConfig {
    int iterations = 10000;
    int burn_in = 5000;
    int chains = 1;
    int thin = 1;
    std::uint64_t seed = 1;
    std::optional<WarmStart> warm;
    // Worker threads for running chains; chain output does not depend on it.
    int threads = 1;

    void validate() const;
    int kept() const { return (iterations - burn_in) / thin; }
};

struct ChainDraws {
    std::uint64_t seed = 0; // stream seed actually used by this chain
    std::vector<Labels> z;
    std::vector<Labels> rho;
    std::vector<double> log_posterior; // one per kept draw
    std::vector<double> trace;         // one per iteration, burn-in included
};

struct McmcSamples {
    int n = 0;
    int p = 0;
    int K = 0;
    int R = 0;
    McmcConfig config;
    std::vector<ChainDraws> chains;

    std::size_t kept_total() const;
};

// Initial labels: z uniform over K, rho null with probability
// alpha_pi / (alpha_pi + beta_pi) and otherwise uniform over 1..R.
WarmStart random_start(std::size_t n, std::size_t p, int K, int R, const Hyperparameters& hyper,
                       Rng& rng);

// Single-site collapsed Gibbs sampler over (z, rho) with all block rates and
// the null proportion integrated out. Block sums are kept incrementally; the
// exposure sums factor as S_rk = (sum_{j in D_r} g_j) * (sum_{i in C_k} s_i).
class GibbsSampler {
public:
    GibbsSampler(const CountMatrix& counts, const SpatialLayout& layout,
                 const ScalingFactors& factors, const Hyperparameters& hyper, int K, int R,
                 WarmStart start);

    // Full conditional of z_i (length K) / rho_j (length R + 1) at the
    // current state. The state is left unchanged.
    std::vector<double> spot_conditional(std::size_t i);
    std::vector<double> gene_conditional(std::size_t j);

    int update_spot(std::size_t i, Rng& rng);
    int update_gene(std::size_t j, Rng& rng);

    // All genes in random order, then all spots in random order.
    void sweep(Rng& rng);

    // log labelled urn prior + unnormalised MRF log prior + block marginals
    // (per-cell data constants omitted; they do not depend on the state).
    double log_posterior() const;

    const Labels& z() const { return z_; }
    const Labels& rho() const { return rho_; }
    int K() const { return K_; }
    int R() const { return R_; }
    BlockStats stats() const;

private:
    void refresh_exposures();
    void remove_spot(std::size_t i);
    void insert_spot(std::size_t i, int k);
    void remove_gene(std::size_t j);
    void insert_gene(std::size_t j, int r);
    void spot_log_weights(std::size_t i, std::vector<double>& out) const;
    void gene_log_weights(std::size_t j, std::vector<double>& out) const;
    void move_spot_counts(std::size_t i, int from, int to);
    void move_gene_counts(std::size_t j, int from, int to);

    Count& block(int r, int k) { return block_y_[static_cast<std::size_t>((r - 1) * K_ + k)]; }
    Count block(int r, int k) const { return block_y_[static_cast<std::size_t>((r - 1) * K_ + k)]; }

    const CountMatrix& counts_;
    const SpatialLayout& layout_;
    ScalingFactors factors_;
    int K_;
    int R_;
    std::size_t n_;
    std::size_t p_;
    std::vector<double> b_;
    double h_;
    GammaPrior mu_prior_;
    GammaPrior null_prior_;
    UrnPrior urn_;

    Labels z_;
    Labels rho_;
    std::vector<Count> gene_totals_;         // row sums
    std::vector<Count> gene_cluster_counts_; // p x K: sum over spots of cluster k
    std::vector<Count> spot_group_counts_;   // R x n: sum over genes of group r
    std::vector<Count> block_y_;             // R x K
    Count null_y_ = 0;
    std::vector<double> group_effect_;       // R + 1, sum of g_j per group
    std::vector<double> cluster_factor_;     // K, sum of s_i per cluster
    double total_factor_ = 0.0;
    std::vector<int> group_sizes_;
    std::vector<int> cluster_sizes_;

    std::vector<std::size_t> gene_order_;
    std::vector<std::size_t> spot_order_;
    mutable std::vector<double> scratch_;
};

// Runs one chain; the stream seed is derive_seed(config.seed, chain).
ChainDraws run_chain(const CountMatrix& counts, const SpatialLayout& layout,
                     const ScalingFactors& factors, int K, int R, const Hyperparameters& hyper,
                     const McmcConfig& config, int chain);

// Runs config.chains chains on up to config.threads worker threads.
McmcSamples run_chains(const CountMatrix& counts, const SpatialLayout& layout,
                       const ScalingFactors& factors, int K, int R, const Hyperparameters& hyper,
                       const McmcConfig& config);

// Conjugate posterior means: mu_rk = (alpha_mu + Y_rk) / (beta_mu + S_rk) and
// mu0 = (alpha_0 + Y0) / (beta_0 + S0).
RateEstimates posterior_rate_estimates(const BlockStats& stats, const Hyperparameters& hyper);
RateEstimates posterior_rate_estimates(const CountMatrix& counts, const ScalingFactors& factors,
                                       const Labels& z, const Labels& rho, int K, int R,
                                       const Hyperparameters& hyper);

// Draws file, one per chain:
//   # bison draws v1
//   n=<n> p=<p> K=<K> R=<R> iterations=<..> burn_in=<..> thin=<..> seed=<..> chain=<c>
//   # z (1-based, n values) | rho (p values) | log_posterior
//   <z_1 .. z_n> | <rho_1 .. rho_p> | <log posterior>
// Fields are single-space separated; sections are separated by " | ".
std::string format_draws(const McmcSamples& samples, int chain);
void write_draws(const McmcSamples& samples, int chain, const std::string& path);

struct DrawsFile {
    int n = 0, p = 0, K = 0, R = 0;
    int iterations = 0, burn_in = 0, thin = 1;
    std::uint64_t seed = 0;
    int chain = 0;
    ChainDraws draws; // trace is not stored in the file
};

DrawsFile parse_draws(const std::string& text);
DrawsFile read_draws(const std::string& path);

} // namespace bison
