#pragma once

#include "bison/sampler.hpp"
#include "bison/summary.hpp"

#include <optional>
#include <string>
#include <vector>

namespace bison {

// Parameters per block in the penalty: one Poisson rate.
inline constexpr int kParamsPerBlock = 1;

// Modified integrated completed likelihood at the fit's point estimates
// (lower is better):
//   - sum_{j not null} [ll_j + log(p_r / (p - p0))]
//   + (K - 1)/2 log n + (R - 1)/2 log(p - p0) + K R nu / 2 log(n (p - p0))
//   - sum_{j null} ll_j + p0 / 2 log n
// where ll_j is the plug-in Poisson log-likelihood of gene j. When every gene
// is null only the last line remains; a warning is appended if R > 1.
double compute_micl(const CountMatrix& counts, const ScalingFactors& factors,
                    const FitSummary& fit, std::vector<std::string>* warnings = nullptr);

struct GridCell {
    int R = 0;
    int K = 0;
    double micl = 0.0;
    int p0_hat = 0;
    double runtime_seconds = 0.0;
    std::optional<FitSummary> fit; // PPMs dropped
    std::string error;             // non-empty when the fit failed

    bool ok() const { return error.empty(); }
};

struct MiclGrid {
    std::vector<GridCell> cells; // R-major, then K
    std::optional<std::size_t> best;
};

// Minimum mICL; ties go to smaller R + K, then smaller K. Failed cells are
// skipped.
std::optional<std::size_t> select_best(const std::vector<GridCell>& cells);

// Fits every (R, K) pair with run_chains + summarize_fit and scores it.
// Cell c (in R-major order) uses seed derive_seed(config.seed, 1000 + c).
// Cells run concurrently on `threads` workers; results do not depend on it.
MiclGrid grid_search(const CountMatrix& counts, const SpatialLayout& layout,
                     const ScalingFactors& factors, const std::vector<int>& Ks,
                     const std::vector<int>& Rs, const Hyperparameters& hyper,
                     const McmcConfig& config, int threads = 1);

// CSV with header "R,K,mICL,p0_hat,runtime_seconds".
std::string format_grid_csv(const MiclGrid& grid);

} // namespace bison
