#include "bison/selection.hpp"

#include "bison/text_io.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

namespace bison {

double compute_micl(const CountMatrix& counts, const ScalingFactors& factors,
                    const FitSummary& fit, std::vector<std::string>* warnings) {
    const auto ll = loglik_plugin(counts, factors, fit.z_hat, fit.rho_hat, fit.rates);
    const double n = static_cast<double>(counts.spots());
    const int p = static_cast<int>(counts.genes());
    const int K = fit.K, R = fit.R;

    std::vector<int> sizes(static_cast<std::size_t>(R + 1), 0);
    for (int r : fit.rho_hat) ++sizes[static_cast<std::size_t>(r)];
    const int p0 = sizes[0];
    const int dg = p - p0;

    double null_part = 0.0;
    for (int j = 0; j < p; ++j)
        if (fit.rho_hat[static_cast<std::size_t>(j)] == 0) null_part -= ll[static_cast<std::size_t>(j)];
    null_part += 0.5 * p0 * std::log(n);

    if (dg == 0) {
        if (R > 1 && warnings)
            warnings->push_back("every gene is null at R = " + std::to_string(R) +
                                "; the number of groups is vacuous");
        return null_part;
    }

    double dg_part = 0.0;
    for (int j = 0; j < p; ++j) {
        const int r = fit.rho_hat[static_cast<std::size_t>(j)];
        if (r == 0) continue;
        dg_part -= ll[static_cast<std::size_t>(j)] +
                   std::log(static_cast<double>(sizes[static_cast<std::size_t>(r)]) / dg);
    }
    dg_part += 0.5 * (K - 1) * std::log(n) + 0.5 * (R - 1) * std::log(static_cast<double>(dg)) +
               0.5 * K * R * kParamsPerBlock * std::log(n * dg);
    return dg_part + null_part;
}

std::optional<std::size_t> select_best(const std::vector<GridCell>& cells) {
    std::optional<std::size_t> best;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto& cell = cells[c];
        if (!cell.ok() || !std::isfinite(cell.micl)) continue;
        if (!best) {
            best = c;
            continue;
        }
        const auto& b = cells[*best];
        const bool better =
            cell.micl < b.micl ||
            (cell.micl == b.micl &&
             (cell.R + cell.K < b.R + b.K || (cell.R + cell.K == b.R + b.K && cell.K < b.K)));
        if (better) best = c;
    }
    return best;
}

MiclGrid grid_search(const CountMatrix& counts, const SpatialLayout& layout,
                     const ScalingFactors& factors, const std::vector<int>& Ks,
                     const std::vector<int>& Rs, const Hyperparameters& hyper,
                     const McmcConfig& config, int threads) {
    if (Ks.empty() || Rs.empty()) throw std::invalid_argument("grid search needs non-empty K and R grids");
    config.validate();

    MiclGrid grid;
    for (int R : Rs)
        for (int K : Ks) {
            GridCell cell;
            cell.R = R;
            cell.K = K;
            grid.cells.push_back(std::move(cell));
        }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t c = next++; c < grid.cells.size(); c = next++) {
            GridCell& cell = grid.cells[c];
            const auto start = std::chrono::steady_clock::now();
            try {
                McmcConfig cell_config = config;
                cell_config.seed = derive_seed(config.seed, 1000 + c);
                cell_config.threads = 1;
                cell_config.warm.reset();
                const auto samples =
                    run_chains(counts, layout, factors, cell.K, cell.R, hyper, cell_config);
                FitSummary fit = summarize_fit(samples, counts, factors, hyper, false);
                cell.micl = compute_micl(counts, factors, fit);
                cell.p0_hat = fit.p0_hat;
                cell.fit = std::move(fit);
            } catch (const std::exception& e) {
                cell.error = e.what();
                cell.micl = std::nan("");
            }
            cell.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(grid.cells.size())));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    grid.best = select_best(grid.cells);
    return grid;
}

std::string format_grid_csv(const MiclGrid& grid) {
    std::ostringstream out;
    out << "R,K,mICL,p0_hat,runtime_seconds\n";
    for (const auto& c : grid.cells)
        out << c.R << ',' << c.K << ',' << (c.ok() ? format_real(c.micl) : std::string("NA")) << ','
            << c.p0_hat << ',' << format_real(c.runtime_seconds) << '\n';
    return out.str();
}

} // namespace bison
