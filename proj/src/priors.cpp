#include "bison/priors.hpp"

#include "bison/categorical.hpp"
#include "bison/likelihood.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace bison {

namespace {

double log_beta(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

std::map<int, int> group_sizes(const Labels& rho) {
    std::map<int, int> sizes;
    for (int r : rho) {
        if (r < 0) throw std::invalid_argument("negative gene label");
        if (r > 0) ++sizes[r];
    }
    return sizes;
}

// Partition prior from the null count and the occupied group sizes.
template <typename Sizes>
double urn_partition_prior(int p0, const Sizes& occupied, UrnPrior prior) {
    int dg = 0, m = 0;
    for (int c : occupied)
        if (c > 0) {
            dg += c;
            ++m;
        }
    double lp = log_beta(prior.alpha_pi + p0, prior.beta_pi + dg) -
                log_beta(prior.alpha_pi, prior.beta_pi);
    if (dg == 0) return lp;
    lp += m * std::log(prior.gamma);
    for (int c : occupied)
        if (c > 0) lp += log_gamma(c);
    for (int t = 1; t <= dg; ++t) lp -= std::log(prior.gamma + t - 1);
    return lp;
}

} // namespace

double log_urn_prior(const Labels& rho, UrnPrior prior) {
    const auto sizes = group_sizes(rho);
    std::vector<int> occupied;
    int dg = 0;
    for (const auto& [label, count] : sizes) {
        occupied.push_back(count);
        dg += count;
    }
    return urn_partition_prior(static_cast<int>(rho.size()) - dg, occupied, prior);
}

double log_urn_prior_labeled(std::span<const int> group_sizes, UrnPrior prior) {
    const int R = static_cast<int>(group_sizes.size()) - 1;
    const auto occupied = group_sizes.subspan(1);
    double lp = urn_partition_prior(group_sizes[0], occupied, prior);
    int m = 0;
    for (int c : occupied)
        if (c > 0) ++m;
    for (int t = 0; t < m; ++t) lp -= std::log(static_cast<double>(R - t));
    return lp;
}

double log_urn_prior_labeled(const Labels& rho, int R, UrnPrior prior) {
    const auto sizes = group_sizes(rho);
    const int m = static_cast<int>(sizes.size());
    if (m > R || (!sizes.empty() && sizes.rbegin()->first > R))
        throw std::invalid_argument("gene label exceeds R");
    double lp = log_urn_prior(rho, prior);
    for (int t = 0; t < m; ++t) lp -= std::log(static_cast<double>(R - t));
    return lp;
}

void urn_log_weights(std::span<const int> sizes_without_gene, UrnPrior prior,
                     std::vector<double>& out) {
    const int R = static_cast<int>(sizes_without_gene.size()) - 1;
    int others = 0, empty = 0;
    for (int r = 0; r <= R; ++r) others += sizes_without_gene[r];
    for (int r = 1; r <= R; ++r)
        if (sizes_without_gene[r] == 0) ++empty;
    const int p0 = sizes_without_gene[0];
    const int dg = others - p0;

    out.resize(static_cast<std::size_t>(R + 1));
    out[0] = std::log(prior.alpha_pi + p0);
    const double dg_base = std::log(prior.beta_pi + dg) - std::log(prior.gamma + dg);
    const double empty_mass = empty > 0 ? std::log(prior.gamma / empty) : 0.0;
    for (int r = 1; r <= R; ++r) {
        const int size = sizes_without_gene[r];
        out[r] = dg_base + (size > 0 ? std::log(static_cast<double>(size)) : empty_mass);
    }
}

std::vector<double> gene_prior_conditional(std::size_t j, const Labels& rho, int R, UrnPrior prior) {
    if (j >= rho.size()) throw std::invalid_argument("gene index out of range");
    std::vector<int> sizes(static_cast<std::size_t>(R + 1), 0);
    for (std::size_t t = 0; t < rho.size(); ++t) {
        if (t == j) continue;
        if (rho[t] < 0 || rho[t] > R) throw std::invalid_argument("gene label out of range");
        ++sizes[static_cast<std::size_t>(rho[t])];
    }
    std::vector<double> logw;
    urn_log_weights(sizes, prior, logw);
    return normalize_log_weights(logw);
}

double log_mrf_prior_unnormalized(const Labels& z, const SpatialLayout& layout,
                                  std::span<const double> b, double h) {
    if (z.size() != layout.spots()) throw std::invalid_argument("z length does not match layout");
    double abundance = 0.0;
    for (int k : z) abundance += b[static_cast<std::size_t>(k)];
    long long agree = 0;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (int nb : layout.neighbors(i))
            if (static_cast<std::size_t>(nb) > i && z[static_cast<std::size_t>(nb)] == z[i]) ++agree;
    return abundance + h * static_cast<double>(agree);
}

void mrf_log_weights(std::size_t i, const Labels& z, const SpatialLayout& layout,
                     std::span<const double> b, double h, std::vector<double>& out) {
    out.assign(b.begin(), b.end());
    if (h == 0.0) return;
    for (int nb : layout.neighbors(i)) out[static_cast<std::size_t>(z[static_cast<std::size_t>(nb)])] += h;
}

std::vector<double> spot_prior_conditional(std::size_t i, const Labels& z,
                                           const SpatialLayout& layout, std::span<const double> b,
                                           double h) {
    if (i >= z.size() || z.size() != layout.spots())
        throw std::invalid_argument("spot index or z length does not match layout");
    std::vector<double> logw;
    mrf_log_weights(i, z, layout, b, h, logw);
    return normalize_log_weights(logw);
}

} // namespace bison
