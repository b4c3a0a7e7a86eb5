#include "bison/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bison {

CountMatrix::CountMatrix(std::size_t genes, std::size_t spots, std::vector<Count> values,
                         std::vector<std::string> gene_ids, std::vector<std::string> spot_ids)
    : genes_(genes), spots_(spots), values_(std::move(values)),
      gene_ids_(std::move(gene_ids)), spot_ids_(std::move(spot_ids)) {
    if (genes_ < 1) throw InputError("count matrix needs at least one gene");
    if (spots_ < 2) throw InputError("count matrix needs at least two spots");
    if (values_.size() != genes_ * spots_)
        throw InputError("count matrix has " + std::to_string(values_.size()) +
                         " values, expected " + std::to_string(genes_ * spots_));
    if (gene_ids_.empty())
        for (std::size_t j = 0; j < genes_; ++j) gene_ids_.push_back("g" + std::to_string(j + 1));
    if (spot_ids_.empty())
        for (std::size_t i = 0; i < spots_; ++i) spot_ids_.push_back("s" + std::to_string(i + 1));
    if (gene_ids_.size() != genes_) throw InputError("gene id count does not match rows");
    if (spot_ids_.size() != spots_) throw InputError("spot id count does not match columns");

    std::vector<Count> col_sum(spots_, 0);
    for (std::size_t j = 0; j < genes_; ++j) {
        Count row_sum = 0;
        for (std::size_t i = 0; i < spots_; ++i) {
            const Count v = values_[j * spots_ + i];
            if (v < 0)
                throw InputError("negative count for gene " + gene_ids_[j] + " at spot " +
                                 spot_ids_[i]);
            row_sum += v;
            col_sum[i] += v;
        }
        if (row_sum == 0) throw InputError("gene " + gene_ids_[j] + " has no counts");
    }
    for (std::size_t i = 0; i < spots_; ++i)
        if (col_sum[i] == 0) throw InputError("spot " + spot_ids_[i] + " has no counts");
}

Count CountMatrix::total() const {
    return std::accumulate(values_.begin(), values_.end(), Count{0});
}

SpatialLayout::SpatialLayout(std::vector<Point> coords,
                             const std::vector<std::pair<int, int>>& edges)
    : coords_(std::move(coords)), neighbors_(coords_.size()) {
    const int n = static_cast<int>(coords_.size());
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= n || b >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (a == b) throw std::invalid_argument("self loop at spot " + std::to_string(a));
        neighbors_[a].push_back(b);
        neighbors_[b].push_back(a);
    }
    for (auto& nb : neighbors_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
}

bool SpatialLayout::adjacent(std::size_t a, std::size_t b) const {
    const auto& nb = neighbors_[a];
    return std::binary_search(nb.begin(), nb.end(), static_cast<int>(b));
}

std::size_t SpatialLayout::edge_count() const {
    std::size_t twice = 0;
    for (const auto& nb : neighbors_) twice += nb.size();
    return twice / 2;
}

std::vector<std::pair<int, int>> SpatialLayout::edges() const {
    std::vector<std::pair<int, int>> out;
    for (std::size_t a = 0; a < neighbors_.size(); ++a)
        for (int b : neighbors_[a])
            if (static_cast<int>(a) < b) out.emplace_back(static_cast<int>(a), b);
    return out;
}

std::vector<int> SpatialLayout::dense() const {
    const std::size_t n = spots();
    std::vector<int> E(n * n, 0);
    for (std::size_t a = 0; a < n; ++a)
        for (int b : neighbors_[a]) E[a * n + static_cast<std::size_t>(b)] = 1;
    return E;
}

void Hyperparameters::validate(int K) const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(name) + " must be a positive finite number");
    };
    positive(alpha_mu, "alpha_mu");
    positive(beta_mu, "beta_mu");
    positive(alpha_0, "alpha_0");
    positive(beta_0, "beta_0");
    positive(alpha_pi, "alpha_pi");
    positive(beta_pi, "beta_pi");
    positive(gamma, "gamma");
    if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be >= 0");
    if (b.size() > 1 && static_cast<int>(b.size()) != K)
        throw std::invalid_argument("b has " + std::to_string(b.size()) + " entries but K = " +
                                    std::to_string(K));
    for (double v : b) positive(v, "b");
}

std::vector<double> Hyperparameters::abundance(int K) const {
    if (b.empty()) return std::vector<double>(static_cast<std::size_t>(K), 1.0);
    if (b.size() == 1) return std::vector<double>(static_cast<std::size_t>(K), b[0]);
    return b;
}

BlockStats::BlockStats(int R_, int K_)
    : R(R_), K(K_),
      Y(static_cast<std::size_t>(R_ * K_), 0),
      S(static_cast<std::size_t>(R_ * K_), 0.0),
      gene_group_sizes(static_cast<std::size_t>(R_ + 1), 0),
      spot_cluster_sizes(static_cast<std::size_t>(K_), 0) {}

int BlockStats::realized_groups() const {
    return static_cast<int>(std::count_if(gene_group_sizes.begin() + 1, gene_group_sizes.end(),
                                          [](int c) { return c > 0; }));
}

int BlockStats::realized_clusters() const {
    return static_cast<int>(std::count_if(spot_cluster_sizes.begin(), spot_cluster_sizes.end(),
                                          [](int c) { return c > 0; }));
}

void check_labels(const CountMatrix& Y, const Labels& z, const Labels& rho, int K, int R) {
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (R < 1) throw std::invalid_argument("R must be >= 1");
    if (z.size() != Y.spots())
        throw std::invalid_argument("z has " + std::to_string(z.size()) + " entries, expected " +
                                    std::to_string(Y.spots()));
    if (rho.size() != Y.genes())
        throw std::invalid_argument("rho has " + std::to_string(rho.size()) +
                                    " entries, expected " + std::to_string(Y.genes()));
    for (int k : z)
        if (k < 0 || k >= K) throw std::invalid_argument("spot label out of range");
    for (int r : rho)
        if (r < 0 || r > R) throw std::invalid_argument("gene label out of range");
}

BlockStats recompute_stats(const CountMatrix& Y, const ScalingFactors& factors,
                           const Labels& z, const Labels& rho, int K, int R) {
    check_labels(Y, z, rho, K, R);
    if (factors.s.size() != Y.spots() || factors.g.size() != Y.genes())
        throw std::invalid_argument("scaling factor dimensions do not match the count matrix");

    BlockStats st(R, K);
    for (int k : z) ++st.spot_cluster_sizes[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < Y.genes(); ++j) {
        const int r = rho[j];
        ++st.gene_group_sizes[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < Y.spots(); ++i) {
            const Count y = Y(j, i);
            const double e = factors.s[i] * factors.g[j];
            if (r == 0) {
                st.Y0 += y;
                st.S0 += e;
            } else {
                st.y(r, z[i]) += y;
                st.s(r, z[i]) += e;
            }
        }
    }
    return st;
}

} // namespace bison
