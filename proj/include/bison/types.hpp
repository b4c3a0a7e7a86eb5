#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bison {

// Raised for malformed or invariant-violating user input (files, flags).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Count = std::int64_t;

// Spot labels are 0-based cluster indices 0..K-1 in memory and 1..K in files.
// Gene labels use 0 for the null (non-discriminating) set and 1..R for
// discriminating groups, both in memory and in files.
using Labels = std::vector<int>;

// Genes x spots count matrix, stored gene-major.
class CountMatrix {
public:
    CountMatrix() = default;

    // Throws InputError unless every entry is non-negative, p >= 1, n >= 2
    // and no row or column is entirely zero. Empty id vectors get defaults
    // "g1".."gp" and "s1".."sn".
    CountMatrix(std::size_t genes, std::size_t spots, std::vector<Count> values,
                std::vector<std::string> gene_ids = {},
                std::vector<std::string> spot_ids = {});

    std::size_t genes() const { return genes_; }
    std::size_t spots() const { return spots_; }

    Count operator()(std::size_t gene, std::size_t spot) const {
        return values_[gene * spots_ + spot];
    }

    std::span<const Count> row(std::size_t gene) const {
        return {values_.data() + gene * spots_, spots_};
    }

    const std::vector<Count>& values() const { return values_; }
    const std::vector<std::string>& gene_ids() const { return gene_ids_; }
    const std::vector<std::string>& spot_ids() const { return spot_ids_; }

    Count total() const;

    bool operator==(const CountMatrix&) const = default;

private:
    std::size_t genes_ = 0;
    std::size_t spots_ = 0;
    std::vector<Count> values_;
    std::vector<std::string> gene_ids_;
    std::vector<std::string> spot_ids_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point&) const = default;
};

// Spot coordinates plus an undirected neighbour graph (no self loops).
class SpatialLayout {
public:
    SpatialLayout() = default;

    // edges are unordered spot index pairs; duplicates are merged.
    SpatialLayout(std::vector<Point> coords,
                  const std::vector<std::pair<int, int>>& edges);

    std::size_t spots() const { return coords_.size(); }
    const std::vector<Point>& coords() const { return coords_; }
    std::span<const int> neighbors(std::size_t spot) const { return neighbors_[spot]; }
    bool adjacent(std::size_t a, std::size_t b) const;
    std::size_t edge_count() const;

    // Sorted (a < b) edge list.
    std::vector<std::pair<int, int>> edges() const;

    // Row-major n x n 0/1 matrix; for tests and small exports only.
    std::vector<int> dense() const;

private:
    std::vector<Point> coords_;
    std::vector<std::vector<int>> neighbors_;
};

// Multiplicative exposure terms: spot size factors s and gene effects g.
struct ScalingFactors {
    std::vector<double> s;
    std::vector<double> g;
};

struct Hyperparameters {
    double alpha_mu = 1.0;
    double beta_mu = 1.0;
    double alpha_0 = 1.0;
    double beta_0 = 1.0;
    double alpha_pi = 1.0;
    double beta_pi = 1.0;
    double gamma = 1.0;
    // MRF abundance per spot cluster. Empty means 1 for every cluster; a
    // single value is broadcast.
    std::vector<double> b;
    double h = 1.0;

    void validate(int K) const;
    std::vector<double> abundance(int K) const;
};

// Sufficient statistics of the Gamma-Poisson blocks. Discriminating group r
// (1..R) and spot cluster k (0..K-1) live at index (r - 1) * K + k.
struct BlockStats {
    int R = 0;
    int K = 0;
    std::vector<Count> Y;
    std::vector<double> S;
    Count Y0 = 0;
    double S0 = 0.0;
    std::vector<int> gene_group_sizes;   // R + 1 entries, [0] is the null set
    std::vector<int> spot_cluster_sizes; // K entries

    BlockStats() = default;
    BlockStats(int R_, int K_);

    Count& y(int r, int k) { return Y[static_cast<std::size_t>((r - 1) * K + k)]; }
    Count y(int r, int k) const { return Y[static_cast<std::size_t>((r - 1) * K + k)]; }
    double& s(int r, int k) { return S[static_cast<std::size_t>((r - 1) * K + k)]; }
    double s(int r, int k) const { return S[static_cast<std::size_t>((r - 1) * K + k)]; }

    int null_size() const { return gene_group_sizes[0]; }
    int realized_groups() const;
    int realized_clusters() const;
};

struct ModelState {
    int K = 0;
    int R = 0;
    Labels z;
    Labels rho;
    BlockStats stats;
};

// Throws std::invalid_argument when label ranges or lengths do not fit
// (Y, factors, K, R).
void check_labels(const CountMatrix& Y, const Labels& z, const Labels& rho, int K, int R);

// Direct double-loop accumulation of block sums.
BlockStats recompute_stats(const CountMatrix& Y, const ScalingFactors& factors,
                           const Labels& z, const Labels& rho, int K, int R);

} // namespace bison
