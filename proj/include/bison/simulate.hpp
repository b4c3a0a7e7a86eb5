#pragma once

#include "bison/ingest.hpp"
#include "bison/likelihood.hpp"
#include "bison/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bison {

enum class CountFamily { poisson, negative_binomial };

CountFamily parse_count_family(const std::string& name);
std::string to_string(CountFamily family);

// Spatial pattern for simulation: spot positions, true domains (0-based) and
// how to derive adjacency from the positions.
struct DomainMap {
    SpotCoords spots;
    Labels domains;
    LatticeKind kind = LatticeKind::square;
    double unit = 1.0;
};

// side x side square lattice with unit spacing, cut into K contiguous
// horizontal bands of (nearly) equal height.
DomainMap banded_lattice(int side = 16, int K = 4);

struct SimConfig {
    int p = 1000;
    double pi0 = 0.2;
    double delta = 1.0;
    int K = 4;
    int R = 3;
    std::optional<DomainMap> domain_map; // banded_lattice(16, K) when unset
    double noise = 0.1;                  // half-width of the uniform rate noise
    CountFamily family = CountFamily::poisson;
    double nb_dispersion_rate = 0.1;     // psi_j ~ Exp(rate)
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimTruth {
    Labels z;                      // 0-based domains
    Labels rho;                    // 0 = null
    std::vector<double> s;
    std::vector<double> g;
    std::vector<double> mu0;       // per gene, 0 for discriminating genes
    std::vector<double> dispersion; // per gene; empty for the Poisson family
    RateEstimates mu;              // mu(r, k) = 4 + (k - 1) delta + (r - 1) delta, 1-based r, k
};

struct SimDataset {
    CountMatrix counts;
    SpotCoords coords;
    SpatialLayout layout;
    SimTruth truth;
};

// Generative recipe: rho_j is null with probability pi0, otherwise uniform
// over 1..R; s_i, g_j ~ U(0.5, 1.5); null genes draw mu0_j ~ U(2, 6); every
// cell adds eps ~ U(-noise, noise) to its rate and draws
// y ~ Poi(s_i g_j (mu + eps)), or a Negative Binomial with the same mean and
// variance m + m^2 / psi_j. Deterministic in cfg.seed.
SimDataset generate_dataset(const SimConfig& cfg);

// truth_spots.csv (spot_id,z_true,s_true), truth_genes.csv
// (gene_id,rho_true,g_true,mu0_true,dispersion) and truth_mu.csv
// (group,cluster,mu_true) inside dir.
void write_truth(const SimDataset& data, const std::string& dir);

} // namespace bison
