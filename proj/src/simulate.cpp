#include "bison/simulate.hpp"

#include "bison/categorical.hpp"
#include "bison/text_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bison {

CountFamily parse_count_family(const std::string& name) {
    if (name == "poisson") return CountFamily::poisson;
    if (name == "negative-binomial" || name == "nb") return CountFamily::negative_binomial;
    throw InputError("unknown count family '" + name + "'");
}

std::string to_string(CountFamily family) {
    return family == CountFamily::poisson ? "poisson" : "negative-binomial";
}

DomainMap banded_lattice(int side, int K) {
    if (side < 1 || K < 1 || K > side) throw std::invalid_argument("banded lattice needs 1 <= K <= side");
    DomainMap map;
    for (int row = 0; row < side; ++row)
        for (int col = 0; col < side; ++col) {
            map.spots.ids.push_back("s" + std::to_string(row * side + col + 1));
            map.spots.points.push_back({static_cast<double>(col), static_cast<double>(row)});
            map.domains.push_back(row * K / side);
        }
    return map;
}

void SimConfig::validate() const {
    if (p < 1) throw std::invalid_argument("p must be positive");
    if (!(pi0 >= 0.0 && pi0 < 1.0)) throw std::invalid_argument("pi0 must lie in [0, 1)");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (K < 1 || R < 1) throw std::invalid_argument("K and R must be positive");
    // Smallest rate is 2 (null genes), so the noise must keep means positive.
    if (!(noise >= 0.0 && noise < 2.0)) throw std::invalid_argument("noise must lie in [0, 2)");
    if (family == CountFamily::negative_binomial && !(nb_dispersion_rate > 0.0))
        throw std::invalid_argument("nb_dispersion_rate must be positive");
    if (domain_map) {
        std::vector<int> used(static_cast<std::size_t>(K), 0);
        for (int d : domain_map->domains) {
            if (d < 0 || d >= K) throw std::invalid_argument("domain label out of range");
            used[static_cast<std::size_t>(d)] = 1;
        }
        for (int u : used)
            if (!u) throw std::invalid_argument("domain map does not use all K labels");
        if (domain_map->domains.size() != domain_map->spots.points.size())
            throw std::invalid_argument("domain map labels and spots differ in length");
    }
}

SimDataset generate_dataset(const SimConfig& cfg) {
    cfg.validate();
    const DomainMap map = cfg.domain_map ? *cfg.domain_map : banded_lattice(16, cfg.K);
    const std::size_t n = map.domains.size();
    const auto p = static_cast<std::size_t>(cfg.p);

    Rng rng(cfg.seed);
    std::uniform_real_distribution<double> unit_factor(0.5, 1.5);
    std::uniform_real_distribution<double> null_rate(2.0, 6.0);
    std::uniform_real_distribution<double> eps(-cfg.noise, cfg.noise);
    std::exponential_distribution<double> dispersion(cfg.nb_dispersion_rate);

    SimTruth truth;
    truth.z = map.domains;
    truth.mu.R = cfg.R;
    truth.mu.K = cfg.K;
    for (int r = 1; r <= cfg.R; ++r)
        for (int k = 1; k <= cfg.K; ++k)
            truth.mu.mu.push_back(4.0 + (k - 1) * cfg.delta + (r - 1) * cfg.delta);

    truth.rho.resize(p);
    for (auto& r : truth.rho) {
        if (uniform01(rng) < cfg.pi0)
            r = 0;
        else
            r = 1 + std::min(cfg.R - 1, static_cast<int>(uniform01(rng) * cfg.R));
    }
    truth.s.resize(n);
    for (auto& s : truth.s) s = unit_factor(rng);
    truth.g.resize(p);
    for (auto& g : truth.g) g = unit_factor(rng);
    truth.mu0.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j)
        if (truth.rho[j] == 0) truth.mu0[j] = null_rate(rng);
    if (cfg.family == CountFamily::negative_binomial) {
        truth.dispersion.resize(p);
        for (auto& psi : truth.dispersion) psi = dispersion(rng);
    }

    std::vector<Count> values(p * n);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const double mu = truth.rho[j] == 0 ? truth.mu0[j] : truth.mu.at(truth.rho[j], truth.z[i]);
            const double mean = truth.s[i] * truth.g[j] * (mu + eps(rng));
            if (!(mean > 0.0)) throw std::logic_error("simulated mean is not positive");
            double rate = mean;
            if (cfg.family == CountFamily::negative_binomial) {
                const double psi = truth.dispersion[j];
                rate = std::gamma_distribution<double>(psi, mean / psi)(rng);
            }
            values[j * n + i] = rate > 0.0 ? std::poisson_distribution<Count>(rate)(rng) : 0;
        }
    }

    std::vector<std::string> gene_ids;
    for (std::size_t j = 0; j < p; ++j) gene_ids.push_back("g" + std::to_string(j + 1));

    SimDataset data{CountMatrix(p, n, std::move(values), std::move(gene_ids), map.spots.ids),
                    map.spots, SpatialLayout{}, std::move(truth)};
    data.layout = build_adjacency(map.spots.points, map.kind, map.unit);
    return data;
}

void write_truth(const SimDataset& data, const std::string& dir) {
    namespace fs = std::filesystem;
    const auto& t = data.truth;
    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + (fs::path(dir) / name).string());
        out << text;
    };

    std::ostringstream spots;
    spots << "spot_id,z_true,s_true\n";
    for (std::size_t i = 0; i < t.z.size(); ++i)
        spots << data.counts.spot_ids()[i] << ',' << t.z[i] + 1 << ',' << format_real(t.s[i]) << '\n';
    write("truth_spots.csv", spots.str());

    std::ostringstream genes;
    genes << "gene_id,rho_true,g_true,mu0_true,dispersion\n";
    for (std::size_t j = 0; j < t.rho.size(); ++j)
        genes << data.counts.gene_ids()[j] << ',' << t.rho[j] << ',' << format_real(t.g[j]) << ','
              << format_real(t.mu0[j]) << ','
              << (t.dispersion.empty() ? std::string("NA") : format_real(t.dispersion[j])) << '\n';
    write("truth_genes.csv", genes.str());

    std::ostringstream mu;
    mu << "group,cluster,mu_true\n";
    for (int r = 1; r <= t.mu.R; ++r)
        for (int k = 0; k < t.mu.K; ++k) mu << r << ',' << k + 1 << ',' << format_real(t.mu.at(r, k)) << '\n';
    write("truth_mu.csv", mu.str());
}

} // namespace bison
