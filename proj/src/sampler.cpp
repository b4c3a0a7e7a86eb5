#include "bison/sampler.hpp"

#include "bison/text_io.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace bison {

void McmcConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations)
        throw std::invalid_argument("burn_in must lie in [0, iterations)");
    if (chains < 1) throw std::invalid_argument("chains must be positive");
    if (thin < 1) throw std::invalid_argument("thin must be positive");
    if (threads < 1) throw std::invalid_argument("threads must be positive");
    if (kept() < 1) throw std::invalid_argument("no draws would be kept");
}

std::size_t McmcSamples::kept_total() const {
    std::size_t total = 0;
    for (const auto& c : chains) total += c.z.size();
    return total;
}

WarmStart random_start(std::size_t n, std::size_t p, int K, int R, const Hyperparameters& hyper,
                       Rng& rng) {
    WarmStart start;
    start.z.resize(n);
    start.rho.resize(p);
    for (auto& k : start.z) k = std::min(K - 1, static_cast<int>(uniform01(rng) * K));
    const double null_prob = hyper.alpha_pi / (hyper.alpha_pi + hyper.beta_pi);
    for (auto& r : start.rho) {
        if (uniform01(rng) < null_prob)
            r = 0;
        else
            r = 1 + std::min(R - 1, static_cast<int>(uniform01(rng) * R));
    }
    return start;
}

GibbsSampler::GibbsSampler(const CountMatrix& counts, const SpatialLayout& layout,
                           const ScalingFactors& factors, const Hyperparameters& hyper, int K,
                           int R, WarmStart start)
    : counts_(counts), layout_(layout), factors_(factors), K_(K), R_(R), n_(counts.spots()),
      p_(counts.genes()), b_(hyper.abundance(K)), h_(hyper.h),
      mu_prior_{hyper.alpha_mu, hyper.beta_mu}, null_prior_{hyper.alpha_0, hyper.beta_0},
      urn_(urn_prior(hyper)), z_(std::move(start.z)), rho_(std::move(start.rho)) {
    hyper.validate(K);
    check_labels(counts, z_, rho_, K, R);
    if (layout.spots() != n_) throw std::invalid_argument("layout does not match count matrix");
    if (factors_.s.size() != n_ || factors_.g.size() != p_)
        throw std::invalid_argument("scaling factors do not match count matrix");

    gene_totals_.assign(p_, 0);
    gene_cluster_counts_.assign(p_ * static_cast<std::size_t>(K_), 0);
    spot_group_counts_.assign(static_cast<std::size_t>(R_) * n_, 0);
    block_y_.assign(static_cast<std::size_t>(R_ * K_), 0);
    group_sizes_.assign(static_cast<std::size_t>(R_ + 1), 0);
    cluster_sizes_.assign(static_cast<std::size_t>(K_), 0);

    for (int k : z_) ++cluster_sizes_[static_cast<std::size_t>(k)];
    for (std::size_t j = 0; j < p_; ++j) {
        const auto row = counts_.row(j);
        const int r = rho_[j];
        ++group_sizes_[static_cast<std::size_t>(r)];
        Count* gc = &gene_cluster_counts_[j * static_cast<std::size_t>(K_)];
        for (std::size_t i = 0; i < n_; ++i) {
            gene_totals_[j] += row[i];
            gc[z_[i]] += row[i];
        }
        if (r == 0) {
            null_y_ += gene_totals_[j];
        } else {
            Count* sg = &spot_group_counts_[static_cast<std::size_t>(r - 1) * n_];
            for (std::size_t i = 0; i < n_; ++i) sg[i] += row[i];
            for (int k = 0; k < K_; ++k) block(r, k) += gc[k];
        }
    }
    refresh_exposures();

    gene_order_.resize(p_);
    std::iota(gene_order_.begin(), gene_order_.end(), std::size_t{0});
    spot_order_.resize(n_);
    std::iota(spot_order_.begin(), spot_order_.end(), std::size_t{0});
}

void GibbsSampler::refresh_exposures() {
    group_effect_.assign(static_cast<std::size_t>(R_ + 1), 0.0);
    cluster_factor_.assign(static_cast<std::size_t>(K_), 0.0);
    total_factor_ = 0.0;
    for (std::size_t j = 0; j < p_; ++j) group_effect_[static_cast<std::size_t>(rho_[j])] += factors_.g[j];
    for (std::size_t i = 0; i < n_; ++i) {
        cluster_factor_[static_cast<std::size_t>(z_[i])] += factors_.s[i];
        total_factor_ += factors_.s[i];
    }
}

void GibbsSampler::remove_spot(std::size_t i) {
    const int k = z_[i];
    --cluster_sizes_[static_cast<std::size_t>(k)];
    cluster_factor_[static_cast<std::size_t>(k)] -= factors_.s[i];
    for (int r = 1; r <= R_; ++r)
        block(r, k) -= spot_group_counts_[static_cast<std::size_t>(r - 1) * n_ + i];
}

void GibbsSampler::insert_spot(std::size_t i, int k) {
    ++cluster_sizes_[static_cast<std::size_t>(k)];
    cluster_factor_[static_cast<std::size_t>(k)] += factors_.s[i];
    for (int r = 1; r <= R_; ++r)
        block(r, k) += spot_group_counts_[static_cast<std::size_t>(r - 1) * n_ + i];
}

void GibbsSampler::move_spot_counts(std::size_t i, int from, int to) {
    const auto K = static_cast<std::size_t>(K_);
    for (std::size_t j = 0; j < p_; ++j) {
        const Count y = counts_(j, i);
        gene_cluster_counts_[j * K + static_cast<std::size_t>(from)] -= y;
        gene_cluster_counts_[j * K + static_cast<std::size_t>(to)] += y;
    }
    z_[i] = to;
}

void GibbsSampler::remove_gene(std::size_t j) {
    const int r = rho_[j];
    --group_sizes_[static_cast<std::size_t>(r)];
    group_effect_[static_cast<std::size_t>(r)] -= factors_.g[j];
    if (r == 0) {
        null_y_ -= gene_totals_[j];
    } else {
        const Count* gc = &gene_cluster_counts_[j * static_cast<std::size_t>(K_)];
        for (int k = 0; k < K_; ++k) block(r, k) -= gc[k];
    }
}

void GibbsSampler::insert_gene(std::size_t j, int r) {
    ++group_sizes_[static_cast<std::size_t>(r)];
    group_effect_[static_cast<std::size_t>(r)] += factors_.g[j];
    if (r == 0) {
        null_y_ += gene_totals_[j];
    } else {
        const Count* gc = &gene_cluster_counts_[j * static_cast<std::size_t>(K_)];
        for (int k = 0; k < K_; ++k) block(r, k) += gc[k];
    }
}

void GibbsSampler::move_gene_counts(std::size_t j, int from, int to) {
    const auto row = counts_.row(j);
    if (from > 0) {
        Count* sg = &spot_group_counts_[static_cast<std::size_t>(from - 1) * n_];
        for (std::size_t i = 0; i < n_; ++i) sg[i] -= row[i];
    }
    if (to > 0) {
        Count* sg = &spot_group_counts_[static_cast<std::size_t>(to - 1) * n_];
        for (std::size_t i = 0; i < n_; ++i) sg[i] += row[i];
    }
    rho_[j] = to;
}

// Spot i must already be removed from the block sums.
void GibbsSampler::spot_log_weights(std::size_t i, std::vector<double>& out) const {
    mrf_log_weights(i, z_, layout_, b_, h_, out);
    const double s = factors_.s[i];
    for (int r = 1; r <= R_; ++r) {
        const double G = group_effect_[static_cast<std::size_t>(r)];
        const Count dy = spot_group_counts_[static_cast<std::size_t>(r - 1) * n_ + i];
        if (group_sizes_[static_cast<std::size_t>(r)] == 0) continue; // empty group: zero gain
        for (int k = 0; k < K_; ++k)
            out[static_cast<std::size_t>(k)] +=
                log_block_gain(block(r, k), G * cluster_factor_[static_cast<std::size_t>(k)], dy,
                               G * s, mu_prior_);
    }
}

// Gene j must already be removed from the block sums.
void GibbsSampler::gene_log_weights(std::size_t j, std::vector<double>& out) const {
    urn_log_weights(group_sizes_, urn_, out);
    const double g = factors_.g[j];
    out[0] += log_block_gain(null_y_, group_effect_[0] * total_factor_, gene_totals_[j],
                             g * total_factor_, null_prior_);
    const Count* gc = &gene_cluster_counts_[j * static_cast<std::size_t>(K_)];
    for (int r = 1; r <= R_; ++r) {
        const double G = group_effect_[static_cast<std::size_t>(r)];
        double gain = 0.0;
        for (int k = 0; k < K_; ++k) {
            const double c = cluster_factor_[static_cast<std::size_t>(k)];
            gain += log_block_gain(block(r, k), G * c, gc[k], g * c, mu_prior_);
        }
        out[static_cast<std::size_t>(r)] += gain;
    }
}

std::vector<double> GibbsSampler::spot_conditional(std::size_t i) {
    const int k0 = z_[i];
    remove_spot(i);
    spot_log_weights(i, scratch_);
    insert_spot(i, k0);
    return normalize_log_weights(scratch_);
}

std::vector<double> GibbsSampler::gene_conditional(std::size_t j) {
    const int r0 = rho_[j];
    remove_gene(j);
    gene_log_weights(j, scratch_);
    insert_gene(j, r0);
    return normalize_log_weights(scratch_);
}

int GibbsSampler::update_spot(std::size_t i, Rng& rng) {
    const int k0 = z_[i];
    remove_spot(i);
    spot_log_weights(i, scratch_);
    const int k = sample_log_categorical(scratch_, rng);
    insert_spot(i, k);
    if (k != k0) move_spot_counts(i, k0, k);
    return k;
}

int GibbsSampler::update_gene(std::size_t j, Rng& rng) {
    const int r0 = rho_[j];
    remove_gene(j);
    gene_log_weights(j, scratch_);
    const int r = sample_log_categorical(scratch_, rng);
    insert_gene(j, r);
    if (r != r0) move_gene_counts(j, r0, r);
    return r;
}

void GibbsSampler::sweep(Rng& rng) {
    // Exposure sums are re-accumulated once per sweep so that incremental
    // floating point updates never drift.
    refresh_exposures();
    std::shuffle(gene_order_.begin(), gene_order_.end(), rng);
    for (std::size_t j : gene_order_) update_gene(j, rng);
    std::shuffle(spot_order_.begin(), spot_order_.end(), rng);
    for (std::size_t i : spot_order_) update_spot(i, rng);
}

double GibbsSampler::log_posterior() const {
    double lp = log_urn_prior_labeled(group_sizes_, urn_);
    lp += log_mrf_prior_unnormalized(z_, layout_, b_, h_);
    for (int r = 1; r <= R_; ++r)
        for (int k = 0; k < K_; ++k)
            lp += log_block_marginal(
                block(r, k),
                group_effect_[static_cast<std::size_t>(r)] * cluster_factor_[static_cast<std::size_t>(k)],
                mu_prior_);
    lp += log_block_marginal(null_y_, group_effect_[0] * total_factor_, null_prior_);
    return lp;
}

BlockStats GibbsSampler::stats() const {
    BlockStats st(R_, K_);
    st.Y = block_y_;
    for (int r = 1; r <= R_; ++r)
        for (int k = 0; k < K_; ++k)
            st.s(r, k) = group_effect_[static_cast<std::size_t>(r)] *
                         cluster_factor_[static_cast<std::size_t>(k)];
    st.Y0 = null_y_;
    st.S0 = group_effect_[0] * total_factor_;
    st.gene_group_sizes = group_sizes_;
    st.spot_cluster_sizes = cluster_sizes_;
    return st;
}

ChainDraws run_chain(const CountMatrix& counts, const SpatialLayout& layout,
                     const ScalingFactors& factors, int K, int R, const Hyperparameters& hyper,
                     const McmcConfig& config, int chain) {
    config.validate();
    ChainDraws out;
    out.seed = derive_seed(config.seed, static_cast<std::uint64_t>(chain));
    Rng rng(out.seed);

    WarmStart start = config.warm ? *config.warm
                                  : random_start(counts.spots(), counts.genes(), K, R, hyper, rng);
    GibbsSampler sampler(counts, layout, factors, hyper, K, R, std::move(start));

    const auto kept = static_cast<std::size_t>(config.kept());
    out.z.reserve(kept);
    out.rho.reserve(kept);
    out.log_posterior.reserve(kept);
    out.trace.reserve(static_cast<std::size_t>(config.iterations));
    for (int t = 1; t <= config.iterations; ++t) {
        sampler.sweep(rng);
        const double lp = sampler.log_posterior();
        if (!std::isfinite(lp))
            throw std::runtime_error("collapsed log posterior became non-finite at iteration " +
                                     std::to_string(t));
        out.trace.push_back(lp);
        if (t > config.burn_in && (t - config.burn_in) % config.thin == 0 && out.z.size() < kept) {
            out.z.push_back(sampler.z());
            out.rho.push_back(sampler.rho());
            out.log_posterior.push_back(lp);
        }
    }
    return out;
}

McmcSamples run_chains(const CountMatrix& counts, const SpatialLayout& layout,
                       const ScalingFactors& factors, int K, int R, const Hyperparameters& hyper,
                       const McmcConfig& config) {
    config.validate();
    hyper.validate(K);
    McmcSamples samples;
    samples.n = static_cast<int>(counts.spots());
    samples.p = static_cast<int>(counts.genes());
    samples.K = K;
    samples.R = R;
    samples.config = config;
    samples.chains.resize(static_cast<std::size_t>(config.chains));

    std::vector<std::exception_ptr> errors(samples.chains.size());
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < config.chains; c = next++) {
            try {
                samples.chains[static_cast<std::size_t>(c)] =
                    run_chain(counts, layout, factors, K, R, hyper, config, c);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    const int workers = std::min(config.threads, config.chains);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return samples;
}

RateEstimates posterior_rate_estimates(const BlockStats& stats, const Hyperparameters& hyper) {
    RateEstimates est;
    est.R = stats.R;
    est.K = stats.K;
    est.mu.resize(stats.Y.size());
    for (std::size_t c = 0; c < stats.Y.size(); ++c)
        est.mu[c] = (hyper.alpha_mu + static_cast<double>(stats.Y[c])) / (hyper.beta_mu + stats.S[c]);
    est.mu0 = (hyper.alpha_0 + static_cast<double>(stats.Y0)) / (hyper.beta_0 + stats.S0);
    return est;
}

RateEstimates posterior_rate_estimates(const CountMatrix& counts, const ScalingFactors& factors,
                                       const Labels& z, const Labels& rho, int K, int R,
                                       const Hyperparameters& hyper) {
    return posterior_rate_estimates(recompute_stats(counts, factors, z, rho, K, R), hyper);
}

std::string format_draws(const McmcSamples& samples, int chain) {
    const auto& c = samples.chains.at(static_cast<std::size_t>(chain));
    const auto& cfg = samples.config;
    std::ostringstream out;
    out << "# bison draws v1\n";
    out << "n=" << samples.n << " p=" << samples.p << " K=" << samples.K << " R=" << samples.R
        << " iterations=" << cfg.iterations << " burn_in=" << cfg.burn_in << " thin=" << cfg.thin
        << " seed=" << cfg.seed << " chain=" << chain << '\n';
    out << "# z (1-based, n values) | rho (p values) | log_posterior\n";
    std::string line;
    for (std::size_t u = 0; u < c.z.size(); ++u) {
        line.clear();
        for (std::size_t i = 0; i < c.z[u].size(); ++i) {
            if (i) line += ' ';
            line += std::to_string(c.z[u][i] + 1);
        }
        line += " |";
        for (int r : c.rho[u]) {
            line += ' ';
            line += std::to_string(r);
        }
        line += " | ";
        line += format_real(c.log_posterior[u]);
        out << line << '\n';
    }
    return out.str();
}

void write_draws(const McmcSamples& samples, int chain, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << format_draws(samples, chain);
    if (!out) throw std::runtime_error("failed writing " + path);
}

DrawsFile parse_draws(const std::string& text) {
    DrawsFile f;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!have_header) {
            for (auto field : split_fields(line, " ")) {
                const auto eq = field.find('=');
                if (eq == std::string_view::npos) throw InputError("malformed draws header");
                const auto key = field.substr(0, eq);
                const auto val = field.substr(eq + 1);
                const long long v = parse_integer(val, key);
                if (key == "n") f.n = static_cast<int>(v);
                else if (key == "p") f.p = static_cast<int>(v);
                else if (key == "K") f.K = static_cast<int>(v);
                else if (key == "R") f.R = static_cast<int>(v);
                else if (key == "iterations") f.iterations = static_cast<int>(v);
                else if (key == "burn_in") f.burn_in = static_cast<int>(v);
                else if (key == "thin") f.thin = static_cast<int>(v);
                else if (key == "seed") f.seed = static_cast<std::uint64_t>(std::stoull(std::string(val)));
                else if (key == "chain") f.chain = static_cast<int>(v);
            }
            have_header = true;
            continue;
        }
        const auto sections = split_csv(line, '|');
        if (sections.size() != 3) throw InputError("draw record needs three sections");
        Labels z, rho;
        for (auto v : split_fields(sections[0], " ")) z.push_back(static_cast<int>(parse_integer(v, "z")) - 1);
        for (auto v : split_fields(sections[1], " ")) rho.push_back(static_cast<int>(parse_integer(v, "rho")));
        if (static_cast<int>(z.size()) != f.n || static_cast<int>(rho.size()) != f.p)
            throw InputError("draw record length does not match header");
        f.draws.z.push_back(std::move(z));
        f.draws.rho.push_back(std::move(rho));
        f.draws.log_posterior.push_back(parse_real(sections[2], "log posterior"));
    }
    if (!have_header) throw InputError("draws file has no header");
    return f;
}

DrawsFile read_draws(const std::string& path) { return parse_draws(read_file(path)); }

} // namespace bison
