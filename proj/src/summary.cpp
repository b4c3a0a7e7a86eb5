#include "bison/summary.hpp"

#include "bison/text_io.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bison {

namespace {

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

double late_slope(const std::vector<double>& trace) {
    const std::size_t start = trace.size() / 2;
    const std::size_t m = trace.size() - start;
    if (m < 2) return 0.0;
    double mx = 0.0, my = 0.0;
    for (std::size_t t = start; t < trace.size(); ++t) {
        mx += static_cast<double>(t);
        my += trace[t];
    }
    mx /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t t = start; t < trace.size(); ++t) {
        const double dx = static_cast<double>(t) - mx;
        sxy += dx * (trace[t] - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

} // namespace

Ppm compute_ppm(std::span<const Labels> draws) {
    if (draws.empty()) throw std::invalid_argument("compute_ppm needs at least one draw");
    const std::size_t m = draws.front().size();
    // Integer co-occurrence counts over the upper triangle, divided once.
    std::vector<std::uint32_t> together(m * m, 0);
    for (const auto& d : draws) {
        if (d.size() != m) throw std::invalid_argument("draws have different lengths");
        for (std::size_t a = 0; a < m; ++a) {
            const int la = d[a];
            std::uint32_t* row = &together[a * m];
            for (std::size_t b = a + 1; b < m; ++b) row[b] += (d[b] == la);
        }
    }
    Ppm ppm;
    ppm.size = m;
    ppm.values.assign(m * m, 0.0);
    const double u = static_cast<double>(draws.size());
    for (std::size_t a = 0; a < m; ++a) {
        ppm.values[a * m + a] = 1.0;
        for (std::size_t b = a + 1; b < m; ++b) {
            const double v = together[a * m + b] / u;
            ppm.values[a * m + b] = v;
            ppm.values[b * m + a] = v;
        }
    }
    return ppm;
}

double dahl_loss(const Labels& labels, const Ppm& ppm) {
    if (labels.size() != ppm.size) throw std::invalid_argument("labels do not match PPM size");
    double loss = 0.0;
    for (std::size_t a = 0; a < ppm.size; ++a) {
        const double* row = &ppm.values[a * ppm.size];
        const int la = labels[a];
        for (std::size_t b = a + 1; b < ppm.size; ++b) {
            const double d = (labels[b] == la ? 1.0 : 0.0) - row[b];
            loss += d * d;
        }
    }
    return loss;
}

std::size_t dahl_point_estimate(std::span<const Labels> draws, const Ppm& ppm) {
    if (draws.empty()) throw std::invalid_argument("dahl_point_estimate needs at least one draw");
    std::size_t best = 0;
    double best_loss = dahl_loss(draws[0], ppm);
    for (std::size_t u = 1; u < draws.size(); ++u) {
        if (draws[u] == draws[best]) continue;
        const double loss = dahl_loss(draws[u], ppm);
        if (loss < best_loss) {
            best_loss = loss;
            best = u;
        }
    }
    return best;
}

FitSummary summarize_fit(const McmcSamples& samples, const CountMatrix& counts,
                         const ScalingFactors& factors, const Hyperparameters& hyper,
                         bool keep_ppm) {
    if (samples.kept_total() == 0) throw std::invalid_argument("no kept draws to summarize");

    std::vector<Labels> pooled_z, pooled_rho;
    const std::vector<Labels>* z_draws = &samples.chains.front().z;
    const std::vector<Labels>* rho_draws = &samples.chains.front().rho;
    if (samples.chains.size() > 1) {
        pooled_z.reserve(samples.kept_total());
        pooled_rho.reserve(samples.kept_total());
        for (const auto& c : samples.chains) {
            pooled_z.insert(pooled_z.end(), c.z.begin(), c.z.end());
            pooled_rho.insert(pooled_rho.end(), c.rho.begin(), c.rho.end());
        }
        z_draws = &pooled_z;
        rho_draws = &pooled_rho;
    }

    FitSummary fit;
    fit.n = samples.n;
    fit.p = samples.p;
    fit.K = samples.K;
    fit.R = samples.R;
    fit.ppm_spot = compute_ppm(*z_draws);
    fit.ppm_gene = compute_ppm(*rho_draws);
    fit.z_draw = dahl_point_estimate(*z_draws, fit.ppm_spot);
    fit.rho_draw = dahl_point_estimate(*rho_draws, fit.ppm_gene);
    fit.z_hat = (*z_draws)[fit.z_draw];
    fit.rho_hat = (*rho_draws)[fit.rho_draw];

    const BlockStats st = recompute_stats(counts, factors, fit.z_hat, fit.rho_hat, fit.K, fit.R);
    fit.rates = posterior_rate_estimates(st, hyper);
    fit.p0_hat = st.null_size();
    fit.pi0_hat = (hyper.alpha_pi + fit.p0_hat) / (hyper.alpha_pi + hyper.beta_pi + fit.p);
    fit.realized_K = st.realized_clusters();
    fit.realized_R = st.realized_groups();

    for (const auto& c : samples.chains) {
        ChainDiagnostics d;
        d.seed = c.seed;
        d.kept = c.z.size();
        if (!c.log_posterior.empty()) {
            double sum = 0.0;
            for (double v : c.log_posterior) sum += v;
            d.mean_log_posterior = sum / static_cast<double>(c.log_posterior.size());
            d.max_log_posterior = *std::max_element(c.log_posterior.begin(), c.log_posterior.end());
            d.final_log_posterior = c.log_posterior.back();
            d.late_slope = late_slope(c.log_posterior) / samples.config.thin;
        }
        fit.chains.push_back(d);
    }
    if (!keep_ppm) {
        fit.ppm_spot = Ppm{};
        fit.ppm_gene = Ppm{};
    }
    return fit;
}

std::string summary_json(const FitSummary& fit, double micl) {
    nlohmann::ordered_json doc;
    doc["n"] = fit.n;
    doc["p"] = fit.p;
    doc["K"] = fit.K;
    doc["R"] = fit.R;
    doc["realized_K"] = fit.realized_K;
    doc["realized_R"] = fit.realized_R;
    doc["p0_hat"] = fit.p0_hat;
    doc["pi0_hat"] = fit.pi0_hat;
    doc["micl"] = micl;
    doc["mu0_hat"] = fit.rates.mu0;
    auto mu = nlohmann::ordered_json::array();
    for (int r = 1; r <= fit.R; ++r) {
        auto row = nlohmann::ordered_json::array();
        for (int k = 0; k < fit.K; ++k) row.push_back(fit.rates.at(r, k));
        mu.push_back(row);
    }
    doc["mu_hat"] = mu;
    auto z = nlohmann::ordered_json::array();
    for (int k : fit.z_hat) z.push_back(k + 1);
    doc["z_hat"] = z;
    doc["rho_hat"] = fit.rho_hat;
    doc["z_draw_index"] = fit.z_draw;
    doc["rho_draw_index"] = fit.rho_draw;
    auto chains = nlohmann::ordered_json::array();
    for (const auto& c : fit.chains) {
        chains.push_back({{"seed", c.seed},
                          {"kept", c.kept},
                          {"mean_log_posterior", c.mean_log_posterior},
                          {"max_log_posterior", c.max_log_posterior},
                          {"final_log_posterior", c.final_log_posterior},
                          {"late_slope", c.late_slope}});
    }
    doc["chains"] = chains;
    return doc.dump(2) + "\n";
}

void write_spot_table(const FitSummary& fit, const std::vector<std::string>& spot_ids,
                      const std::vector<Point>& coords, const std::string& path) {
    std::ostringstream out;
    out << "spot_id,x,y,z_hat\n";
    for (std::size_t i = 0; i < fit.z_hat.size(); ++i)
        out << spot_ids[i] << ',' << format_real(coords[i].x) << ',' << format_real(coords[i].y)
            << ',' << fit.z_hat[i] + 1 << '\n';
    write_text(path, out.str());
}

void write_gene_table(const FitSummary& fit, const std::vector<std::string>& gene_ids,
                      const std::string& path) {
    std::ostringstream out;
    out << "gene_id,rho_hat\n";
    for (std::size_t j = 0; j < fit.rho_hat.size(); ++j)
        out << gene_ids[j] << ',' << fit.rho_hat[j] << '\n';
    write_text(path, out.str());
}

void write_mu_table(const FitSummary& fit, const std::string& path) {
    std::ostringstream out;
    out << "group,cluster,mu_hat\n";
    for (int r = 1; r <= fit.R; ++r)
        for (int k = 0; k < fit.K; ++k)
            out << r << ',' << k + 1 << ',' << format_real(fit.rates.at(r, k)) << '\n';
    out << "0,0," << format_real(fit.rates.mu0) << '\n';
    write_text(path, out.str());
}

void write_ppm(const Ppm& ppm, const std::vector<std::string>& ids, const std::string& path) {
    std::ostringstream out;
    out << "id";
    for (const auto& id : ids) out << ',' << id;
    out << '\n';
    for (std::size_t a = 0; a < ppm.size; ++a) {
        out << ids[a];
        for (std::size_t b = 0; b < ppm.size; ++b) out << ',' << format_real(ppm(a, b));
        out << '\n';
    }
    write_text(path, out.str());
}

} // namespace bison
