#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Nothing here calls into the library's likelihood or prior code.

#include "bison/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

using bison::Count;
using bison::Labels;

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                           double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

// Adaptive Simpson on [a, b] with absolute tolerance tol.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// log of  integral prod_c Poi(y_c | e_c mu) Ga(mu | shape, rate) dmu,
// integrated numerically in t = log mu after shifting by the peak.
inline double log_block_by_quadrature(const std::vector<Count>& y, const std::vector<double>& e,
                                      double shape, double rate) {
    double Y = 0.0, S = 0.0, cell_const = 0.0;
    for (std::size_t c = 0; c < y.size(); ++c) {
        const double yc = static_cast<double>(y[c]);
        Y += yc;
        S += e[c];
        cell_const += (yc > 0 ? yc * std::log(e[c]) : 0.0) - std::lgamma(yc + 1.0);
    }
    const double a = shape + Y, b = rate + S;
    // integrand in t: exp(a t - b e^t) times constants
    auto g = [&](double t) { return a * t - b * std::exp(t); };
    const double t_star = std::log(a / b);
    const double peak = g(t_star);
    auto f = [&](double t) { return std::exp(g(t) - peak); };
    const double lo = t_star - 80.0 / a - 10.0, hi = t_star + 6.0;
    // split at the peak so the bulk is resolved
    const double body = integrate(f, lo, t_star, 1e-14) + integrate(f, t_star, hi, 1e-14);
    return shape * std::log(rate) - std::lgamma(shape) + cell_const + peak + std::log(body);
}

// ---------------------------------------------------------------------------
// Collapsed joint, written directly from the model definition.

struct Model {
    const bison::CountMatrix* Y;
    std::vector<double> s, g;
    const bison::SpatialLayout* layout;
    bison::Hyperparameters hp;
    int K, R;
};

inline double log_beta_fn(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

inline double gamma_poisson(double Y, double S, double a, double b) {
    return a * std::log(b) - std::lgamma(a) + std::lgamma(a + Y) - (a + Y) * std::log(b + S);
}

// Partition prior of the zero-inflated urn, pi0 integrated out.
inline double urn_partition(const Labels& rho, int R, double gamma, double a, double b) {
    std::vector<int> sizes(static_cast<std::size_t>(R + 1), 0);
    for (int r : rho) ++sizes[static_cast<std::size_t>(r)];
    const int p = static_cast<int>(rho.size());
    const int p0 = sizes[0];
    double out = log_beta_fn(a + p0, b + p - p0) - log_beta_fn(a, b);
    for (int r = 1; r <= R; ++r)
        if (sizes[static_cast<std::size_t>(r)] > 0) out += std::log(gamma) + std::lgamma(sizes[static_cast<std::size_t>(r)]);
    for (int t = 1; t <= p - p0; ++t) out -= std::log(gamma + t - 1);
    return out;
}

// Partition prior spread over the R!/(R-m)! labellings of m occupied groups.
inline double urn_labelled(const Labels& rho, int R, double gamma, double a, double b) {
    std::vector<int> sizes(static_cast<std::size_t>(R + 1), 0);
    for (int r : rho) ++sizes[static_cast<std::size_t>(r)];
    int m = 0;
    for (int r = 1; r <= R; ++r) m += sizes[static_cast<std::size_t>(r)] > 0;
    double out = urn_partition(rho, R, gamma, a, b);
    for (int t = 0; t < m; ++t) out -= std::log(static_cast<double>(R - t));
    return out;
}

inline double mrf(const Labels& z, const bison::SpatialLayout& layout, const std::vector<double>& b, double h) {
    double out = 0.0;
    const std::size_t n = z.size();
    for (std::size_t i = 0; i < n; ++i) out += b[static_cast<std::size_t>(z[i])];
    const auto dense = layout.dense();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k)
            if (dense[i * n + k] && z[i] == z[k]) out += h;
    return out;
}

// log p(z, rho | Y) up to a constant that does not depend on (z, rho).
inline double log_joint(const Model& m, const Labels& z, const Labels& rho) {
    const auto& Y = *m.Y;
    const std::size_t p = Y.genes(), n = Y.spots();
    std::vector<double> ysum(static_cast<std::size_t>(m.R * m.K), 0.0), esum(ysum.size(), 0.0);
    double y0 = 0.0, e0 = 0.0;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t i = 0; i < n; ++i) {
            const double y = static_cast<double>(Y(j, i));
            const double e = m.s[i] * m.g[j];
            if (rho[j] == 0) {
                y0 += y;
                e0 += e;
            } else {
                const auto idx = static_cast<std::size_t>((rho[j] - 1) * m.K + z[i]);
                ysum[idx] += y;
                esum[idx] += e;
            }
        }
    double out = 0.0;
    for (std::size_t c = 0; c < ysum.size(); ++c) out += gamma_poisson(ysum[c], esum[c], m.hp.alpha_mu, m.hp.beta_mu);
    out += gamma_poisson(y0, e0, m.hp.alpha_0, m.hp.beta_0);
    out += urn_labelled(rho, m.R, m.hp.gamma, m.hp.alpha_pi, m.hp.beta_pi);
    out += mrf(z, *m.layout, m.hp.abundance(m.K), m.hp.h);
    return out;
}

// Enumerates all label vectors of length len over {lo..hi}.
template <typename F>
void for_each_labelling(std::size_t len, int lo, int hi, F&& visit) {
    Labels x(len, lo);
    while (true) {
        visit(static_cast<const Labels&>(x));
        std::size_t pos = 0;
        while (pos < len && x[pos] == hi) x[pos++] = lo;
        if (pos == len) return;
        ++x[pos];
    }
}

inline std::vector<double> normalise_logs(const std::vector<double>& logs) {
    const double mx = *std::max_element(logs.begin(), logs.end());
    std::vector<double> out(logs.size());
    double total = 0.0;
    for (std::size_t c = 0; c < logs.size(); ++c) total += out[c] = std::exp(logs[c] - mx);
    for (double& v : out) v /= total;
    return out;
}

// Contingency-free ARI from pair counts over all i < k.
inline double ari_by_pairs(const Labels& a, const Labels& b) {
    const std::size_t n = a.size();
    double both = 0, only_a = 0, only_b = 0, pairs = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
            const bool sa = a[i] == a[k], sb = b[i] == b[k];
            both += sa && sb;
            only_a += sa;
            only_b += sb;
            ++pairs;
        }
    const double expected = only_a * only_b / pairs;
    const double max_index = 0.5 * (only_a + only_b);
    if (max_index == expected) return 1.0;
    return (both - expected) / (max_index - expected);
}

inline std::vector<double> ranks(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t a = 0; a < idx.size();) {
        std::size_t b = a;
        while (b + 1 < idx.size() && v[idx[b + 1]] == v[idx[a]]) ++b;
        const double avg = 0.5 * static_cast<double>(a + b) + 1.0;
        for (std::size_t c = a; c <= b; ++c) r[idx[c]] = avg;
        a = b + 1;
    }
    return r;
}

inline double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

} // namespace oracle
