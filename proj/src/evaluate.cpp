#include "bison/evaluate.hpp"

#include "bison/text_io.hpp"

#include <map>
#include <stdexcept>

namespace bison {

namespace {

double choose2(long long x) { return x < 2 ? 0.0 : 0.5 * static_cast<double>(x) * static_cast<double>(x - 1); }

} // namespace

double adjusted_rand_index(const Labels& a, const Labels& b) {
    if (a.size() != b.size()) throw std::invalid_argument("ARI inputs differ in length");
    if (a.size() < 2) throw std::invalid_argument("ARI needs at least two elements");

    std::map<std::pair<int, int>, long long> cells;
    std::map<int, long long> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++cells[{a[i], b[i]}];
        ++rows[a[i]];
        ++cols[b[i]];
    }
    double index = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, c] : cells) index += choose2(c);
    for (const auto& [key, c] : rows) sum_a += choose2(c);
    for (const auto& [key, c] : cols) sum_b += choose2(c);

    const double expected = sum_a * sum_b / choose2(static_cast<long long>(a.size()));
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

DgMetrics dg_detection_metrics(const Labels& rho_hat, const Labels& rho_true) {
    if (rho_hat.size() != rho_true.size()) throw std::invalid_argument("gene label vectors differ in length");
    long long tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t j = 0; j < rho_hat.size(); ++j) {
        const bool truth = rho_true[j] != 0;
        const bool called = rho_hat[j] != 0;
        if (truth && called) ++tp;
        else if (truth) ++fn;
        else if (called) ++fp;
        else ++tn;
    }
    DgMetrics m;
    if (tp + fn > 0) m.sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tn + fp > 0) m.specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return m;
}

MetricReport evaluate_fit(const Labels& z_hat, const Labels& z_true, const Labels& rho_hat,
                          const Labels& rho_true) {
    return {adjusted_rand_index(z_hat, z_true), adjusted_rand_index(rho_hat, rho_true),
            dg_detection_metrics(rho_hat, rho_true)};
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_real(*v) : std::string("NA");
}

} // namespace bison
