#pragma once

#include "bison/types.hpp"

#include <optional>
#include <string>

namespace bison {

// Contingency-table adjusted Rand index. When the chance-corrected
// denominator vanishes (both partitions all singletons, or both a single
// cluster) the partitions are identical and 1 is returned.
double adjusted_rand_index(const Labels& a, const Labels& b);

struct DgMetrics {
    std::optional<double> sensitivity; // unset when there are no true DGs
    std::optional<double> specificity; // unset when there are no true nulls
};

// Discriminating genes (label != 0) are the positive class.
DgMetrics dg_detection_metrics(const Labels& rho_hat, const Labels& rho_true);

struct MetricReport {
    double ari_spot = 0.0;
    double ari_gene = 0.0; // null label counted as a cluster
    DgMetrics dg;
};

MetricReport evaluate_fit(const Labels& z_hat, const Labels& z_true, const Labels& rho_hat,
                          const Labels& rho_true);

// "NA" for unset values.
std::string format_optional(const std::optional<double>& v);

} // namespace bison
