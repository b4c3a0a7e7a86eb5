#include "bison/categorical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bison {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

double log_sum_exp(std::span<const double> log_weights) {
    if (log_weights.empty()) throw std::invalid_argument("log_sum_exp of an empty range");
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (top == -std::numeric_limits<double>::infinity()) return top;
    double sum = 0.0;
    for (double w : log_weights) sum += std::exp(w - top);
    return top + std::log(sum);
}

std::vector<double> normalize_log_weights(std::span<const double> log_weights) {
    const double lse = log_sum_exp(log_weights);
    std::vector<double> out(log_weights.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(log_weights[i] - lse);
    return out;
}

double uniform01(Rng& rng) {
    // 53 random bits, in [0, 1).
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int sample_log_categorical(std::span<const double> log_weights, Rng& rng) {
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(top)) throw std::runtime_error("categorical weights are not finite");
    double weights[64];
    std::vector<double> heap;
    double* w = weights;
    if (log_weights.size() > 64) {
        heap.resize(log_weights.size());
        w = heap.data();
    }
    double total = 0.0;
    for (std::size_t k = 0; k < log_weights.size(); ++k) {
        w[k] = std::exp(log_weights[k] - top);
        total += w[k];
    }
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < log_weights.size(); ++k) {
        acc += w[k];
        if (u < acc) return static_cast<int>(k);
    }
    return static_cast<int>(log_weights.size() - 1);
}

} // namespace bison
