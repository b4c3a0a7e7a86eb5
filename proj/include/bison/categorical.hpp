#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bison {

using Rng = std::mt19937_64;

// Independent stream seed for (seed, stream) via SplitMix64 mixing.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

double log_sum_exp(std::span<const double> log_weights);

// exp(w - logsumexp(w)).
std::vector<double> normalize_log_weights(std::span<const double> log_weights);

// Draws an index with probability proportional to exp(log_weights), shifting
// by the maximum before exponentiating.
int sample_log_categorical(std::span<const double> log_weights, Rng& rng);

double uniform01(Rng& rng);

} // namespace bison
