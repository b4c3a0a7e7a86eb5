#include "doctest.h"

#include "oracles.hpp"

#include "bison/evaluate.hpp"

#include <random>

using namespace bison;

TEST_CASE("adjusted Rand index values") {
    CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) == doctest::Approx(-0.5));
    CHECK(adjusted_rand_index({0, 0, 0}, {5, 5, 5}) == 1.0);
    CHECK(adjusted_rand_index({0, 1, 2}, {2, 0, 1}) == 1.0);
    CHECK_THROWS(adjusted_rand_index({0, 1}, {0}));
    CHECK_THROWS(adjusted_rand_index({0}, {0}));
}

TEST_CASE("adjusted Rand index matches pair counting and ignores label names") {
    std::mt19937 gen(6);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + gen() % 30;
        Labels a(n), b(n);
        for (auto& x : a) x = static_cast<int>(gen() % 4);
        for (auto& x : b) x = static_cast<int>(gen() % 3);
        const double ari = adjusted_rand_index(a, b);
        CHECK(ari == doctest::Approx(oracle::ari_by_pairs(a, b)).epsilon(1e-10));
        CHECK(ari == doctest::Approx(adjusted_rand_index(b, a)));
        Labels renamed = a;
        for (auto& x : renamed) x = 10 - 3 * x;
        CHECK(adjusted_rand_index(renamed, b) == doctest::Approx(ari));
    }
}

TEST_CASE("detection metrics") {
    auto m = dg_detection_metrics({0, 1, 2, 0}, {0, 2, 1, 0});
    CHECK(*m.sensitivity == 1.0);
    CHECK(*m.specificity == 1.0);

    m = dg_detection_metrics({0, 0, 0, 0}, {0, 0, 1, 3});
    CHECK(*m.sensitivity == 0.0);
    CHECK(*m.specificity == 1.0);

    m = dg_detection_metrics({1, 1}, {1, 2});
    CHECK(*m.sensitivity == 1.0);
    CHECK_FALSE(m.specificity.has_value());
    CHECK(format_optional(m.specificity) == "NA");

    std::mt19937 gen(2);
    for (int trial = 0; trial < 30; ++trial) {
        Labels hat(40), truth(40);
        for (auto& x : hat) x = static_cast<int>(gen() % 3);
        for (auto& x : truth) x = static_cast<int>(gen() % 3);
        double tp = 0, fn = 0, tn = 0, fp = 0;
        for (std::size_t j = 0; j < 40; ++j) {
            const bool pos = truth[j] != 0, called = hat[j] != 0;
            tp += pos && called;
            fn += pos && !called;
            tn += !pos && !called;
            fp += !pos && called;
        }
        m = dg_detection_metrics(hat, truth);
        if (tp + fn > 0) CHECK(*m.sensitivity == doctest::Approx(tp / (tp + fn)));
        if (tn + fp > 0) CHECK(*m.specificity == doctest::Approx(tn / (tn + fp)));
    }
}

TEST_CASE("metric report") {
    const auto r = evaluate_fit({0, 0, 1, 1}, {1, 1, 0, 0}, {0, 1, 2}, {0, 2, 2});
    CHECK(r.ari_spot == doctest::Approx(1.0));
    CHECK(r.ari_gene == doctest::Approx(adjusted_rand_index({0, 1, 2}, {0, 2, 2})));
    CHECK(*r.dg.sensitivity == 1.0);
    CHECK(*r.dg.specificity == 1.0);
}
