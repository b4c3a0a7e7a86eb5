#include "doctest.h"

#include "bison/types.hpp"

#include <random>

using namespace bison;

TEST_CASE("count matrix validation") {
    CHECK_NOTHROW(CountMatrix(2, 2, {1, 0, 0, 1}));
    CHECK_THROWS_AS(CountMatrix(1, 2, {1, -1}), InputError);
    CHECK_THROWS_AS(CountMatrix(1, 1, {3}), InputError);
    CHECK_THROWS_AS(CountMatrix(2, 2, {1, 2, 3}), InputError);

    try {
        CountMatrix(2, 2, {1, 2, 0, 0}, {"Actb", "Gapdh"}, {"a", "b"});
        FAIL("all-zero gene accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("Gapdh") != std::string::npos);
    }
    try {
        CountMatrix(2, 3, {1, 0, 2, 1, 0, 2}, {}, {"a", "b", "c"});
        FAIL("all-zero spot accepted");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("b") != std::string::npos);
    }

    const CountMatrix m(2, 3, {1, 2, 3, 4, 5, 6});
    CHECK(m.gene_ids() == std::vector<std::string>{"g1", "g2"});
    CHECK(m.spot_ids() == std::vector<std::string>{"s1", "s2", "s3"});
    CHECK(m(1, 2) == 6);
    CHECK(m.total() == 21);
}

TEST_CASE("label checks") {
    const CountMatrix Y(2, 3, {1, 1, 1, 1, 1, 1});
    CHECK_NOTHROW(check_labels(Y, {0, 1, 1}, {0, 2}, 2, 2));
    CHECK_THROWS_AS(check_labels(Y, {0, 2, 1}, {0, 1}, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_labels(Y, {0, 1}, {0, 1}, 2, 1), std::invalid_argument);
    CHECK_THROWS_AS(check_labels(Y, {0, 1, 1}, {0, 3}, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(check_labels(Y, {0, 1, 1}, {-1, 1}, 2, 2), std::invalid_argument);
}

TEST_CASE("block statistics on tiny inputs") {
    const CountMatrix Y(2, 2, {1, 1, 1, 1});
    const ScalingFactors f{{0.5, 0.5}, {2.0, 2.0}};
    auto st = recompute_stats(Y, f, {0, 0}, {1, 1}, 1, 1);
    CHECK(st.y(1, 0) == 4);
    CHECK(st.s(1, 0) == doctest::Approx(4.0));
    CHECK(st.Y0 == 0);
    CHECK(st.gene_group_sizes == std::vector<int>{0, 2});

    st = recompute_stats(Y, f, {0, 1}, {0, 0}, 2, 1);
    CHECK(st.y(1, 0) == 0);
    CHECK(st.y(1, 1) == 0);
    CHECK(st.Y0 == Y.total());
    CHECK(st.S0 == doctest::Approx(4.0));
    CHECK(st.null_size() == 2);
    CHECK(st.realized_groups() == 0);
    CHECK(st.realized_clusters() == 2);
}

TEST_CASE("block statistics match a brute-force sum") {
    std::mt19937 gen(11);
    const std::size_t p = 6, n = 8;
    const int K = 3, R = 2;
    std::vector<Count> v(p * n);
    for (auto& x : v) x = 1 + static_cast<Count>(gen() % 9);
    const CountMatrix Y(p, n, v);
    ScalingFactors f;
    for (std::size_t i = 0; i < n; ++i) f.s.push_back(0.1 + 0.05 * static_cast<double>(gen() % 10));
    for (std::size_t j = 0; j < p; ++j) f.g.push_back(1.0 + static_cast<double>(gen() % 5));
    for (int trial = 0; trial < 20; ++trial) {
        Labels z(n), rho(p);
        for (auto& x : z) x = static_cast<int>(gen() % K);
        for (auto& x : rho) x = static_cast<int>(gen() % (R + 1));
        const auto st = recompute_stats(Y, f, z, rho, K, R);
        Count total = st.Y0;
        for (int r = 1; r <= R; ++r)
            for (int k = 0; k < K; ++k) {
                Count y = 0;
                double s = 0;
                for (std::size_t j = 0; j < p; ++j)
                    for (std::size_t i = 0; i < n; ++i)
                        if (rho[j] == r && z[i] == k) {
                            y += Y(j, i);
                            s += f.s[i] * f.g[j];
                        }
                CHECK(st.y(r, k) == y);
                CHECK(st.s(r, k) == doctest::Approx(s).epsilon(1e-12));
                total += st.y(r, k);
            }
        CHECK(total == Y.total());
        int sizes = 0;
        for (int c : st.gene_group_sizes) sizes += c;
        CHECK(sizes == static_cast<int>(p));
    }
}

TEST_CASE("hyperparameter validation and abundance broadcast") {
    Hyperparameters hp;
    CHECK(hp.abundance(3) == std::vector<double>{1, 1, 1});
    hp.b = {0.5};
    CHECK(hp.abundance(2) == std::vector<double>{0.5, 0.5});
    hp.b = {0.5, 2.0};
    CHECK_NOTHROW(hp.validate(2));
    CHECK_THROWS(hp.validate(3));
    hp = Hyperparameters{};
    hp.gamma = 0.0;
    CHECK_THROWS(hp.validate(2));
    hp = Hyperparameters{};
    hp.beta_mu = -1.0;
    CHECK_THROWS(hp.validate(2));
}

TEST_CASE("spatial layout basics") {
    const SpatialLayout L({{0, 0}, {1, 0}, {2, 0}}, {{0, 1}, {1, 0}, {2, 1}});
    CHECK(L.edge_count() == 2);
    CHECK(L.adjacent(0, 1));
    CHECK_FALSE(L.adjacent(0, 2));
    CHECK(L.neighbors(1).size() == 2);
    CHECK(L.edges() == std::vector<std::pair<int, int>>{{0, 1}, {1, 2}});
    CHECK(L.dense() == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 1, 0});
}
