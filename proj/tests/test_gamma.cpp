#include <catch2/catch_amalgamated.hpp>

#include <ocshuffle/gamma.hpp>

#include "oracles.hpp"

#include <random>

using namespace ocshuffle;

TEST_CASE("norm_dist and cmod2 pointwise") {
    REQUIRE(norm_dist(0.5) == 0.5);
    REQUIRE(norm_dist(1.0005) == Catch::Approx(0.0005).margin(1e-15));
    REQUIRE(norm_dist(-0.3) == Catch::Approx(0.3).margin(1e-15));
    REQUIRE(norm_dist(7.0) == 0.0);

    REQUIRE(cmod2(2.0) == 0.0);
    REQUIRE(cmod2(1.0005) == Catch::Approx(-0.9995).margin(1e-15));
    REQUIRE(cmod2(1.0) == 1.0);   // boundary maps to +1
    REQUIRE(cmod2(-1.0) == 1.0);
    REQUIRE(cmod2(-0.25) == -0.25);
}

TEST_CASE("half-angle identity ties the two range reductions together") {
    // 4 ||y/2||^2 == (y cmod 2)^2 for all real y.
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> U(-50.0, 50.0);
    for (int rep = 0; rep < 2000; ++rep) {
        const double y = U(rng);
        const double lhs = 4.0 * norm_dist(y / 2.0) * norm_dist(y / 2.0);
        const double rhs = cmod2(y) * cmod2(y);
        REQUIRE(lhs == Catch::Approx(rhs).margin(1e-12));
    }
    REQUIRE(4.0 * norm_dist(0.5) * norm_dist(0.5) == cmod2(1.0) * cmod2(1.0));
}

TEST_CASE("gamma term fixed values") {
    {
        auto t = gamma_term(ShuffleParams(1000, 500), 4);
        REQUIRE(t.r == 0);
        REQUIRE(t.quad == 8000);
        REQUIRE(t.value == Catch::Approx(4.0 * pi * pi / 1e6).epsilon(1e-15));
    }
    {
        // 3 * 657 = 1971 = -29 mod 2000
        auto t = gamma_term(ShuffleParams(1000, 343), 3);
        REQUIRE(t.r == -29);
        REQUIRE(t.quad == 3928);
        REQUIRE(t.value == Catch::Approx(3928.0 * pi * pi / 2e9).epsilon(1e-15));
    }
    REQUIRE_THROWS_AS(gamma_term(ShuffleParams(10, 3), 0), std::domain_error);
}

TEST_CASE("gamma term is even in m") {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 300; ++rep) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 5000);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % (n - 1));
        const std::int64_t m = 1 + static_cast<std::int64_t>(rng() % (3 * n));
        ShuffleParams p(n, k);
        auto a = gamma_term(p, m);
        auto b = gamma_term(p, -m);
        REQUIRE(a.quad == b.quad);
        REQUIRE(a.value == b.value);
        REQUIRE(std::abs(a.r) != static_cast<std::int64_t>(p.n) + 1);  // residue in range
        REQUIRE(a.r > -p.n);
        REQUIRE(a.r <= p.n);
    }
}

TEST_CASE("three evaluations of the functional agree to 1e-12") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 3000; ++rep) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 1000000);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % (n - 1));
        std::int64_t m = 1 + static_cast<std::int64_t>(rng() % 1000000);
        if (rng() & 1) m = -m;
        const double exact = gamma_term(ShuffleParams(n, k), m).value;
        const double norm_form = oracles::gamma_norm_form(n, k, m);
        const double cmod_form = oracles::gamma_cmod_form(n, k, m);
        REQUIRE(norm_form == Catch::Approx(exact).epsilon(1e-12));
        REQUIRE(cmod_form == Catch::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("gamma minimum fixed values") {
    {
        auto g = gamma_min(ShuffleParams(1000, 500));
        REQUIRE(g.m_star == 4);
        REQUIRE(g.r == 0);
        REQUIRE(g.quad == 8000);
        REQUIRE(g.value == Catch::Approx(4.0 * pi * pi / 1e6).epsilon(1e-15));
    }
    {
        auto g = gamma_min(ShuffleParams(100, 99));
        REQUIRE(g.m_star == 1);
        REQUIRE(g.quad == 100);  // k m^2 + r^2 = n exactly at the minimum
        REQUIRE(g.value == Catch::Approx(pi * pi / 2e4).epsilon(1e-15));
    }
    {
        auto g = gamma_min(ShuffleParams(100, 1));
        REQUIRE(g.m_star == 2);
        REQUIRE(g.quad == 8);
        REQUIRE(g.value == Catch::Approx(4.0 * pi * pi / 1e6).epsilon(1e-15));
    }
}

TEST_CASE("search bound never misses the global minimizer") {
    // Brute force far past the bound; the restricted search must match.
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 60; ++rep) {
        const std::int64_t n = 5 + static_cast<std::int64_t>(rng() % 196);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % (n - 1));
        auto g = gamma_min(ShuffleParams(n, k));
        auto brute = oracles::gamma_brute_min(n, k, 4 * n);
        REQUIRE(g.quad == brute.quad);
        REQUIRE(g.m_star <= g.search_bound);
        REQUIRE(brute.m_star <= g.search_bound);
    }
}

TEST_CASE("continued fraction expansion fixed values") {
    {
        auto cf = cf_expand(1, 4);
        REQUIRE(cf.quotients == std::vector<std::int64_t>{0, 4});
        REQUIRE(cf.convergents.size() == 2);
        REQUIRE(cf.convergents[0] == std::make_pair<std::int64_t, std::int64_t>(0, 1));
        REQUIRE(cf.convergents[1] == std::make_pair<std::int64_t, std::int64_t>(1, 4));
    }
    {
        auto cf = cf_expand(191, 1000);
        REQUIRE(cf.quotients == std::vector<std::int64_t>{0, 5, 4, 4, 11});
        std::vector<std::int64_t> dens;
        for (auto& [p, q] : cf.convergents) dens.push_back(q);
        REQUIRE(dens == std::vector<std::int64_t>{1, 5, 21, 89, 1000});
        REQUIRE(cf.convergents.back().first == 191);
    }
    {
        auto cf = cf_expand(0, 1);
        REQUIRE(cf.quotients == std::vector<std::int64_t>{0});
        REQUIRE(cf.convergents.size() == 1);
        REQUIRE(cf.convergents[0] == std::make_pair<std::int64_t, std::int64_t>(0, 1));
    }
    REQUIRE_THROWS_AS(cf_expand(3, 3), std::domain_error);
    REQUIRE_THROWS_AS(cf_expand(-1, 3), std::domain_error);
}

TEST_CASE("continued fraction structure on shuffle inputs") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 200; ++rep) {
        const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 20000);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % (n - 1));
        auto cf = cf_expand(n - k, 2 * n);
        // Determinant identity p_j q_{j-1} - p_{j-1} q_j = (-1)^(j-1).
        for (std::size_t j = 1; j < cf.convergents.size(); ++j) {
            const auto [pj, qj] = cf.convergents[j];
            const auto [pp, qp] = cf.convergents[j - 1];
            REQUIRE(pj * qp - pp * qj == (j % 2 == 1 ? 1 : -1));
            REQUIRE(qj > qp);  // denominators strictly increase (x < 1/2 here)
        }
        // The last convergent recovers the reduced input.
        REQUIRE(cf.convergents.back().first == cf.num);
        REQUIRE(cf.convergents.back().second == cf.den);
        // Partial quotients past a0 are positive.
        for (std::size_t j = 1; j < cf.quotients.size(); ++j) REQUIRE(cf.quotients[j] >= 1);
    }
}

TEST_CASE("continued fraction search equals the exhaustive search") {
    {
        auto g = gamma_min_cf(ShuffleParams(1000, 618));
        REQUIRE(g.m_star == 5);
        REQUIRE(g.quad == 23550);  // 618*25 + 90^2
        REQUIRE(g.value == Catch::Approx(23550.0 * pi * pi / 2e9).epsilon(1e-15));
    }
    for (std::int64_t n : {100, 1000}) {
        for (std::int64_t k = 1; k < n; ++k) {
            auto a = gamma_min(ShuffleParams(n, k));
            auto b = gamma_min_cf(ShuffleParams(n, k));
            REQUIRE(a.quad == b.quad);
            REQUIRE(a.value == b.value);
        }
    }
}

TEST_CASE("global bounds at n = 1000") {
    const std::int64_t n = 1000;
    for (std::int64_t k = 1; k < n; ++k) {
        auto g = gamma_min(ShuffleParams(n, k));
        // Upper bound quad <= 4 n sqrt(k), checked exactly as quad^2 <= 16 n^2 k.
        REQUIRE(static_cast<__int128>(g.quad) * g.quad <=
                static_cast<__int128>(16) * n * n * k);
        // Lower bound quad >= 8, equality at k = 1.
        REQUIRE(g.quad >= 8);
        if (k == 1) REQUIRE(g.quad == 8);
    }
}
