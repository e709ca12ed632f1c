#include "coinrisk/bubbles.hpp"
#include "coinrisk/error.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

using namespace coinrisk;
using namespace coinrisk::bubbles;
using Catch::Approx;

TEST_CASE("ADF statistic matches brute-force OLS", "[bubbles]") {
    for (int p : {0, 1, 3}) {
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto y = oracle::random_walk(120, seed);
            CHECK(adf_stat(y, {p, false}) == Approx(oracle::adf_tratio(y, p)).epsilon(1e-9));
        }
    }
}

TEST_CASE("ADF on a random walk is rarely large", "[bubbles]") {
    int below = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        if (adf_stat(oracle::random_walk(400, 100 + seed)) < 1.5) ++below;
    }
    CHECK(below >= 190);
}

TEST_CASE("ADF detects an explosive root", "[bubbles]") {
    std::mt19937_64 g(7);
    std::normal_distribution<double> z(0.0, 0.01);
    std::vector<double> y(200);
    y[0] = 1.0;
    for (std::size_t t = 1; t < y.size(); ++t) y[t] = 1.05 * y[t - 1] + z(g);
    CHECK(adf_stat(y) > 2.0);
}

TEST_CASE("ADF rejects constant and short input", "[bubbles]") {
    CHECK_THROWS_AS(adf_stat(std::vector<double>(50, 3.0)), NumericalError);
    CHECK_THROWS_AS(adf_stat(std::vector<double>{1.0, 2.0, 3.0}), std::invalid_argument);
}

TEST_CASE("BSADF at r2 = r0 is a single-window ADF", "[bubbles]") {
    const auto y = oracle::random_walk(200, 5);
    const std::size_t w = window_from_fraction(0.25, y.size());
    const std::span<const double> first(y.data(), w);
    CHECK(bsadf_at(y, 0.25, 0.25) == Approx(adf_stat(first)).epsilon(1e-12));
}

TEST_CASE("BSADF dominates the full-window ADF", "[bubbles][property]") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto y = oracle::random_walk(150, 40 + seed);
        const double r2 = 0.8;
        const std::size_t end = window_from_fraction(r2, y.size());
        CHECK(bsadf_at(y, r2, 0.2) >= adf_stat(std::span<const double>(y.data(), end)));
    }
}

TEST_CASE("BSADF on a 30-point series is the max of its windows", "[bubbles]") {
    std::mt19937_64 g(3);
    std::normal_distribution<double> z;
    std::vector<double> y(30);
    double s = 0;
    for (auto& v : y) v = (s += z(g));
    // r0 = 0.5 -> minimum window 15 levels; windows ending at index 29 start at 0..15.
    double best = -INFINITY;
    int count = 0;
    for (std::size_t start = 0; start + 15 <= 30; ++start) {
        best = std::max(best, oracle::adf_tratio(std::span<const double>(y.data() + start, 30 - start), 1));
        ++count;
    }
    CHECK(count == 16);
    CHECK(bsadf_at(y, 1.0, 0.5) == Approx(best).epsilon(1e-9));
}

TEST_CASE("SADF with the largest minimum window covers the last two ends", "[bubbles]") {
    // floor(r0 T) = T - 1 levels: the expanding windows are y[0..T-2] and y[0..T-1].
    const auto y = oracle::random_walk(100, 8);
    const double shorter = adf_stat(std::span<const double>(y.data(), 99));
    CHECK(sadf(y, 1.0 - 1.0 / 100.0) == Approx(std::max(shorter, adf_stat(y))).epsilon(1e-12));
    CHECK(sadf(y, 1.0 - 1.0 / 100.0) >= adf_stat(y));
}

TEST_CASE("sup containment and the BSADF maximum hold exactly", "[bubbles][property]") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto y = oracle::random_walk(120, 900 + seed);
        const auto g = gsadf(y, 0.2);
        const double s = sadf(y, 0.2);
        const double a = adf_stat(y);
        CHECK(g.stat >= s);
        CHECK(s >= a);
        CHECK(g.sadf_stat == s);
        CHECK(g.stat == *std::max_element(g.bsadf.begin(), g.bsadf.end()));
    }
}

TEST_CASE("statistics are shift invariant", "[bubbles][property]") {
    auto y = oracle::random_walk(150, 77);
    const auto a = gsadf(y, 0.15);
    for (auto& v : y) v += 1234.5;
    const auto b = gsadf(y, 0.15);
    CHECK(b.stat == Approx(a.stat).margin(1e-8));
    CHECK(b.sadf_stat == Approx(a.sadf_stat).margin(1e-8));
    for (std::size_t i = 0; i < a.bsadf.size(); ++i) CHECK(b.bsadf[i] == Approx(a.bsadf[i]).margin(1e-8));
}

TEST_CASE("infeasible windows are rejected", "[bubbles]") {
    const auto y = oracle::random_walk(100, 1);
    CHECK_THROWS_AS(sadf(y, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(gsadf(y, 0.02), std::invalid_argument);
    CHECK_THROWS_AS(bsadf_at(y, 0.1, 0.2), std::invalid_argument);
}

TEST_CASE("critical values are monotone, deterministic and ordered", "[bubbles]") {
    const auto a = mc_critical_values(400, 0.1, {}, 300, {0.90, 0.95, 0.99}, 42);
    const auto b = mc_critical_values(400, 0.1, {}, 300, {0.90, 0.95, 0.99}, 42);
    CHECK(a.sadf == b.sadf);
    CHECK(a.gsadf == b.gsadf);
    CHECK(a.bsadf == b.bsadf);
    CHECK(a.sadf[0] <= a.sadf[1]);
    CHECK(a.sadf[1] <= a.sadf[2]);
    CHECK(a.gsadf[0] <= a.gsadf[1]);
    CHECK(a.gsadf[1] <= a.gsadf[2]);
    for (std::size_t k = 0; k < a.bsadf[0].size(); ++k) {
        CHECK(a.bsadf[0][k] <= a.bsadf[1][k]);
        CHECK(a.bsadf[1][k] <= a.bsadf[2][k]);
    }
    CHECK(a.gsadf[1] > a.sadf[1]);
    CHECK_THROWS_AS(mc_critical_values(400, 0.1, {}, 100, {0.95}, 1), std::invalid_argument);
}

TEST_CASE("date stamping", "[bubbles]") {
    const std::vector<double> cv(5, 1.0);
    const std::vector<double> one = {0, 0, 3, 3, 0};
    const auto e = date_stamp(one, cv);
    REQUIRE(e.size() == 1);
    CHECK(e[0].start_index == 2);
    CHECK(e[0].end_index == 4);
    CHECK(e[0].peak_bsadf == 3.0);

    CHECK(date_stamp(std::vector<double>(5, 0.5), cv).empty());

    const std::vector<double> two = {2, 0, 0, 5, 4, 0, 2, 2, 2};
    const std::vector<double> cv9(9, 1.0);
    const auto e2 = date_stamp(two, cv9);
    REQUIRE(e2.size() == 3);
    CHECK(e2[0].start_index == 0);
    CHECK(e2[0].end_index == 1);
    CHECK(e2[1].start_index == 3);
    CHECK(e2[1].end_index == 5);
    CHECK(e2[2].start_index == 6);
    CHECK(e2[2].end_index == 9);
    const auto long_only = date_stamp(two, cv9, 2);
    REQUIRE(long_only.size() == 2);
    CHECK(long_only[0].start_index == 3);
}

TEST_CASE("date-stamped episodes satisfy the crossing conditions", "[bubbles][property]") {
    std::mt19937_64 g(19);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> b(60), cv(60);
        for (std::size_t i = 0; i < b.size(); ++i) {
            b[i] = z(g);
            cv[i] = 0.5 + 0.2 * z(g);
        }
        const auto eps = date_stamp(b, cv);
        std::size_t last_end = 0;
        for (const auto& e : eps) {
            CHECK(e.start_index < e.end_index);
            CHECK(e.start_index >= last_end);
            for (std::size_t i = e.start_index; i < e.end_index; ++i) CHECK(b[i] > cv[i]);
            if (e.start_index > 0) CHECK(b[e.start_index - 1] <= cv[e.start_index - 1]);
            if (e.end_index < b.size()) CHECK(b[e.end_index] <= cv[e.end_index]);
            last_end = e.end_index;
        }
    }
}

TEST_CASE("bubble report is consistent", "[bubbles]") {
    const auto y = oracle::collapsing_bubble(400, 200, 40, 1.02, 3);
    BubbleConfig cfg;
    cfg.mc_reps = 300;
    cfg.seed = 5;
    cfg.transform = LevelTransform::None;
    const auto rep = run_bubble_test(y, cfg);
    CHECK(rep.gsadf_stat == *std::max_element(rep.bsadf_sequence.begin(), rep.bsadf_sequence.end()));
    CHECK(rep.cv95_sequence.size() == rep.bsadf_sequence.size());
    CHECK(rep.mc_reps == 300);
    CHECK(rep.seed == 5);
    CHECK(rep.first_end + rep.bsadf_sequence.size() == y.size());
    for (const auto& e : rep.episodes) {
        CHECK(e.start_index >= rep.first_end);
        CHECK(e.end_index <= y.size());
        for (std::size_t i = e.start_index; i < e.end_index; ++i) {
            CHECK(rep.bsadf_sequence[i - rep.first_end] > rep.cv95_sequence[i - rep.first_end]);
        }
    }

    const auto cv = mc_critical_values(400, 0.1, {}, 300, effective_quantiles(cfg), 5);
    const auto again = run_bubble_test(y, cfg, &cv);
    CHECK(again.bsadf_sequence == rep.bsadf_sequence);
    CHECK(again.cv95_sequence == rep.cv95_sequence);
    CHECK_THROWS(run_bubble_test(std::vector<double>(50, 1.0), cfg));
}

TEST_CASE("deterministic exponential growth is one long episode", "[bubbles]") {
    std::vector<double> y(200);
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = std::exp(0.01 * static_cast<double>(t)) * (1.0 + 1e-3 * std::sin(t * 1.7));
    BubbleConfig cfg;
    cfg.mc_reps = 300;
    cfg.seed = 2;
    cfg.transform = LevelTransform::None;
    const auto rep = run_bubble_test(y, cfg);
    CHECK(rep.gsadf_stat > rep.critical_values.gsadf.back());
    REQUIRE(rep.episodes.size() >= 1);
    std::size_t longest = 0;
    for (const auto& e : rep.episodes) longest = std::max(longest, e.end_index - e.start_index);
    CHECK(static_cast<double>(longest) >= 0.8 * static_cast<double>(rep.bsadf_sequence.size()));
}

TEST_CASE("random walks rarely produce episodes", "[bubbles][slow]") {
    const std::size_t T = 400;
    BubbleConfig cfg;
    cfg.mc_reps = 1000;
    cfg.seed = 99;
    cfg.transform = LevelTransform::None;
    const auto cv = mc_critical_values(T, cfg.r0, cfg.adf, cfg.mc_reps, effective_quantiles(cfg), cfg.seed);
    int empty = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        const auto rep = run_bubble_test(oracle::random_walk(T, 50000 + static_cast<std::uint64_t>(s)), cfg, &cv);
        if (rep.episodes.empty()) ++empty;
    }
    CHECK(empty >= 90);
}
