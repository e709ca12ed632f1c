#include "coinrisk/error.hpp"
#include "coinrisk/timeseries.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

using namespace coinrisk;
using namespace coinrisk::timeseries;
using Catch::Approx;

namespace {

PriceSeries series(const std::string& id, std::vector<std::string> dates, std::vector<double> prices) {
    std::vector<Date> d;
    for (const auto& s : dates) d.push_back(parse_date(s));
    return PriceSeries(id, d, prices);
}

PriceSeries parse(const std::string& text) {
    std::istringstream in(text);
    return load_price_csv(in, "X");
}

} // namespace

TEST_CASE("csv parse reads rows in order", "[timeseries]") {
    const auto p = parse("date,price\n2016-01-01,430.0\n2016-01-02,434.0");
    REQUIRE(p.size() == 2);
    CHECK(p.prices()[0] == 430.0);
    CHECK(p.prices()[1] == 434.0);
    CHECK(format_date(p.dates()[1]) == "2016-01-02");
}

TEST_CASE("csv parse rejects a non-positive price with its line", "[timeseries]") {
    try {
        parse("date,price\n2016-01-01,430.0\n2016-01-02,0.0\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("csv parse sorts out-of-order rows", "[timeseries]") {
    const auto p = parse("date,price\r\n2016-01-02,434.0\r\n2016-01-01,430.0\r\n");
    REQUIRE(p.size() == 2);
    CHECK(format_date(p.dates()[0]) == "2016-01-01");
    CHECK(p.prices()[0] == 430.0);
}

TEST_CASE("csv parse drops empty prices and rejects duplicates and junk", "[timeseries]") {
    CHECK(parse("date,price\n2016-01-01,\n2016-01-02,1.5\n").size() == 1);
    CHECK_THROWS_AS(parse("date,price\n2016-01-01,1\n2016-01-01,2\n"), ParseError);
    CHECK_THROWS_AS(parse("date,price\n2016-13-01,1\n"), ParseError);
    CHECK_THROWS_AS(parse("when,price\n2016-01-01,1\n"), ParseError);
    CHECK_THROWS_AS(parse("date,price\n2016-01-01,abc\n"), ParseError);
}

TEST_CASE("missing file error names the path", "[timeseries]") {
    try {
        load_price_file("/nonexistent/prices.csv", "X");
        FAIL("expected an exception");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("/nonexistent/prices.csv") != std::string::npos);
    }
}

TEST_CASE("align keeps the date intersection", "[timeseries]") {
    const auto a = series("A", {"2016-01-01", "2016-01-02", "2016-01-03"}, {1, 2, 3});
    const auto b = series("B", {"2016-01-02", "2016-01-03", "2016-01-04"}, {5, 6, 7});
    const auto out = align({a, b});
    REQUIRE(out.size() == 2);
    CHECK(out[0].dates() == out[1].dates());
    CHECK(out[0].prices() == std::vector<double>{2, 3});
    CHECK(out[1].prices() == std::vector<double>{5, 6});

    const auto again = align(out);
    CHECK(again[0].dates() == out[0].dates());
    CHECK(again[1].prices() == out[1].prices());
}

TEST_CASE("align with identical dates is the identity", "[timeseries]") {
    const auto a = series("A", {"2016-01-01", "2016-01-02"}, {1, 2});
    const auto b = series("B", {"2016-01-01", "2016-01-02"}, {3, 4});
    const auto out = align({a, b});
    CHECK(out[0].prices() == a.prices());
    CHECK(out[1].prices() == b.prices());
}

TEST_CASE("align of disjoint dates throws", "[timeseries]") {
    const auto a = series("A", {"2016-01-01"}, {1});
    const auto b = series("B", {"2016-01-02"}, {3});
    CHECK_THROWS(align({a, b}));
    CHECK_THROWS(align({a}));
}

TEST_CASE("log returns are log price differences", "[timeseries]") {
    const auto r = log_returns(series("A", {"2016-01-01", "2016-01-02"}, {100, 110}));
    REQUIRE(r.size() == 1);
    CHECK(r.values()[0] == Approx(0.0953102).margin(1e-6));
    CHECK(format_date(r.dates()[0]) == "2016-01-02");

    const auto flat = log_returns(series("A", {"2016-01-01", "2016-01-02", "2016-01-03"}, {50, 50, 50}));
    CHECK(flat.values() == std::vector<double>{0.0, 0.0});

    const auto down = log_returns(series("A", {"2016-01-01", "2016-01-02"}, {100, 90}));
    CHECK(down.values()[0] == Approx(-0.1053605).margin(1e-6));

    CHECK_THROWS(log_returns(series("A", {"2016-01-01"}, {100})));
}

TEST_CASE("log returns are invariant to price scaling", "[timeseries][property]") {
    std::mt19937_64 g(3);
    std::uniform_real_distribution<double> step(-0.05, 0.05);
    std::vector<std::string> dates;
    std::vector<double> prices;
    double p = 100;
    for (int d = 1; d <= 28; ++d) {
        dates.push_back("2016-02-" + std::string(d < 10 ? "0" : "") + std::to_string(d));
        p *= std::exp(step(g));
        prices.push_back(p);
    }
    const auto base = log_returns(series("A", dates, prices));
    for (double c : {0.5, 4.0, 1024.0}) {
        std::vector<double> scaled = prices;
        for (auto& x : scaled) x *= c;
        const auto r = log_returns(series("A", dates, scaled));
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(r.values()[i] == Approx(base.values()[i]).margin(1e-14));
    }
}

TEST_CASE("describe matches population moments", "[timeseries]") {
    std::mt19937_64 g(42);
    std::normal_distribution<double> z;
    std::vector<double> x(10000);
    for (auto& v : x) v = z(g);
    const auto s = describe(x);
    CHECK(s.n == 10000);
    CHECK(s.skewness > -0.1);
    CHECK(s.skewness < 0.1);
    CHECK(s.kurtosis > 2.8);
    CHECK(s.kurtosis < 3.2);
    const double jb = s.n / 6.0 * (s.skewness * s.skewness + (s.kurtosis - 3) * (s.kurtosis - 3) / 4.0);
    CHECK(s.jarque_bera == Approx(jb).epsilon(1e-12));
}

TEST_CASE("describe gives zero Jarque-Bera at S = 0, K = 3", "[timeseries]") {
    // Mass 2/3 at zero and 1/6 at each of -1, +1: m2 = m4 = 1/3, so m4 / m2^2 = 3.
    const std::vector<double> x = {-1.0, 0.0, 0.0, 0.0, 0.0, 1.0};
    const auto s = describe(x);
    CHECK(s.skewness == Approx(0.0).margin(1e-12));
    CHECK(s.kurtosis == Approx(3.0).epsilon(1e-12));
    CHECK(s.jarque_bera == Approx(0.0).margin(1e-10));
}

TEST_CASE("describe rejects constant and short input", "[timeseries]") {
    const std::vector<double> c(10, 0.01);
    CHECK_THROWS(describe(c));
    const std::vector<double> s = {1, 2, 3};
    CHECK_THROWS(describe(s));
}

TEST_CASE("returns csv has a date,return header", "[timeseries]") {
    const auto r = log_returns(series("A", {"2016-01-01", "2016-01-02"}, {100, 110}));
    std::ostringstream out;
    write_returns_csv(out, r);
    CHECK(out.str() == "date,return\n2016-01-02,0.0953101798\n");
}
