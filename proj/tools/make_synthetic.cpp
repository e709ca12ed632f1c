// Writes the bundled five-asset synthetic dataset: two daily-traded crypto
// series and three weekday-only traditional assets with GARCH volatility,
// negative crypto/traditional correlation and a bubble episode in BPI.

#include "coinrisk/rng.hpp"
#include "coinrisk/timeseries.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

struct AssetSpec {
    std::string id;
    double start_price;
    double omega, alpha, beta;
    double loading;
    bool weekdays_only;
};

} // namespace

int main(int argc, char** argv) {
    const std::filesystem::path dir = argc > 1 ? argv[1] : "data/synthetic";
    const std::uint64_t seed = argc > 2 ? std::stoull(argv[2]) : 20170101;
    constexpr int kDays = 900;
    std::filesystem::create_directories(dir);

    const std::vector<AssetSpec> specs = {
        {"BPI", 250.0, 2.0e-5, 0.10, 0.85, 0.5, false},
        {"ETH", 2.0, 4.0e-5, 0.12, 0.83, 0.5, false},
        {"STR", 2000.0, 2.0e-6, 0.08, 0.90, -0.5, true},
        {"BdR", 100.0, 1.0e-7, 0.05, 0.90, -0.4, true},
        {"Oil", 50.0, 8.0e-6, 0.07, 0.90, -0.3, true},
    };

    coinrisk::Rng rng(seed);
    std::normal_distribution<double> normal;
    std::student_t_distribution<double> student(6.0);
    const double t_scale = std::sqrt(4.0 / 6.0);

    const std::chrono::sys_days start = std::chrono::year{2015} / std::chrono::August / 7;
    std::vector<std::vector<double>> log_price(specs.size(), std::vector<double>(kDays));
    std::vector<double> h(specs.size());
    std::vector<double> eps(specs.size(), 0.0);
    for (std::size_t k = 0; k < specs.size(); ++k) {
        h[k] = specs[k].omega / (1.0 - specs[k].alpha - specs[k].beta);
        log_price[k][0] = std::log(specs[k].start_price);
    }

    // Bubble in BPI: explosive deviation from day 520 for 60 days, collapse over 15.
    double deviation = 0.0;
    for (int d = 1; d < kDays; ++d) {
        const double common = normal(rng);
        for (std::size_t k = 0; k < specs.size(); ++k) {
            const auto& s = specs[k];
            h[k] = s.omega + s.alpha * eps[k] * eps[k] + s.beta * h[k];
            const double idio = student(rng) * t_scale;
            const double z = s.loading * common + std::sqrt(1.0 - s.loading * s.loading) * idio;
            eps[k] = std::sqrt(h[k]) * z;
            log_price[k][d] = log_price[k][d - 1] + eps[k];
        }
        double next = 0.0;
        if (d >= 520 && d < 580) {
            next = d == 520 ? 0.05 : deviation * 1.04;
        } else if (d >= 580 && d < 595) {
            next = deviation * 0.75;
        }
        log_price[0][d] += next - deviation;
        deviation = next;
    }

    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto path = dir / (specs[k].id + ".csv");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            std::cerr << "cannot write " << path << '\n';
            return 1;
        }
        out << "date,price\n";
        for (int d = 0; d < kDays; ++d) {
            const std::chrono::sys_days day = start + std::chrono::days{d};
            const std::chrono::weekday wd{day};
            if (specs[k].weekdays_only && (wd == std::chrono::Saturday || wd == std::chrono::Sunday)) continue;
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.6f", std::exp(log_price[k][d]));
            out << coinrisk::timeseries::format_date(std::chrono::year_month_day{day}) << ',' << buf << '\n';
        }
    }
    return 0;
}
