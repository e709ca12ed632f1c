#include "coinrisk/bubbles.hpp"
#include "coinrisk/copulas.hpp"
#include "coinrisk/garch.hpp"
#include "coinrisk/portfolio.hpp"
#include "coinrisk/rng.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace coinrisk;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

garch::GarchParams g11(double omega, double alpha, double beta, double gamma = 0.0) {
    garch::GarchParams p;
    p.omega = omega;
    p.alpha = {alpha};
    p.beta = {beta};
    p.gamma = gamma;
    return p;
}

Verdict persistence_identities() {
    const double a = garch::persistence(g11(0.0, 0.794, -0.047, 0.2587));
    const double b = garch::persistence(g11(0.0, 0.314, 0.778, 0.1968));
    return {std::abs(a - 0.876) <= 0.001 && std::abs(b - 1.190) <= 0.001, fmt("%.5f, %.5f", a, b)};
}

Verdict garch_recovery() {
    std::vector<double> ea, eb;
    int sign_ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = garch::simulate_garch({garch::Variant::Garch}, g11(0.05, 0.10, 0.80), 2000, 1000 + s);
        const auto fit = garch::fit_garch(r, {garch::Variant::Garch});
        ea.push_back(std::abs(fit.params.alpha[0] - 0.10));
        eb.push_back(std::abs(fit.params.beta[0] - 0.80));
        const auto rt = garch::simulate_garch({garch::Variant::TGarch}, g11(0.05, 0.05, 0.80, 0.20), 2000, 2000 + s);
        if (garch::fit_garch(rt, {garch::Variant::TGarch}).params.gamma > 0.0) ++sign_ok;
    }
    const double ma = oracle::median(ea), mb = oracle::median(eb);
    return {ma < 0.05 && mb < 0.05 && sign_ok >= 18,
            fmt("median |alpha err| %.4f, median |beta err| %.4f, gamma sign %d/20", ma, mb, sign_ok)};
}

Verdict selection_consistency() {
    int wins = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto r = garch::simulate_garch({garch::Variant::TGarch}, g11(0.05, 0.05, 0.70, 0.40), 2000, 3000 + s);
        const auto sel = garch::select_model(r, {{garch::Variant::Garch}, {garch::Variant::TGarch}});
        if (sel.ranked.size() == 2 && sel.ranked.front().variant.tag == garch::Variant::TGarch) ++wins;
    }
    return {wins >= 14, fmt("T_GARCH ahead of GARCH in %d/20", wins)};
}

Verdict gsadf_size_power() {
    const std::size_t T = 400;
    bubbles::BubbleConfig cfg;
    cfg.r0 = 0.1;
    cfg.mc_reps = 1000;
    cfg.seed = 20170101;
    cfg.transform = bubbles::LevelTransform::None;
    const auto cv = bubbles::mc_critical_values(T, cfg.r0, cfg.adf, cfg.mc_reps, bubbles::effective_quantiles(cfg), cfg.seed);
    const std::size_t i95 = std::find(cv.quantiles.begin(), cv.quantiles.end(), 0.95) - cv.quantiles.begin();
    const double cv95 = cv.gsadf.at(i95);

    int rejected = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
        if (bubbles::gsadf(oracle::random_walk(T, 70000 + s), cfg.r0, cfg.adf).stat > cv95) ++rejected;
    }
    const double size = rejected / 500.0;

    int detected = 0, dated = 0;
    const std::size_t start = 200;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto y = oracle::collapsing_bubble(T, start, 40, 1.02, 80000 + s);
        const auto rep = bubbles::run_bubble_test(y, cfg, &cv);
        if (!(rep.gsadf_stat > cv95)) continue;
        ++detected;
        if (rep.episodes.empty()) continue;
        const auto& main = *std::max_element(rep.episodes.begin(), rep.episodes.end(),
                                              [](const auto& a, const auto& b) { return a.peak_bsadf < b.peak_bsadf; });
        const auto diff = static_cast<long>(main.start_index) - static_cast<long>(start);
        if (std::labs(diff) <= 10) ++dated;
    }
    const double power = detected / 200.0;
    const double dating = detected > 0 ? static_cast<double>(dated) / detected : 0.0;
    return {size >= 0.02 && size <= 0.08 && power >= 0.90 && dating >= 0.80,
            fmt("size %.3f, power %.3f, start within 10 obs %.3f (cv95 %.3f, 1000 reps)", size, power, dating, cv95)};
}

Verdict structural_identities() {
    int bad = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto y = oracle::random_walk(200, 90000 + s);
        const auto g = bubbles::gsadf(y, 0.1);
        const double sadf = bubbles::sadf(y, 0.1);
        const double adf = bubbles::adf_stat(y);
        const bool ok = g.stat >= sadf && sadf >= adf && g.sadf_stat == sadf &&
                        g.stat == *std::max_element(g.bsadf.begin(), g.bsadf.end());
        if (!ok) ++bad;
    }
    return {bad == 0, fmt("%d/100 series violate an identity", bad)};
}

Verdict copula_correctness() {
    using copulas::Family;
    std::mt19937_64 g(6);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst_boundary = 0.0, worst_volume = 0.0;
    for (auto f : copulas::kAllFamilies) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = fixture::random_params(f, g, false);
            for (int k = 0; k < 100; ++k) {
                const double x = unit(g);
                worst_boundary = std::max({worst_boundary, std::abs(copulas::copula_cdf(f, p, x, 1.0) - x),
                                           std::abs(copulas::copula_cdf(f, p, 1.0, x) - x),
                                           std::abs(copulas::copula_cdf(f, p, x, 0.0)),
                                           std::abs(copulas::copula_cdf(f, p, 0.0, x))});
                double u1 = unit(g), u2 = unit(g), v1 = unit(g), v2 = unit(g);
                if (u1 > u2) std::swap(u1, u2);
                if (v1 > v2) std::swap(v1, v2);
                const double vol = copulas::copula_cdf(f, p, u2, v2) - copulas::copula_cdf(f, p, u1, v2) -
                                   copulas::copula_cdf(f, p, u2, v1) + copulas::copula_cdf(f, p, u1, v1);
                worst_volume = std::min(worst_volume, vol);
            }
        }
    }
    const double lu = copulas::tail_dependence(Family::Gumbel, fixture::gumbel(2.0)).upper;

    double worst_tail = 0.0;
    for (auto [rho, nu] : {std::pair{0.5, 4.0}, std::pair{-0.3, 3.0}, std::pair{0.8, 10.0}, std::pair{0.2, 25.0}}) {
        const double x = -std::sqrt(nu + 1.0) * std::sqrt(1.0 - rho) / std::sqrt(1.0 + rho);
        const double expect = 2.0 * oracle::t_cdf_negative(x, nu + 1.0);
        worst_tail = std::max(worst_tail, std::abs(copulas::tail_dependence(Family::StudentT, fixture::student(rho, nu)).upper - expect));
    }

    double worst_mass = 0.0;
    for (auto f : copulas::kAllFamilies) {
        for (int trial = 0; trial < 3; ++trial) {
            const auto p = fixture::random_params(f, g, true);
            const double mass = oracle::integrate_unit_square([&](double u, double v) { return copulas::copula_density(f, p, u, v); });
            worst_mass = std::max(worst_mass, std::abs(mass - 1.0));
        }
    }
    const bool pass = worst_boundary <= 1e-9 && worst_volume >= -1e-12 && lu == 2.0 - std::sqrt(2.0) &&
                      worst_tail <= 1e-6 && worst_mass <= 1e-3;
    return {pass, fmt("boundary %.2e, min volume %.2e, Gumbel lambda_U %.17g, t tail err %.2e, mass err %.2e",
                      worst_boundary, worst_volume, lu, worst_tail, worst_mass)};
}

Verdict copula_recovery() {
    using copulas::Family;
    int rho_ok = 0, delta_ok = 0, tv_wins = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto ga = copulas::fit_static_copula(copulas::simulate_copula(Family::Gaussian, fixture::gaussian(0.5), 1000, 600 + s),
                                                   Family::Gaussian);
        if (std::abs(ga.params.rho - 0.5) <= 0.05) ++rho_ok;
        const auto gu = copulas::fit_static_copula(copulas::simulate_copula(Family::Gumbel, fixture::gumbel(2.0), 1000, 700 + s),
                                                   Family::Gumbel);
        if (std::abs(gu.params.delta - 2.0) <= 0.15) ++delta_ok;
        const auto pair = fixture::regime_switching(1000, 800 + s);
        if (copulas::fit_tv_copula(pair, Family::Gaussian).aic < copulas::fit_static_copula(pair, Family::Gaussian).aic) ++tv_wins;
    }
    return {rho_ok >= 18 && delta_ok >= 18 && tv_wins >= 16,
            fmt("rho %d/20, delta %d/20, TV-Gaussian wins %d/20", rho_ok, delta_ok, tv_wins)};
}

Verdict portfolio_identities() {
    using namespace portfolio;
    const bool half = optimal_weight(1.0, 1.0, 0.0).value == 0.5;
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int scale_bad = 0, minvar_bad = 0;
    for (int i = 0; i < 1000; ++i) {
        const double hi = 0.01 + u(g), hj = 0.01 + u(g);
        const double hij = (2.0 * u(g) - 1.0) * std::sqrt(hi * hj);
        const double w = optimal_weight_unclamped(hi, hj, hij);
        const double c = std::ldexp(1.0, static_cast<int>(u(g) * 40.0) - 20);
        if (optimal_weight_unclamped(c * hi, c * hj, c * hij) != w) ++scale_bad;
        const double at = portfolio_variance(w, hi, hj, hij);
        for (double d : {-0.1, -1e-3, 1e-3, 0.1}) {
            if (portfolio_variance(w + d, hi, hj, hij) < at - 1e-15) {
                ++minvar_bad;
                break;
            }
        }
    }
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0}, h = {0.5, 1.0, 1.5, 2.0};
    const double re_same = risk_reduction(v, v), re_half = risk_reduction(v, h);
    return {half && scale_bad == 0 && minvar_bad == 0 && re_same == 0.0 && re_half == 0.5,
            fmt("w(1,1,0)=%.17g, scale violations %d, min-variance violations %d, RE(V,V)=%.17g, RE(V,V/2)=%.17g",
                optimal_weight(1.0, 1.0, 0.0).value, scale_bad, minvar_bad, re_same, re_half)};
}

Verdict var_coverage() {
    using namespace portfolio;
    std::mt19937_64 g(21);
    std::normal_distribution<double> z;
    std::vector<double> a(20000), b(20000);
    for (auto& x : a) x = z(g);
    for (auto& x : b) x = z(g);
    const EmpiricalQuantile mi(a), mj(b);
    const CovariancePath cov{{1.0}, {1.0}, {0.0}, {}};
    const std::vector<double> w = {0.5};
    const auto var = var_forecast(cov, w, copulas::Family::Gaussian, {copulas::CopulaParams{}}, mi, mj, {0.99, 100000, 5});
    const double target = 2.326 * std::sqrt(0.5);
    const double rel = std::abs(var[0] / target - 1.0);

    int rejected = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
        std::mt19937_64 gs(mix64(0xC0FFEE + s));
        std::bernoulli_distribution hit(0.01);
        std::vector<std::uint8_t> flags(1000);
        for (auto& f : flags) f = hit(gs) ? 1 : 0;
        if (conditional_coverage_test(flags, 0.99).p_value < 0.05) ++rejected;
    }
    const double size = rejected / 500.0;
    return {rel <= 0.05 && size >= 0.02 && size <= 0.09,
            fmt("VaR %.4f vs %.4f (rel err %.3f), coverage test size %.3f", var[0], target, rel, size)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict end_to_end_determinism() {
    const fs::path root = fs::temp_directory_path() / "coinrisk_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path config = fs::path(COINRISK_SYNTHETIC_DIR) / "config.json";
    int rc[2];
    for (int k = 0; k < 2; ++k) {
        const fs::path out = root / (k == 0 ? "a" : "b");
        const std::string cmd = std::string("\"") + COINRISK_CLI_PATH + "\" --config \"" + config.string() + "\" --out \"" +
                                out.string() + "\" all > \"" + (root / "log").string() + "\" 2>&1";
        rc[k] = std::system(cmd.c_str());
    }
    if (rc[0] != 0 || rc[1] != 0) return {false, "cli exited with an error; see " + (root / "log").string()};
    std::size_t files = 0, differing = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file()) continue;
        ++files;
        const auto other = root / "b" / fs::relative(e.path(), root / "a");
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
    }
    std::size_t files_b = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "b")) files_b += e.is_regular_file();
    return {files > 0 && differing == 0 && files == files_b,
            fmt("%zu files, %zu differ, %zu in second tree", files, differing, files_b)};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"persistence identities", persistence_identities},
        {"GARCH parameter recovery", garch_recovery},
        {"model selection consistency", selection_consistency},
        {"GSADF size and power", gsadf_size_power},
        {"bubble statistic identities", structural_identities},
        {"copula correctness", copula_correctness},
        {"copula recovery", copula_recovery},
        {"portfolio identities", portfolio_identities},
        {"VaR and coverage", var_coverage},
        {"end-to-end determinism", end_to_end_determinism},
    };
    int failed = 0, index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %2d %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", index, name, v.detail.c_str(), secs);
        std::fflush(stdout);
        if (!v.pass) ++failed;
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
