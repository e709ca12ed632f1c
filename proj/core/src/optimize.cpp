#include "coinrisk/optimize.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace coinrisk::optimize {

namespace {

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71};

double guarded(const Objective& f, std::span<const double> x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

} // namespace

Result nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadOptions& opts) {
    const std::size_t n = x0.size();
    if (n == 0) {
        throw std::invalid_argument("nelder_mead: empty parameter vector");
    }
    const double dn = static_cast<double>(n);
    const double alpha = 1.0;
    const double beta = 1.0 + 2.0 / dn;
    const double gamma = 0.75 - 1.0 / (2.0 * dn);
    const double delta = 1.0 - 1.0 / dn;

    std::vector<std::vector<double>> simplex(n + 1, x0);
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = x0[i] != 0.0 ? opts.initial_step * std::max(1.0, std::abs(x0[i])) : opts.initial_step;
        simplex[i + 1][i] += step;
    }
    int evals = 0;
    for (std::size_t i = 0; i <= n; ++i) {
        values[i] = guarded(f, simplex[i]);
        ++evals;
    }

    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), trial(n), trial2(n);
    bool converged = false;

    while (evals < opts.max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
            }
        }
        const double spread = values[worst] - values[best];
        if (std::isfinite(values[best]) && spread <= opts.f_tol * (1.0 + std::abs(values[best])) &&
            diameter <= opts.x_tol) {
            converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i][k];
        }
        for (auto& c : centroid) c /= dn;

        for (std::size_t k = 0; k < n; ++k) trial[k] = centroid[k] + alpha * (centroid[k] - simplex[worst][k]);
        const double f_reflect = guarded(f, trial);
        ++evals;

        if (f_reflect < values[best]) {
            for (std::size_t k = 0; k < n; ++k) trial2[k] = centroid[k] + beta * (trial[k] - centroid[k]);
            const double f_expand = guarded(f, trial2);
            ++evals;
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        const bool outside = f_reflect < values[worst];
        for (std::size_t k = 0; k < n; ++k) {
            trial2[k] = outside ? centroid[k] + gamma * (trial[k] - centroid[k])
                                : centroid[k] - gamma * (centroid[k] - simplex[worst][k]);
        }
        const double f_contract = guarded(f, trial2);
        ++evals;
        if (f_contract < std::min(f_reflect, values[worst]) || (outside && f_contract <= f_reflect)) {
            simplex[worst] = trial2;
            values[worst] = f_contract;
            continue;
        }
        // shrink toward the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < n; ++k) {
                simplex[i][k] = simplex[best][k] + delta * (simplex[i][k] - simplex[best][k]);
            }
            values[i] = guarded(f, simplex[i]);
            ++evals;
        }
    }

    const auto best_it = std::min_element(values.begin(), values.end());
    const auto best = static_cast<std::size_t>(best_it - values.begin());
    return Result{simplex[best], values[best], evals, converged};
}

double halton(std::size_t index, unsigned base) {
    double result = 0.0;
    double f = 1.0;
    while (index > 0) {
        f /= base;
        result += f * static_cast<double>(index % base);
        index /= base;
    }
    return result;
}

Result multi_start(const Objective& f, const std::vector<double>& center, const MultiStartOptions& opts) {
    const std::size_t n = center.size();
    if (n > std::size(kPrimes)) {
        throw std::invalid_argument("multi_start: too many dimensions for the Halton schedule");
    }
    std::vector<double> spread = opts.spread;
    spread.resize(n, 1.0);

    Result best;
    best.value = std::numeric_limits<double>::infinity();
    int total_evals = 0;
    bool have_best = false;

    for (int s = 0; s < std::max(1, opts.starts); ++s) {
        std::vector<double> x0 = center;
        if (s > 0) {
            for (std::size_t k = 0; k < n; ++k) {
                x0[k] += spread[k] * (2.0 * halton(static_cast<std::size_t>(s), kPrimes[k]) - 1.0);
            }
        }
        Result r = nelder_mead(f, x0, opts.local);
        total_evals += r.evals;
        if (!have_best || r.value < best.value) {
            best = std::move(r);
            have_best = true;
        }
    }

    NelderMeadOptions polish = opts.local;
    for (int round = 0; round < opts.polish_rounds; ++round) {
        polish.initial_step = opts.local.initial_step * std::pow(0.3, round + 1);
        Result r = nelder_mead(f, best.x, polish);
        total_evals += r.evals;
        const double improvement = best.value - r.value;
        const bool better = r.value < best.value;
        if (better) {
            best.x = r.x;
            best.value = r.value;
        }
        best.converged = r.converged;
        if (!better || improvement <= opts.local.f_tol * (1.0 + std::abs(best.value))) {
            break;
        }
    }
    best.evals = total_evals;
    return best;
}

std::pair<double, double> brent_minimize(const std::function<double(double)>& f, double lo, double hi, int bits) {
    auto guarded_f = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::max();
    };
    std::uintmax_t max_iter = 500;
    return boost::math::tools::brent_find_minima(guarded_f, lo, hi, bits, max_iter);
}

} // namespace coinrisk::optimize
