#include "coinrisk/bubbles.hpp"

#include "coinrisk/error.hpp"
#include "coinrisk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace coinrisk::bubbles {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Cross-product accumulator for one window end. Regressor order is
/// [1, trend?, dy_{t-1..t-p}, y_{t-1} - y_e]; the tested coefficient is last,
/// so its t-ratio falls straight out of the Cholesky factor.
///
/// Every statistic in this file is produced by adding rows in descending t
/// order through this class, which keeps sup-containment exact bit for bit.
class WindowAccumulator {
public:
    WindowAccumulator(std::span<const double> y, const AdfSpec& spec)
        : y_(y), lags_(static_cast<std::size_t>(spec.lags)), trend_(spec.trend),
          k_(2 + static_cast<std::size_t>(spec.lags) + (spec.trend ? 1 : 0)), xtx_(k_ * k_), xty_(k_), x_(k_),
          chol_(k_ * k_), w_(k_) {}

    void reset(std::size_t end) {
        end_ = end;
        anchor_ = y_[end];
        std::fill(xtx_.begin(), xtx_.end(), 0.0);
        std::fill(xty_.begin(), xty_.end(), 0.0);
        yty_ = 0.0;
        rows_ = 0;
    }

    /// Add regression row t (requires t >= lags + 1).
    void add_row(std::size_t t) {
        std::size_t c = 0;
        x_[c++] = 1.0;
        if (trend_) x_[c++] = static_cast<double>(t) - static_cast<double>(end_);
        for (std::size_t i = 1; i <= lags_; ++i) x_[c++] = y_[t - i] - y_[t - i - 1];
        x_[c++] = y_[t - 1] - anchor_;
        const double dy = y_[t] - y_[t - 1];
        for (std::size_t i = 0; i < k_; ++i) {
            const double xi = x_[i];
            xty_[i] += xi * dy;
            for (std::size_t j = i; j < k_; ++j) xtx_[i * k_ + j] += xi * x_[j];
        }
        yty_ += dy * dy;
        ++rows_;
    }

    /// t-ratio of the last coefficient, NaN when singular or a perfect fit.
    double t_ratio() {
        if (rows_ <= k_) return kNaN;
        for (std::size_t i = 0; i < k_; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = xtx_[j * k_ + i];
                for (std::size_t m = 0; m < j; ++m) s -= chol_[i * k_ + m] * chol_[j * k_ + m];
                if (i == j) {
                    if (!(s > 1e-12 * std::max(xtx_[i * k_ + i], 1e-300))) return kNaN;
                    chol_[i * k_ + i] = std::sqrt(s);
                } else {
                    chol_[i * k_ + j] = s / chol_[j * k_ + j];
                }
            }
        }
        double explained = 0.0;
        for (std::size_t i = 0; i < k_; ++i) {
            double s = xty_[i];
            for (std::size_t m = 0; m < i; ++m) s -= chol_[i * k_ + m] * w_[m];
            w_[i] = s / chol_[i * k_ + i];
            explained += w_[i] * w_[i];
        }
        const double ssr = yty_ - explained;
        if (!(ssr > 1e-14 * yty_)) return kNaN;
        const double s2 = ssr / static_cast<double>(rows_ - k_);
        return w_[k_ - 1] / std::sqrt(s2);
    }

private:
    std::span<const double> y_;
    std::size_t lags_;
    bool trend_;
    std::size_t k_;
    std::vector<double> xtx_, xty_, x_, chol_, w_;
    double yty_ = 0.0;
    double anchor_ = 0.0;
    std::size_t end_ = 0;
    std::size_t rows_ = 0;
};

double nan_max(double a, double b) {
    if (std::isnan(a)) return b;
    if (std::isnan(b)) return a;
    return std::max(a, b);
}

void check_spec(const AdfSpec& spec) {
    if (spec.lags < 0) throw std::invalid_argument("ADF: lag order must be non-negative");
}

std::size_t checked_window(std::span<const double> y, double r0, const AdfSpec& spec) {
    check_spec(spec);
    if (!(r0 > 0.0 && r0 < 1.0)) throw std::invalid_argument("r0 must lie in (0, 1)");
    const std::size_t w = window_from_fraction(r0, y.size());
    if (w < min_window_length(spec)) {
        throw std::invalid_argument("minimum window floor(r0*T) = " + std::to_string(w) +
                                    " is shorter than the feasible regression length " +
                                    std::to_string(min_window_length(spec)));
    }
    return w;
}

/// ADF statistics of all windows ending at `end` with start <= end - w + 1.
/// Calls visit(start, stat) for start = end-w+1 down to 0.
template <typename Visit>
void scan_end(WindowAccumulator& acc, std::size_t end, std::size_t w, std::size_t lags, Visit&& visit) {
    acc.reset(end);
    const std::size_t first_start = end + 1 - w;
    for (std::size_t t = end; t >= first_start + lags + 1; --t) acc.add_row(t);
    for (std::size_t s = first_start;; --s) {
        visit(s, acc.t_ratio());
        if (s == 0) break;
        acc.add_row(s - 1 + lags + 1);
    }
}

} // namespace

std::size_t min_window_length(const AdfSpec& spec) {
    return 2 * static_cast<std::size_t>(std::max(spec.lags, 0)) + 4 + (spec.trend ? 1 : 0);
}

std::size_t window_from_fraction(double r0, std::size_t T) {
    return static_cast<std::size_t>(std::floor(r0 * static_cast<double>(T) + 1e-9));
}

double adf_stat(std::span<const double> y, const AdfSpec& spec) {
    check_spec(spec);
    if (y.size() < min_window_length(spec)) {
        throw std::invalid_argument("adf_stat: need at least " + std::to_string(min_window_length(spec)) +
                                    " observations");
    }
    WindowAccumulator acc(y, spec);
    const std::size_t end = y.size() - 1;
    acc.reset(end);
    for (std::size_t t = end; t >= static_cast<std::size_t>(spec.lags) + 1; --t) acc.add_row(t);
    const double stat = acc.t_ratio();
    if (std::isnan(stat)) throw NumericalError("adf_stat: singular regressor matrix");
    return stat;
}

double bsadf_at(std::span<const double> y, double r2, double r0, const AdfSpec& spec) {
    const std::size_t w = checked_window(y, r0, spec);
    if (!(r2 >= r0 && r2 <= 1.0)) throw std::invalid_argument("bsadf_at: need r0 <= r2 <= 1");
    const std::size_t end_count = window_from_fraction(r2, y.size());
    if (end_count < w) throw std::invalid_argument("bsadf_at: infeasible window");
    WindowAccumulator acc(y, spec);
    double best = kNaN;
    scan_end(acc, end_count - 1, w, static_cast<std::size_t>(spec.lags),
             [&](std::size_t, double stat) { best = nan_max(best, stat); });
    if (std::isnan(best)) throw NumericalError("bsadf_at: every window is singular");
    return best;
}

double sadf(std::span<const double> y, double r0, const AdfSpec& spec) {
    const std::size_t w = checked_window(y, r0, spec);
    const auto lags = static_cast<std::size_t>(spec.lags);
    WindowAccumulator acc(y, spec);
    double best = kNaN;
    for (std::size_t end = w - 1; end < y.size(); ++end) {
        acc.reset(end);
        for (std::size_t t = end; t >= lags + 1; --t) acc.add_row(t);
        best = nan_max(best, acc.t_ratio());
    }
    if (std::isnan(best)) throw NumericalError("sadf: every window is singular");
    return best;
}

GsadfResult gsadf(std::span<const double> y, double r0, const AdfSpec& spec) {
    const std::size_t w = checked_window(y, r0, spec);
    const auto lags = static_cast<std::size_t>(spec.lags);
    WindowAccumulator acc(y, spec);
    GsadfResult out;
    out.first_end = w - 1;
    out.bsadf.reserve(y.size() - w + 1);
    out.stat = kNaN;
    out.sadf_stat = kNaN;
    for (std::size_t end = w - 1; end < y.size(); ++end) {
        double b = kNaN;
        scan_end(acc, end, w, lags, [&](std::size_t s, double stat) {
            b = nan_max(b, stat);
            if (s == 0) out.sadf_stat = nan_max(out.sadf_stat, stat);
        });
        out.bsadf.push_back(b);
        out.stat = nan_max(out.stat, b);
    }
    if (std::isnan(out.stat)) throw NumericalError("gsadf: every window is singular");
    return out;
}

double sorted_quantile(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw std::invalid_argument("sorted_quantile: empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

CriticalValues mc_critical_values(std::size_t T, double r0, const AdfSpec& spec, std::size_t reps,
                                  const std::vector<double>& quantiles, std::uint64_t seed) {
    if (reps < 200) throw std::invalid_argument("mc_critical_values: need at least 200 replications");
    if (quantiles.empty()) throw std::invalid_argument("mc_critical_values: empty quantile list");
    for (double q : quantiles) {
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("mc_critical_values: quantiles must lie in (0,1)");
    }
    std::vector<double> probe(T, 0.0);
    const std::size_t w = checked_window(probe, r0, spec);
    const std::size_t n_ends = T - w + 1;

    std::vector<double> sadf_draws(reps), gsadf_draws(reps);
    std::vector<std::vector<double>> bsadf_draws(n_ends, std::vector<double>(reps));
    std::vector<double> y(T);
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng(seed + rep);
        std::normal_distribution<double> normal(0.0, 1.0);
        double level = 0.0;
        for (auto& v : y) {
            level += normal(rng);
            v = level;
        }
        const GsadfResult g = gsadf(y, r0, spec);
        sadf_draws[rep] = g.sadf_stat;
        gsadf_draws[rep] = g.stat;
        for (std::size_t k = 0; k < n_ends; ++k) bsadf_draws[k][rep] = g.bsadf[k];
    }

    CriticalValues cv;
    cv.quantiles = quantiles;
    cv.first_end = w - 1;
    cv.reps = reps;
    cv.seed = seed;
    std::sort(sadf_draws.begin(), sadf_draws.end());
    std::sort(gsadf_draws.begin(), gsadf_draws.end());
    for (double q : quantiles) {
        cv.sadf.push_back(sorted_quantile(sadf_draws, q));
        cv.gsadf.push_back(sorted_quantile(gsadf_draws, q));
    }
    cv.bsadf.assign(quantiles.size(), std::vector<double>(n_ends));
    for (std::size_t k = 0; k < n_ends; ++k) {
        auto& draws = bsadf_draws[k];
        std::sort(draws.begin(), draws.end());
        for (std::size_t qi = 0; qi < quantiles.size(); ++qi) cv.bsadf[qi][k] = sorted_quantile(draws, quantiles[qi]);
    }
    return cv;
}

std::vector<BubbleEpisode> date_stamp(std::span<const double> bsadf, std::span<const double> cv,
                                      std::size_t min_duration) {
    if (bsadf.size() != cv.size()) throw std::invalid_argument("date_stamp: sequences differ in length");
    std::vector<BubbleEpisode> out;
    std::size_t i = 0;
    const std::size_t n = bsadf.size();
    while (i < n) {
        if (!(bsadf[i] > cv[i])) {
            ++i;
            continue;
        }
        BubbleEpisode ep;
        ep.start_index = i;
        ep.peak_bsadf = bsadf[i];
        while (i < n && bsadf[i] > cv[i]) {
            ep.peak_bsadf = std::max(ep.peak_bsadf, bsadf[i]);
            ++i;
        }
        ep.end_index = i;
        if (ep.end_index - ep.start_index >= std::max<std::size_t>(min_duration, 1)) out.push_back(ep);
    }
    return out;
}

std::vector<double> effective_quantiles(const BubbleConfig& config) {
    std::vector<double> quantiles = config.quantiles;
    if (std::find(quantiles.begin(), quantiles.end(), 0.95) == quantiles.end()) quantiles.push_back(0.95);
    std::sort(quantiles.begin(), quantiles.end());
    return quantiles;
}

BubbleReport run_bubble_test(std::span<const double> y, const BubbleConfig& config,
                             const CriticalValues* precomputed) {
    if (y.size() < 100) throw std::invalid_argument("run_bubble_test: need at least 100 observations");
    const GsadfResult g = gsadf(y, config.r0, config.adf);
    BubbleReport report;
    report.sadf_stat = g.sadf_stat;
    report.gsadf_stat = g.stat;
    report.bsadf_sequence = g.bsadf;
    report.first_end = g.first_end;
    if (precomputed != nullptr) {
        if (precomputed->first_end != g.first_end || precomputed->bsadf.empty() ||
            precomputed->bsadf.front().size() != g.bsadf.size()) {
            throw std::invalid_argument("run_bubble_test: critical values were simulated for a different design");
        }
        report.critical_values = *precomputed;
    } else {
        report.critical_values = mc_critical_values(y.size(), config.r0, config.adf, config.mc_reps,
                                                    effective_quantiles(config), config.seed);
    }
    const auto& qs = report.critical_values.quantiles;
    const auto q95 = std::find(qs.begin(), qs.end(), 0.95);
    if (q95 == qs.end()) throw std::invalid_argument("run_bubble_test: critical values lack the 95% quantile");
    report.cv95_sequence = report.critical_values.bsadf[static_cast<std::size_t>(q95 - qs.begin())];
    report.episodes = date_stamp(report.bsadf_sequence, report.cv95_sequence, config.min_duration);
    for (auto& ep : report.episodes) {
        ep.start_index += g.first_end;
        ep.end_index += g.first_end;
    }
    report.r0 = config.r0;
    report.lags = config.adf.lags;
    report.trend = config.adf.trend;
    report.mc_reps = report.critical_values.reps;
    report.seed = report.critical_values.seed;
    return report;
}

BubbleReport run_bubble_test(const timeseries::PriceSeries& prices, const BubbleConfig& config,
                             const CriticalValues* precomputed) {
    const std::vector<double> y =
        config.transform == LevelTransform::Log ? prices.log_prices() : prices.prices();
    BubbleReport report = run_bubble_test(std::span<const double>(y), config, precomputed);
    report.asset_id = prices.asset_id();
    report.bsadf_dates.assign(prices.dates().begin() + static_cast<std::ptrdiff_t>(report.first_end),
                              prices.dates().end());
    return report;
}

BubbleReport run_bubble_test(const timeseries::ReturnSeries& returns, const BubbleConfig& config,
                             const CriticalValues* precomputed) {
    BubbleReport report = run_bubble_test(std::span<const double>(returns.values()), config, precomputed);
    report.asset_id = returns.asset_id();
    report.bsadf_dates.assign(returns.dates().begin() + static_cast<std::ptrdiff_t>(report.first_end),
                              returns.dates().end());
    report.warnings.push_back("tested on returns rather than price levels");
    return report;
}

} // namespace coinrisk::bubbles
