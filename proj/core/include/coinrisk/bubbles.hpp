#pragma once

#include "coinrisk/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coinrisk::bubbles {

/// Right-tailed ADF machinery for the Phillips–Shi–Yu recursive tests.
///
/// Conventions: the input has T levels y[0..T-1]. A window is a contiguous
/// block y[s..e]; the regression on it is
///     dy_t = mu (+ trend) + (delta - 1) y_{t-1} + sum_{i=1..p} phi_i dy_{t-i} + e_t,
/// for t = s+p+1..e, and its statistic is the t-ratio on y_{t-1}.
/// The minimum window is floor(r0 T) levels, and window ends step by one
/// observation, so the end grid for BSADF is e = w-1 .. T-1.
struct AdfSpec {
    int lags = 1;
    bool trend = false;
};

/// Shortest window (in levels) for which the regression has a residual degree of freedom.
std::size_t min_window_length(const AdfSpec& spec);

/// floor(r0 * T), guarded against floating-point underflow of exact products.
std::size_t window_from_fraction(double r0, std::size_t T);

/// ADF t-ratio on the whole of `y`. Throws std::invalid_argument when `y` is
/// too short and coinrisk::NumericalError when the regressors are singular.
double adf_stat(std::span<const double> y, const AdfSpec& spec = {});

/// Backward sup ADF at end fraction r2: sup of ADF over windows ending at
/// floor(r2 T) - 1 with at least floor(r0 T) levels.
double bsadf_at(std::span<const double> y, double r2, double r0, const AdfSpec& spec = {});

/// Sup ADF over expanding windows y[0..e], e >= floor(r0 T) - 1.
double sadf(std::span<const double> y, double r0, const AdfSpec& spec = {});

struct GsadfResult {
    double stat = 0.0;
    /// Also available from the same pass.
    double sadf_stat = 0.0;
    /// bsadf[k] is the BSADF statistic for window end first_end + k.
    std::vector<double> bsadf;
    std::size_t first_end = 0;
};

/// Generalized sup ADF: sup over ends of the BSADF sequence.
GsadfResult gsadf(std::span<const double> y, double r0, const AdfSpec& spec = {});

struct CriticalValues {
    std::vector<double> quantiles;
    /// Indexed like `quantiles`.
    std::vector<double> sadf;
    std::vector<double> gsadf;
    /// bsadf[q][k]: quantile q of BSADF at end first_end + k.
    std::vector<std::vector<double>> bsadf;
    std::size_t first_end = 0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
};

/// Empirical quantiles of SADF, GSADF and the per-end BSADF under a driftless
/// Gaussian random walk of length T. Replication i uses seed + i.
/// Throws std::invalid_argument for reps < 200 or infeasible (T, r0).
CriticalValues mc_critical_values(std::size_t T, double r0, const AdfSpec& spec, std::size_t reps,
                                  const std::vector<double>& quantiles, std::uint64_t seed);

struct BubbleEpisode {
    std::size_t start_index = 0;
    /// One past the last explosive index.
    std::size_t end_index = 0;
    double peak_bsadf = 0.0;
};

/// Episodes where `bsadf` exceeds `cv`. An episode opens where bsadf > cv after
/// being <= cv (or at index 0) and closes at the next index with bsadf <= cv
/// (or the sequence end). Episodes shorter than min_duration are dropped.
/// Indices refer to positions in the input sequences.
std::vector<BubbleEpisode> date_stamp(std::span<const double> bsadf, std::span<const double> cv,
                                      std::size_t min_duration = 1);

enum class LevelTransform { Log, None };

struct BubbleConfig {
    double r0 = 0.1;
    AdfSpec adf;
    std::size_t mc_reps = 10000;
    std::vector<double> quantiles = {0.90, 0.95, 0.99};
    std::uint64_t seed = 0;
    std::size_t min_duration = 1;
    /// Applied to price levels before testing.
    LevelTransform transform = LevelTransform::Log;
};

struct BubbleReport {
    std::string asset_id;
    double sadf_stat = 0.0;
    double gsadf_stat = 0.0;
    std::vector<double> bsadf_sequence;
    /// Date of each BSADF entry (empty when the input was undated).
    std::vector<timeseries::Date> bsadf_dates;
    std::size_t first_end = 0;
    CriticalValues critical_values;
    /// The per-end 95% sequence used for date stamping.
    std::vector<double> cv95_sequence;
    /// Observation indices into the tested series.
    std::vector<BubbleEpisode> episodes;
    double r0 = 0.1;
    int lags = 1;
    bool trend = false;
    std::size_t mc_reps = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// SADF, GSADF, Monte Carlo critical values and date-stamped episodes.
/// Requires T >= 100. When `precomputed` is given it must come from
/// mc_critical_values for the same T, r0 and ADF spec, and include 0.95.
BubbleReport run_bubble_test(std::span<const double> y, const BubbleConfig& config,
                             const CriticalValues* precomputed = nullptr);
/// Tests (log) price levels.
BubbleReport run_bubble_test(const timeseries::PriceSeries& prices, const BubbleConfig& config,
                             const CriticalValues* precomputed = nullptr);
/// Tests the return values themselves and records a warning.
BubbleReport run_bubble_test(const timeseries::ReturnSeries& returns, const BubbleConfig& config,
                             const CriticalValues* precomputed = nullptr);

/// Quantile list actually simulated for `config`: its quantiles plus 0.95, sorted.
std::vector<double> effective_quantiles(const BubbleConfig& config);

/// Type-7 (linear interpolation) empirical quantile of sorted data.
double sorted_quantile(std::span<const double> sorted, double prob);

} // namespace coinrisk::bubbles
