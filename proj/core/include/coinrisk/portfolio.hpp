#pragma once

#include "coinrisk/copulas.hpp"
#include "coinrisk/garch.hpp"
#include "coinrisk/timeseries.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace coinrisk::portfolio {

/// Conditional variances of two assets and their conditional covariance.
struct CovariancePath {
    std::vector<double> h_i;
    std::vector<double> h_j;
    std::vector<double> h_ij;
    /// Optional; empty or aligned with the variances.
    std::vector<timeseries::Date> dates;
};

/// Throws std::invalid_argument on length mismatch, non-positive variances or
/// |h_ij| > sqrt(h_i h_j) beyond rounding.
void validate(const CovariancePath& cov);

/// h_ij = rho_t sqrt(h_i h_j). rho must lie in [-1,1].
CovariancePath conditional_covariance(std::span<const double> h_i, std::span<const double> h_j,
                                      std::span<const double> rho);

/// Copula-implied correlation proxy per observation of a fit's own sample.
std::vector<double> correlation_path(const copulas::CopulaFit& cop);

/// Uses the fits' conditional variances and the copula's correlation proxy.
/// Throws std::invalid_argument when the three samples differ in length.
CovariancePath conditional_covariance(const garch::GarchFit& fit_i, const garch::GarchFit& fit_j,
                                      const copulas::CopulaFit& cop);

struct Weight {
    double value = 0.5;
    /// Zero denominator: the weight was set to 0.5.
    bool degenerate = false;
};

/// Variance-minimizing share of the crypto asset,
/// (h_asset - h_cross) / (h_crypto - 2 h_cross + h_asset), clamped to [0,1].
Weight optimal_weight(double h_crypto, double h_asset, double h_cross);
/// The same ratio before clamping; NaN for a zero denominator.
double optimal_weight_unclamped(double h_crypto, double h_asset, double h_cross);

/// w^2 h_i + (1-w)^2 h_j + 2 w (1-w) h_ij.
double portfolio_variance(double w, double h_i, double h_j, double h_ij);
std::vector<double> portfolio_variance_path(std::span<const double> weights, const CovariancePath& cov);

/// 1 - mean(var_mixed) / mean(var_benchmark). Negative when the mix is riskier.
double risk_reduction(std::span<const double> var_benchmark, std::span<const double> var_mixed);

/// Inverse of an empirical CDF: linear interpolation of the sorted sample at
/// position u (n + 1), held flat beyond the extreme order statistics.
class EmpiricalQuantile {
public:
    /// Requires at least 50 finite values.
    explicit EmpiricalQuantile(std::vector<double> sample);
    double operator()(double u) const;
    std::size_t size() const { return sorted_.size(); }
    const std::vector<double>& sorted() const { return sorted_; }
    /// Rank-based uniform of a new value against the sample, kept inside (0,1).
    double cdf(double x) const;

private:
    std::vector<double> sorted_;
};

struct VarOptions {
    double level = 0.99;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
};

/// One-step Monte Carlo value at risk of the loss -(w e_i + (1-w) e_j) per date.
/// Pairs are drawn from the copula at that date's parameters, mapped through
/// the inverse empirical marginals of the standardized residuals and scaled by
/// sqrt(h). Date t uses seed + t. Throws std::invalid_argument for a level
/// outside [0.5, 0.9999] or misaligned inputs.
std::vector<double> var_forecast(const CovariancePath& cov, std::span<const double> weights, copulas::Family family,
                                 const std::vector<copulas::CopulaParams>& params, const EmpiricalQuantile& marg_i,
                                 const EmpiricalQuantile& marg_j, const VarOptions& opts);

struct CoverageTest {
    double lr_uc = 0.0;
    double lr_ind = 0.0;
    double lr_stat = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::size_t exceedances = 0;
    /// All flags equal: only the unconditional part was used (chi-square 1).
    bool degenerate = false;
};

/// Christoffersen's joint test of correct exceedance rate (1 - level) and
/// first-order independence, referred to chi-square(2). Requires n >= 100.
CoverageTest conditional_coverage_test(std::span<const std::uint8_t> exceedances, double level);

struct PortfolioConfig {
    double level = 0.99;
    /// Share of the sample used for estimation; the remainder is evaluated.
    double estimation_fraction = 0.75;
    /// Evaluate on the estimation sample instead.
    bool in_sample = false;
    std::size_t var_draws = 10000;
    std::uint64_t seed = 0;
    garch::FitOptions garch_options;
};

struct PortfolioReport {
    std::string crypto_id;
    std::string asset_id;
    /// e.g. "BPI-STR vs STR".
    std::string comparison;
    garch::Variant crypto_model = garch::Variant::Garch;
    garch::Variant asset_model = garch::Variant::Garch;
    copulas::CopulaFamily copula;
    std::vector<timeseries::Date> dates;
    std::vector<double> weight_path;
    std::vector<double> variance_path;
    std::vector<double> benchmark_variance_path;
    double mean_variance = 0.0;
    double benchmark_mean_variance = 0.0;
    double risk_reduction = 0.0;
    /// The mixed portfolio was riskier than the benchmark.
    bool riskier = false;
    std::vector<double> var_path;
    std::vector<std::uint8_t> exceedance_flags;
    CoverageTest cc_test;
    double level = 0.99;
    std::size_t n_estimation = 0;
    std::size_t n_evaluation = 0;
    bool in_sample = false;
    std::size_t degenerate_weights = 0;
    std::vector<std::string> warnings;
};

/// Benchmark holds only `asset`; the mix holds `crypto` and `asset` with
/// Kroner–Ng weights. The two series must share dates.
PortfolioReport evaluate_pair(const timeseries::ReturnSeries& crypto, const timeseries::ReturnSeries& asset,
                              const garch::GarchSpec& crypto_model, const garch::GarchSpec& asset_model,
                              const copulas::CopulaFamily& copula, const PortfolioConfig& config);

struct PortfolioPair {
    std::string crypto;
    std::string asset;
};

/// BPI and ETH against STR, BdR and Oil, in that order.
std::vector<PortfolioPair> default_design();
/// "BPI-STR".
std::string pair_key(const PortfolioPair& p);
/// "BPI-STR vs STR".
std::string comparison_label(const PortfolioPair& p);

struct PortfolioInputs {
    std::map<std::string, timeseries::ReturnSeries> returns;
    std::map<std::string, garch::GarchSpec> models;
    /// Keyed by pair_key.
    std::map<std::string, copulas::CopulaFamily> copulas;
};

/// One report per design pair; pair k uses seed mix64(config.seed + k).
/// Throws std::invalid_argument when an input is missing.
std::vector<PortfolioReport> evaluate_portfolios(const PortfolioInputs& inputs, const std::vector<PortfolioPair>& design,
                                                 const PortfolioConfig& config);

} // namespace coinrisk::portfolio
