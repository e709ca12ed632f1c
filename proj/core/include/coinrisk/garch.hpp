#pragma once

#include "coinrisk/timeseries.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coinrisk::garch {

/// The nine variance specifications, in their canonical listing order.
/// Listing order breaks information-criterion ties.
enum class Variant { Garch, GarchM, IGarch, CGarch, CmtGarch, TGarch, EGarch, PGarch, APGarch };

inline constexpr std::array<Variant, 9> kAllVariants = {
    Variant::Garch,  Variant::GarchM, Variant::IGarch, Variant::CGarch,  Variant::CmtGarch,
    Variant::TGarch, Variant::EGarch, Variant::PGarch, Variant::APGarch,
};

std::string_view to_string(Variant v);
/// Accepts the tags GARCH, GARCH_M, I_GARCH, C_GARCH, CMT_GARCH, T_GARCH, E_GARCH, P_GARCH, AP_GARCH.
Variant variant_from_string(std::string_view tag);

/// A variant together with its lag orders: p variance lags, q shock lags.
/// C_GARCH and CMT_GARCH exist only as (1,1).
struct GarchSpec {
    Variant tag = Variant::Garch;
    int p = 1;
    int q = 1;
};

/// Coefficients of the AR(1) mean equation and the variance recursion.
///
/// Field use by variant:
///  - omega: intercept of the variance recursion (log scale for E_GARCH, power
///    scale for P/AP_GARCH). For C_GARCH it is the long-run level sigma-bar^2.
///  - alpha (q entries), beta (p entries): ARCH and GARCH terms.
///  - gamma: asymmetry. T_GARCH: extra loading on eps^2_{t-1} when eps_{t-1} < 0.
///    E_GARCH: coefficient on |z| - sqrt(2/pi). AP_GARCH: shift in (|eps| - gamma eps).
///    CMT_GARCH: threshold loading on eps^2_{t-2}.
///  - lambda_m: risk premium on sigma_t^2 in the GARCH_M mean.
///  - phi_power: power of P_GARCH / AP_GARCH.
struct GarchParams {
    double mean_const = 0.0;
    double ar1 = 0.0;
    double omega = 0.0;
    std::vector<double> alpha;
    std::vector<double> beta;
    double gamma = 0.0;
    double lambda_m = 0.0;
    double phi_power = 2.0;
};

/// Throws std::invalid_argument if `p` violates the constraints of `spec`.
void validate_params(const GarchSpec& spec, const GarchParams& p);

/// Number of free parameters (mean equation included).
std::size_t parameter_count(const GarchSpec& spec);

struct FilterResult {
    std::vector<double> cond_variance;
    /// Mean-equation residuals eps_t.
    std::vector<double> residuals;
};

/// Run the mean equation and the variance recursion over `r`.
/// sigma_0^2 is the sample variance of the mean-equation residuals; r_{-1} is
/// the sample mean of r. Throws std::invalid_argument on constraint violation
/// and coinrisk::NumericalError if a variance is non-positive or non-finite.
FilterResult filter_variance(std::span<const double> r, const GarchSpec& spec, const GarchParams& p);

/// Gaussian negative log-likelihood 0.5 * sum(ln 2pi + ln s2_t + e_t^2 / s2_t).
double gaussian_nll(std::span<const double> residuals, std::span<const double> cond_variance);

/// Filter then evaluate the Gaussian NLL.
double neg_log_likelihood(std::span<const double> r, const GarchSpec& spec, const GarchParams& p);

struct InformationCriteria {
    double aic = 0.0;
    double bic = 0.0;
    double hq = 0.0;
};

/// AIC = -2LL + 2k, BIC = -2LL + k ln n, HQ = -2LL + 2k ln ln n.
/// Throws std::invalid_argument for n <= 1 or k < 1.
InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n);

/// sum(alpha) + sum(beta) + 0.5 gamma, applied uniformly to every variant.
double persistence(const GarchParams& p);

struct GarchFit {
    GarchSpec variant;
    GarchParams params;
    double loglik = 0.0;
    std::size_t n_obs = 0;
    std::size_t k = 0;
    std::vector<double> cond_variance;
    std::vector<double> residuals;
    std::vector<double> std_residuals;
    double aic = 0.0;
    double bic = 0.0;
    double hq = 0.0;
    double persistence = 0.0;
    bool converged = false;
    /// persistence > 1
    bool explosive = false;
    std::vector<std::string> warnings;
};

struct FitOptions {
    int starts = 8;
    int max_evals_per_start = 3000;
};

/// Gaussian QMLE of `spec` on `r`. Requires n >= 100 (a warning is recorded
/// below 250). A fit whose optimizer budget ran out is returned with
/// converged = false. Throws std::invalid_argument for short or constant data.
GarchFit fit_garch(std::span<const double> r, const GarchSpec& spec, const FitOptions& opts = {});
GarchFit fit_garch(const timeseries::ReturnSeries& r, const GarchSpec& spec, const FitOptions& opts = {});

struct FitFailure {
    GarchSpec variant;
    std::string message;
};

struct ModelSelection {
    /// Ascending AIC; ties keep listing order.
    std::vector<GarchFit> ranked;
    /// Variant order under BIC and HQ (ascending).
    std::vector<Variant> bic_order;
    std::vector<Variant> hq_order;
    std::vector<FitFailure> failures;
};

/// Fit each spec and rank. Throws std::runtime_error if every fit fails.
ModelSelection select_model(std::span<const double> r, const std::vector<GarchSpec>& variants,
                            const FitOptions& opts = {});

struct SimulateOptions {
    std::size_t burn_in = 500;
    /// Permit parameters outside the stationary region.
    bool allow_explosive = false;
};

/// Simulate `n` returns with Gaussian innovations. Deterministic in `seed`.
/// Throws std::invalid_argument for explosive parameters unless allowed.
std::vector<double> simulate_garch(const GarchSpec& spec, const GarchParams& p, std::size_t n, std::uint64_t seed,
                                   const SimulateOptions& opts = {});

/// True when the variance process is outside its stationary region.
bool is_explosive(const GarchSpec& spec, const GarchParams& p);

/// One-step-ahead variance sigma^2_{n+1} given the filtered path.
double forecast_variance(const GarchSpec& spec, const GarchParams& p, std::span<const double> residuals,
                         std::span<const double> cond_variance);

namespace detail {
/// Map between constrained parameters and the unconstrained vector searched by
/// the optimizer. `scale` is the standard deviation of r, `center` its mean.
std::vector<double> encode(const GarchSpec& spec, const GarchParams& p, double center, double scale);
GarchParams decode(const GarchSpec& spec, std::span<const double> theta, double center, double scale);
} // namespace detail

} // namespace coinrisk::garch
