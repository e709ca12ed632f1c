#pragma once

#include "coinrisk/timeseries.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace coinrisk::copulas {

enum class Family { Gaussian, StudentT, Plackett, Frank, Gumbel, RotatedGumbel, Sjc };

inline constexpr std::array<Family, 7> kAllFamilies = {
    Family::Gaussian, Family::StudentT,      Family::Plackett, Family::Frank,
    Family::Gumbel,   Family::RotatedGumbel, Family::Sjc,
};

std::string_view to_string(Family f);
/// Accepts Gaussian, StudentT, Plackett, Frank, Gumbel, RotatedGumbel, SJC.
Family family_from_string(std::string_view tag);

/// Plackett and Frank have no time-varying form.
bool supports_time_varying(Family f);

struct CopulaFamily {
    Family tag = Family::Gaussian;
    bool time_varying = false;
};

/// "Gaussian", "TV-Gaussian", ...
std::string label(const CopulaFamily& f);
/// Parses the output of label().
CopulaFamily family_from_label(std::string_view text);

/// Every static family followed by every time-varying one.
std::vector<CopulaFamily> all_families();

/// Parameters of every family. Each family reads only its own fields.
///
/// For time-varying fits the static fields (rho, delta, lam_u, lam_l) hold the
/// static MLE used as the lagged value over the first steps, and psi / psi_lower
/// hold the evolution coefficients (psi_lower only for SJC).
struct CopulaParams {
    double rho = 0.0;
    double nu = 30.0;
    double pi_plackett = 1.0;
    double lambda_frank = 0.0;
    double delta = 1.0;
    double lam_u = 0.1;
    double lam_l = 0.1;
    std::array<double, 3> psi{};
    std::array<double, 3> psi_lower{};
};

/// Throws std::invalid_argument when `p` is outside the family's range.
void validate_params(Family f, const CopulaParams& p);

struct UniformPair {
    std::vector<double> u;
    std::vector<double> v;
    /// Optional; empty or of the same length as u.
    std::vector<timeseries::Date> dates;
};

/// Throws std::invalid_argument for unequal lengths or values outside (0,1).
void validate_pair(const UniformPair& pair);

/// (1 - e^{-x}) / (1 + e^{-x}).
double logistic_transform(double x);

/// rank(z_t) / (n + 1), ties sharing their average rank. Requires n >= 50 and
/// throws std::invalid_argument when more than half the sample is tied.
std::vector<double> pit_transform(std::span<const double> z);

/// Exact values on the boundary of the unit square; (u,v) outside [0,1]^2 throws.
double copula_cdf(Family f, const CopulaParams& p, double u, double v);
/// Mixed second partial derivative of the CDF, closed form for every family.
/// Throws coinrisk::NumericalError if the value is not finite.
double copula_density(Family f, const CopulaParams& p, double u, double v);
/// Natural log of copula_density; -infinity when the density underflows.
double copula_log_density(Family f, const CopulaParams& p, double u, double v);

struct TailDependence {
    double lower = 0.0;
    double upper = 0.0;
};

TailDependence tail_dependence(Family f, const CopulaParams& p);

/// Kendall's tau implied by the parameters.
double kendall_tau(Family f, const CopulaParams& p);

/// Linear-correlation proxy: rho for Gaussian and Student-t, sin(pi tau / 2) otherwise.
double correlation_proxy(Family f, const CopulaParams& p);

struct CopulaFit {
    CopulaFamily family;
    CopulaParams params;
    double loglik = 0.0;
    double aic = 0.0;
    std::size_t k = 0;
    std::size_t n_obs = 0;
    TailDependence tail_dep;
    /// Time-varying fits: rho_t, delta_t or the SJC upper tail per observation.
    std::vector<double> param_path;
    /// SJC lower tail per observation.
    std::vector<double> param_path_lower;
    bool converged = true;
    /// A parameter sits at the edge of its search range.
    bool at_boundary = false;
    std::vector<std::string> warnings;
};

std::size_t parameter_count(const CopulaFamily& f);

/// Static MLE. Requires n >= 100.
CopulaFit fit_static_copula(const UniformPair& pair, Family f);
/// Time-varying MLE of the evolution coefficients. Requires n >= 150 and a
/// family with a time-varying form.
CopulaFit fit_tv_copula(const UniformPair& pair, Family f);
/// Dispatches on f.time_varying.
CopulaFit fit_copula(const UniformPair& pair, const CopulaFamily& f);

struct CopulaFailure {
    CopulaFamily family;
    std::string message;
};

struct CopulaSelection {
    /// Ascending AIC; ties keep the input order.
    std::vector<CopulaFit> ranked;
    std::vector<CopulaFailure> failures;
};

/// Throws std::runtime_error if every fit fails and std::invalid_argument for an empty list.
CopulaSelection select_copula(const UniformPair& pair, const std::vector<CopulaFamily>& families);

/// Per-observation parameters of a fit evaluated on `pair`, which may extend
/// past the estimation sample. Static fits return copies of fit.params.
std::vector<CopulaParams> parameter_path(const CopulaFit& fit, const UniformPair& pair);

/// Exact sampler, deterministic in seed.
UniformPair simulate_copula(Family f, const CopulaParams& p, std::size_t n, std::uint64_t seed);

/// Conditional CDF of v given u, i.e. dC/du.
double conditional_cdf(Family f, const CopulaParams& p, double u, double v);

} // namespace coinrisk::copulas
