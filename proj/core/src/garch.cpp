#include "coinrisk/garch.hpp"

#include "coinrisk/error.hpp"
#include "coinrisk/optimize.hpp"
#include "coinrisk/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace coinrisk::garch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kAbsNormalMean = std::sqrt(2.0 / std::numbers::pi);
constexpr double kVarianceFloor = 1e-12;

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }
double safe_log(double x) { return std::log(std::max(x, 1e-10)); }

/// E|z|^phi for standard normal z.
double abs_normal_moment(double phi) {
    return std::pow(2.0, phi / 2.0) * std::tgamma((phi + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

/// One step of the variance recursion. Lags that fall before the sample use
/// the pre-sample variance: eps^2 -> s2, |eps| -> sqrt(s2), sign and z terms neutral.
class Recursion {
public:
    Recursion(const GarchSpec& spec, const GarchParams& p, double presample_variance)
        : spec_(spec), p_(p), s2_(presample_variance) {}

    double next(const double* eps, const double* sig2, std::size_t t) const {
        const auto has = [t](std::size_t lag) { return lag <= t; };
        const auto e2 = [&](std::size_t lag) {
            if (!has(lag)) return s2_;
            const double e = eps[t - lag];
            return e * e;
        };
        const auto s = [&](std::size_t lag) { return has(lag) ? sig2[t - lag] : s2_; };
        const auto negative = [&](std::size_t lag) { return has(lag) && eps[t - lag] < 0.0 ? 1.0 : 0.0; };

        const auto& a = p_.alpha;
        const auto& b = p_.beta;
        switch (spec_.tag) {
        case Variant::Garch:
        case Variant::GarchM:
        case Variant::IGarch: {
            double v = p_.omega;
            for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * e2(i + 1);
            for (std::size_t j = 0; j < b.size(); ++j) v += b[j] * s(j + 1);
            return v;
        }
        case Variant::CGarch: {
            const double level = p_.omega;
            return level + a[0] * (e2(1) - level) + b[0] * (s(1) - level);
        }
        case Variant::CmtGarch: {
            const double inner = p_.omega + (a[0] + p_.gamma * negative(2)) * e2(2) + b[0] * s(2);
            return p_.omega + a[0] * e2(1) + b[0] * inner;
        }
        case Variant::TGarch: {
            double v = p_.omega + p_.gamma * e2(1) * negative(1);
            for (std::size_t i = 0; i < a.size(); ++i) v += a[i] * e2(i + 1);
            for (std::size_t j = 0; j < b.size(); ++j) v += b[j] * s(j + 1);
            return v;
        }
        case Variant::EGarch: {
            double log_v = p_.omega;
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (!has(i + 1)) continue;
                const double z = eps[t - i - 1] / std::sqrt(sig2[t - i - 1]);
                log_v += a[i] * z + p_.gamma * (std::abs(z) - kAbsNormalMean);
            }
            for (std::size_t j = 0; j < b.size(); ++j) log_v += b[j] * std::log(s(j + 1));
            return std::exp(log_v);
        }
        case Variant::PGarch:
        case Variant::APGarch: {
            const double phi = p_.phi_power;
            const double g = spec_.tag == Variant::APGarch ? p_.gamma : 0.0;
            double v = p_.omega;
            for (std::size_t i = 0; i < a.size(); ++i) {
                double shock = 0.0;
                if (has(i + 1)) {
                    const double e = eps[t - i - 1];
                    shock = std::abs(e) - g * e;
                } else {
                    shock = std::sqrt(s2_);
                }
                v += a[i] * std::pow(shock, phi);
            }
            for (std::size_t j = 0; j < b.size(); ++j) v += b[j] * std::pow(s(j + 1), phi / 2.0);
            return std::pow(v, 2.0 / phi);
        }
        }
        return std::numeric_limits<double>::quiet_NaN();
    }

private:
    const GarchSpec& spec_;
    const GarchParams& p_;
    double s2_;
};

/// Non-throwing filter used inside the optimizer. Returns false when a
/// variance leaves (0, inf).
bool run_filter(std::span<const double> r, const GarchSpec& spec, const GarchParams& p, std::vector<double>& eps,
                std::vector<double>& sig2) {
    const std::size_t n = r.size();
    eps.resize(n);
    sig2.resize(n);
    const double rbar = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
    const double lambda = spec.tag == Variant::GarchM ? p.lambda_m : 0.0;

    double mean_e = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double prev = t == 0 ? rbar : r[t - 1];
        eps[t] = r[t] - p.mean_const - p.ar1 * prev;
        mean_e += eps[t];
    }
    mean_e /= static_cast<double>(n);
    double s2 = 0.0;
    for (double e : eps) s2 += (e - mean_e) * (e - mean_e);
    s2 = std::max(s2 / static_cast<double>(n), kVarianceFloor);

    const Recursion rec(spec, p, s2);
    for (std::size_t t = 0; t < n; ++t) {
        const double v = t == 0 ? s2 : rec.next(eps.data(), sig2.data(), t);
        if (!(v > 0.0) || !std::isfinite(v)) return false;
        sig2[t] = v;
        const double prev = t == 0 ? rbar : r[t - 1];
        eps[t] = r[t] - p.mean_const - p.ar1 * prev - lambda * v;
    }
    return true;
}

GarchParams start_params(const GarchSpec& spec, double mean, double var) {
    GarchParams p;
    p.mean_const = mean;
    p.ar1 = 0.0;
    const auto q = static_cast<std::size_t>(spec.q);
    const auto pp = static_cast<std::size_t>(spec.p);
    const auto spread = [](double total, std::size_t k) { return std::vector<double>(k, total / static_cast<double>(k)); };
    p.alpha = spread(0.08, q);
    p.beta = spread(0.85, pp);
    p.omega = 0.05 * var;
    switch (spec.tag) {
    case Variant::Garch:
    case Variant::GarchM:
        break;
    case Variant::IGarch:
        p.alpha = spread(0.1, q);
        p.beta = spread(0.9, pp);
        p.omega = 0.01 * var;
        break;
    case Variant::CGarch:
        p.omega = var;
        break;
    case Variant::CmtGarch:
        p.beta = {0.75};
        p.gamma = 0.05;
        break;
    case Variant::TGarch:
        p.alpha = spread(0.05, q);
        p.gamma = 0.08;
        break;
    case Variant::EGarch:
        p.alpha = spread(0.0, q);
        p.beta = spread(0.9, pp);
        p.gamma = 0.15;
        p.omega = (1.0 - 0.9) * std::log(var);
        break;
    case Variant::PGarch:
    case Variant::APGarch:
        p.phi_power = 2.0;
        p.omega = 0.05 * var;
        break;
    }
    return p;
}

} // namespace

std::string_view to_string(Variant v) {
    switch (v) {
    case Variant::Garch: return "GARCH";
    case Variant::GarchM: return "GARCH_M";
    case Variant::IGarch: return "I_GARCH";
    case Variant::CGarch: return "C_GARCH";
    case Variant::CmtGarch: return "CMT_GARCH";
    case Variant::TGarch: return "T_GARCH";
    case Variant::EGarch: return "E_GARCH";
    case Variant::PGarch: return "P_GARCH";
    case Variant::APGarch: return "AP_GARCH";
    }
    return "?";
}

Variant variant_from_string(std::string_view tag) {
    for (Variant v : kAllVariants) {
        if (to_string(v) == tag) return v;
    }
    throw std::invalid_argument("unknown GARCH variant '" + std::string(tag) + "'");
}

void validate_params(const GarchSpec& spec, const GarchParams& p) {
    const auto fail = [&](const std::string& why) {
        throw std::invalid_argument(std::string(to_string(spec.tag)) + ": " + why);
    };
    if (spec.p < 1 || spec.q < 1) fail("orders must satisfy p >= 1, q >= 1");
    if ((spec.tag == Variant::CGarch || spec.tag == Variant::CmtGarch) && (spec.p != 1 || spec.q != 1)) {
        fail("only order (1,1) is defined");
    }
    if (p.alpha.size() != static_cast<std::size_t>(spec.q) || p.beta.size() != static_cast<std::size_t>(spec.p)) {
        fail("alpha/beta lengths must equal q/p");
    }
    const auto all_finite = [&] {
        for (double x : p.alpha) if (!std::isfinite(x)) return false;
        for (double x : p.beta) if (!std::isfinite(x)) return false;
        return std::isfinite(p.mean_const) && std::isfinite(p.ar1) && std::isfinite(p.omega) &&
               std::isfinite(p.gamma) && std::isfinite(p.lambda_m) && std::isfinite(p.phi_power);
    };
    if (!all_finite()) fail("non-finite parameter");
    if (spec.tag == Variant::EGarch) return;

    if (!(p.omega > 0.0)) fail("omega must be positive");
    for (double x : p.alpha) if (x < 0.0) fail("alpha must be non-negative");
    for (double x : p.beta) if (x < 0.0) fail("beta must be non-negative");
    switch (spec.tag) {
    case Variant::IGarch:
        if (std::abs(sum(p.alpha) + sum(p.beta) - 1.0) > 1e-9) fail("sum(alpha) + sum(beta) must equal 1");
        break;
    case Variant::TGarch:
    case Variant::CmtGarch:
        if (p.alpha[0] + p.gamma < 0.0) fail("alpha + gamma must be non-negative");
        break;
    case Variant::PGarch:
        if (!(p.phi_power > 0.0)) fail("phi must be positive");
        break;
    case Variant::APGarch:
        if (!(p.phi_power > 0.0)) fail("phi must be positive");
        if (!(std::abs(p.gamma) < 1.0)) fail("|gamma| must be below 1");
        break;
    default:
        break;
    }
}

std::size_t parameter_count(const GarchSpec& spec) {
    const auto p = static_cast<std::size_t>(spec.p);
    const auto q = static_cast<std::size_t>(spec.q);
    const std::size_t mean = 2;
    switch (spec.tag) {
    case Variant::Garch: return mean + 1 + p + q;
    case Variant::GarchM: return mean + 1 + p + q + 1;
    case Variant::IGarch: return mean + 1 + p + q - 1;
    case Variant::CGarch: return mean + 3;
    case Variant::CmtGarch: return mean + 4;
    case Variant::TGarch: return mean + 1 + p + q + 1;
    case Variant::EGarch: return mean + 1 + p + q + 1;
    case Variant::PGarch: return mean + 1 + p + q + 1;
    case Variant::APGarch: return mean + 1 + p + q + 2;
    }
    return 0;
}

FilterResult filter_variance(std::span<const double> r, const GarchSpec& spec, const GarchParams& p) {
    if (r.empty()) throw std::invalid_argument("filter_variance: empty return series");
    validate_params(spec, p);
    FilterResult out;
    if (!run_filter(r, spec, p, out.residuals, out.cond_variance)) {
        throw NumericalError(std::string(to_string(spec.tag)) + ": non-finite or non-positive variance");
    }
    return out;
}

double gaussian_nll(std::span<const double> residuals, std::span<const double> cond_variance) {
    if (residuals.size() != cond_variance.size()) {
        throw std::invalid_argument("gaussian_nll: length mismatch");
    }
    const double log_2pi = std::log(2.0 * std::numbers::pi);
    double total = 0.0;
    for (std::size_t t = 0; t < residuals.size(); ++t) {
        total += log_2pi + std::log(cond_variance[t]) + residuals[t] * residuals[t] / cond_variance[t];
    }
    return 0.5 * total;
}

double neg_log_likelihood(std::span<const double> r, const GarchSpec& spec, const GarchParams& p) {
    const FilterResult f = filter_variance(r, spec, p);
    return gaussian_nll(f.residuals, f.cond_variance);
}

InformationCriteria information_criteria(double loglik, std::size_t k, std::size_t n) {
    if (n <= 1) throw std::invalid_argument("information_criteria: need n >= 2");
    if (k < 1) throw std::invalid_argument("information_criteria: need k >= 1");
    const double dk = static_cast<double>(k);
    const double dn = static_cast<double>(n);
    const double dev = -2.0 * loglik;
    return {dev + 2.0 * dk, dev + std::log(dn) * dk, dev + 2.0 * dk * std::log(std::log(dn))};
}

double persistence(const GarchParams& p) { return sum(p.alpha) + sum(p.beta) + 0.5 * p.gamma; }

bool is_explosive(const GarchSpec& spec, const GarchParams& p) {
    const double sa = sum(p.alpha);
    const double sb = sum(p.beta);
    switch (spec.tag) {
    case Variant::Garch:
    case Variant::GarchM:
    case Variant::CGarch: return sa + sb >= 1.0;
    case Variant::IGarch: return false;
    case Variant::CmtGarch: {
        const double a = p.alpha[0], b = p.beta[0];
        return a + b * (a + 0.5 * p.gamma) + b * b >= 1.0;
    }
    case Variant::TGarch: return sa + sb + 0.5 * p.gamma >= 1.0;
    case Variant::EGarch: return std::abs(sb) >= 1.0;
    case Variant::PGarch:
    case Variant::APGarch: {
        const double phi = p.phi_power;
        const double g = spec.tag == Variant::APGarch ? p.gamma : 0.0;
        const double kappa = 0.5 * (std::pow(1.0 - g, phi) + std::pow(1.0 + g, phi)) * abs_normal_moment(phi);
        return sa * kappa + sb >= 1.0;
    }
    }
    return true;
}

namespace detail {

std::vector<double> encode(const GarchSpec& spec, const GarchParams& p, double center, double scale) {
    std::vector<double> th;
    th.push_back((p.mean_const - center) / scale);
    th.push_back(std::atanh(std::clamp(p.ar1 / 0.99, -0.999999, 0.999999)));
    const double var = scale * scale;
    switch (spec.tag) {
    case Variant::Garch:
    case Variant::GarchM:
    case Variant::CGarch:
        th.push_back(safe_log(p.omega / var));
        for (double a : p.alpha) th.push_back(safe_log(a));
        for (double b : p.beta) th.push_back(safe_log(b));
        if (spec.tag == Variant::GarchM) th.push_back(p.lambda_m * scale);
        break;
    case Variant::IGarch: {
        th.push_back(safe_log(p.omega / var));
        // softmax coordinates relative to beta_1, which is eliminated
        const double ref = safe_log(p.beta[0]);
        for (double a : p.alpha) th.push_back(safe_log(a) - ref);
        for (std::size_t j = 1; j < p.beta.size(); ++j) th.push_back(safe_log(p.beta[j]) - ref);
        break;
    }
    case Variant::CmtGarch:
    case Variant::TGarch:
        th.push_back(safe_log(p.omega / var));
        for (double a : p.alpha) th.push_back(safe_log(a));
        for (double b : p.beta) th.push_back(safe_log(b));
        th.push_back(safe_log(p.gamma + p.alpha[0]));
        break;
    case Variant::EGarch: {
        const double sb = sum(p.beta);
        th.push_back(p.omega - (1.0 - sb) * std::log(var));
        for (double a : p.alpha) th.push_back(a);
        for (double b : p.beta) th.push_back(std::atanh(std::clamp(b, -0.999999, 0.999999)));
        th.push_back(p.gamma);
        break;
    }
    case Variant::PGarch:
    case Variant::APGarch:
        th.push_back(safe_log(p.omega / std::pow(scale, p.phi_power)));
        for (double a : p.alpha) th.push_back(safe_log(a));
        for (double b : p.beta) th.push_back(safe_log(b));
        th.push_back(logit(std::clamp((p.phi_power - 0.1) / 3.9, 1e-6, 1.0 - 1e-6)));
        if (spec.tag == Variant::APGarch) th.push_back(std::atanh(std::clamp(p.gamma / 0.999, -0.999999, 0.999999)));
        break;
    }
    return th;
}

GarchParams decode(const GarchSpec& spec, std::span<const double> th, double center, double scale) {
    GarchParams p;
    const auto q = static_cast<std::size_t>(spec.q);
    const auto pp = static_cast<std::size_t>(spec.p);
    std::size_t k = 0;
    p.mean_const = center + scale * th[k++];
    p.ar1 = 0.99 * std::tanh(th[k++]);
    const double var = scale * scale;
    p.alpha.resize(q);
    p.beta.resize(pp);
    switch (spec.tag) {
    case Variant::Garch:
    case Variant::GarchM:
    case Variant::CGarch:
        p.omega = var * std::exp(th[k++]);
        for (auto& a : p.alpha) a = std::exp(th[k++]);
        for (auto& b : p.beta) b = std::exp(th[k++]);
        if (spec.tag == Variant::GarchM) p.lambda_m = th[k++] / scale;
        break;
    case Variant::IGarch: {
        p.omega = var * std::exp(th[k++]);
        double denom = 1.0;  // exp(0) for the eliminated beta_1
        for (auto& a : p.alpha) {
            a = std::exp(th[k++]);
            denom += a;
        }
        for (std::size_t j = 1; j < pp; ++j) {
            p.beta[j] = std::exp(th[k++]);
            denom += p.beta[j];
        }
        for (auto& a : p.alpha) a /= denom;
        for (std::size_t j = 1; j < pp; ++j) p.beta[j] /= denom;
        p.beta[0] = 1.0 - sum(p.alpha) - std::accumulate(p.beta.begin() + 1, p.beta.end(), 0.0);
        p.beta[0] = std::max(p.beta[0], 0.0);
        break;
    }
    case Variant::CmtGarch:
    case Variant::TGarch:
        p.omega = var * std::exp(th[k++]);
        for (auto& a : p.alpha) a = std::exp(th[k++]);
        for (auto& b : p.beta) b = std::exp(th[k++]);
        p.gamma = std::exp(th[k++]) - p.alpha[0];
        break;
    case Variant::EGarch: {
        const double w = th[k++];
        for (auto& a : p.alpha) a = th[k++];
        for (auto& b : p.beta) b = std::tanh(th[k++]);
        p.gamma = th[k++];
        p.omega = w + (1.0 - sum(p.beta)) * std::log(var);
        break;
    }
    case Variant::PGarch:
    case Variant::APGarch: {
        const double w = th[k++];
        for (auto& a : p.alpha) a = std::exp(th[k++]);
        for (auto& b : p.beta) b = std::exp(th[k++]);
        p.phi_power = 0.1 + 3.9 * logistic(th[k++]);
        if (spec.tag == Variant::APGarch) p.gamma = 0.999 * std::tanh(th[k++]);
        p.omega = std::pow(scale, p.phi_power) * std::exp(w);
        break;
    }
    }
    return p;
}

} // namespace detail

GarchFit fit_garch(std::span<const double> r, const GarchSpec& spec, const FitOptions& opts) {
    const std::size_t n = r.size();
    if (n < 100) {
        throw std::invalid_argument("fit_garch: need at least 100 observations, got " + std::to_string(n));
    }
    GarchFit fit;
    fit.variant = spec;
    if (n < 250) fit.warnings.push_back("short sample (" + std::to_string(n) + " < 250 observations)");

    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
    double var = 0.0;
    for (double x : r) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n);
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    if (*lo == *hi || !(var > 0.0)) throw std::invalid_argument("fit_garch: degenerate (zero-variance) data");
    const double scale = std::sqrt(var);

    // validates orders up front
    GarchParams start = start_params(spec, mean, var);
    validate_params(spec, start);

    std::vector<double> eps, sig2;
    const auto objective = [&](std::span<const double> th) {
        const GarchParams p = detail::decode(spec, th, mean, scale);
        if (!run_filter(r, spec, p, eps, sig2)) return kInf;
        return gaussian_nll(eps, sig2) / static_cast<double>(n);
    };

    const std::vector<double> center = detail::encode(spec, start, mean, scale);
    optimize::MultiStartOptions ms;
    ms.starts = opts.starts;
    ms.local.max_evals = opts.max_evals_per_start;
    ms.local.initial_step = 0.3;
    ms.local.f_tol = 1e-12;
    ms.local.x_tol = 1e-6;
    ms.spread.assign(center.size(), 1.0);
    ms.spread[0] = 0.1;
    ms.spread[1] = 0.3;
    const optimize::Result best = optimize::multi_start(objective, center, ms);
    if (!std::isfinite(best.value)) {
        throw NumericalError(std::string(to_string(spec.tag)) + ": no feasible parameter set found");
    }

    fit.params = detail::decode(spec, best.x, mean, scale);
    FilterResult f = filter_variance(r, spec, fit.params);
    fit.loglik = -gaussian_nll(f.residuals, f.cond_variance);
    fit.n_obs = n;
    fit.k = parameter_count(spec);
    const InformationCriteria ic = information_criteria(fit.loglik, fit.k, n);
    fit.aic = ic.aic;
    fit.bic = ic.bic;
    fit.hq = ic.hq;
    fit.std_residuals.resize(n);
    for (std::size_t t = 0; t < n; ++t) fit.std_residuals[t] = f.residuals[t] / std::sqrt(f.cond_variance[t]);
    fit.cond_variance = std::move(f.cond_variance);
    fit.residuals = std::move(f.residuals);
    fit.persistence = persistence(fit.params);
    fit.explosive = fit.persistence > 1.0;
    fit.converged = best.converged;
    if (fit.explosive) fit.warnings.push_back("persistence exceeds 1");
    return fit;
}

GarchFit fit_garch(const timeseries::ReturnSeries& r, const GarchSpec& spec, const FitOptions& opts) {
    return fit_garch(std::span<const double>(r.values()), spec, opts);
}

ModelSelection select_model(std::span<const double> r, const std::vector<GarchSpec>& variants,
                            const FitOptions& opts) {
    if (variants.empty()) throw std::invalid_argument("select_model: empty variant list");
    ModelSelection out;
    for (const GarchSpec& spec : variants) {
        try {
            out.ranked.push_back(fit_garch(r, spec, opts));
        } catch (const std::exception& e) {
            out.failures.push_back({spec, e.what()});
        }
    }
    if (out.ranked.empty()) {
        throw std::runtime_error("select_model: every variant failed to fit");
    }
    const auto listing = [](const GarchFit& f) { return static_cast<int>(f.variant.tag); };
    const auto rank_by = [&](auto key) {
        std::vector<std::size_t> idx(out.ranked.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            const double ka = key(out.ranked[a]);
            const double kb = key(out.ranked[b]);
            if (ka != kb) return ka < kb;
            return listing(out.ranked[a]) < listing(out.ranked[b]);
        });
        return idx;
    };
    const auto bic_idx = rank_by([](const GarchFit& f) { return f.bic; });
    const auto hq_idx = rank_by([](const GarchFit& f) { return f.hq; });
    for (std::size_t i : bic_idx) out.bic_order.push_back(out.ranked[i].variant.tag);
    for (std::size_t i : hq_idx) out.hq_order.push_back(out.ranked[i].variant.tag);
    const auto aic_idx = rank_by([](const GarchFit& f) { return f.aic; });
    std::vector<GarchFit> sorted;
    sorted.reserve(out.ranked.size());
    for (std::size_t i : aic_idx) sorted.push_back(std::move(out.ranked[i]));
    out.ranked = std::move(sorted);
    return out;
}

std::vector<double> simulate_garch(const GarchSpec& spec, const GarchParams& p, std::size_t n, std::uint64_t seed,
                                   const SimulateOptions& opts) {
    validate_params(spec, p);
    const bool explosive = is_explosive(spec, p);
    if (explosive && !opts.allow_explosive) {
        throw std::invalid_argument(std::string(to_string(spec.tag)) +
                                    ": explosive parameters (set allow_explosive to simulate anyway)");
    }

    // starting variance: the unconditional level when it exists
    double init = 0.0;
    const double sa = sum(p.alpha), sb = sum(p.beta);
    switch (spec.tag) {
    case Variant::CGarch: init = p.omega; break;
    case Variant::EGarch: init = std::abs(sb) < 1.0 ? std::exp(p.omega / (1.0 - sb)) : 1.0; break;
    case Variant::PGarch:
    case Variant::APGarch: {
        const double g = spec.tag == Variant::APGarch ? p.gamma : 0.0;
        const double phi = p.phi_power;
        const double kappa = 0.5 * (std::pow(1.0 - g, phi) + std::pow(1.0 + g, phi)) * abs_normal_moment(phi);
        const double denom = 1.0 - sa * kappa - sb;
        init = denom > 0.0 ? std::pow(p.omega / denom, 2.0 / phi) : std::pow(p.omega, 2.0 / phi);
        break;
    }
    default: {
        const double pers = spec.tag == Variant::CmtGarch ? sa + sb * (sa + 0.5 * p.gamma) + sb * sb
                                                          : sa + sb + 0.5 * p.gamma;
        const double level = spec.tag == Variant::CmtGarch ? p.omega * (1.0 + sb) : p.omega;
        init = pers < 1.0 ? level / (1.0 - pers) : level;
        break;
    }
    }
    init = std::max(init, kVarianceFloor);

    const std::size_t total = opts.burn_in + n;
    std::vector<double> eps(total), sig2(total), r(total);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double lambda = spec.tag == Variant::GarchM ? p.lambda_m : 0.0;
    const double r_start = std::abs(p.ar1) < 1.0 ? p.mean_const / (1.0 - p.ar1) : p.mean_const;

    const Recursion rec(spec, p, init);
    for (std::size_t t = 0; t < total; ++t) {
        const double v = t == 0 ? init : rec.next(eps.data(), sig2.data(), t);
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw NumericalError("simulate_garch: variance left (0, inf) at step " + std::to_string(t));
        }
        sig2[t] = v;
        eps[t] = std::sqrt(v) * normal(rng);
        const double prev = t == 0 ? r_start : r[t - 1];
        r[t] = p.mean_const + p.ar1 * prev + lambda * v + eps[t];
    }
    return std::vector<double>(r.begin() + static_cast<std::ptrdiff_t>(opts.burn_in), r.end());
}

double forecast_variance(const GarchSpec& spec, const GarchParams& p, std::span<const double> residuals,
                         std::span<const double> cond_variance) {
    if (residuals.empty() || residuals.size() != cond_variance.size()) {
        throw std::invalid_argument("forecast_variance: need equal, non-empty paths");
    }
    const Recursion rec(spec, p, cond_variance.front());
    return rec.next(residuals.data(), cond_variance.data(), residuals.size());
}

} // namespace coinrisk::garch
