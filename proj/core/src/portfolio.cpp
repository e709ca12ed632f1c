#include "coinrisk/portfolio.hpp"

#include "coinrisk/rng.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace coinrisk::portfolio {

namespace {

double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// n * log(p) with 0 log 0 = 0.
double xlogy(double n, double p) { return n == 0.0 ? 0.0 : n * std::log(p); }

double chi2_sf(double x, double dof) {
    if (!(x > 0.0)) return 1.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double type7_quantile(std::vector<double>& values, double prob) {
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<double> slice(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    return {v.begin() + static_cast<std::ptrdiff_t>(begin), v.begin() + static_cast<std::ptrdiff_t>(end)};
}

} // namespace

void validate(const CovariancePath& cov) {
    const std::size_t n = cov.h_i.size();
    if (cov.h_j.size() != n || cov.h_ij.size() != n || (!cov.dates.empty() && cov.dates.size() != n)) {
        throw std::invalid_argument("CovariancePath: sequences differ in length");
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (!(cov.h_i[t] > 0.0) || !(cov.h_j[t] > 0.0)) {
            throw std::invalid_argument("CovariancePath: non-positive variance at index " + std::to_string(t));
        }
        const double bound = std::sqrt(cov.h_i[t] * cov.h_j[t]);
        if (!(std::abs(cov.h_ij[t]) <= bound * (1.0 + 1e-12))) {
            throw std::invalid_argument("CovariancePath: covariance exceeds the Cauchy-Schwarz bound at index " +
                                        std::to_string(t));
        }
    }
}

CovariancePath conditional_covariance(std::span<const double> h_i, std::span<const double> h_j,
                                      std::span<const double> rho) {
    if (h_i.size() != h_j.size() || h_i.size() != rho.size()) {
        throw std::invalid_argument("conditional_covariance: misaligned inputs");
    }
    CovariancePath cov;
    cov.h_i.assign(h_i.begin(), h_i.end());
    cov.h_j.assign(h_j.begin(), h_j.end());
    cov.h_ij.resize(h_i.size());
    for (std::size_t t = 0; t < h_i.size(); ++t) {
        if (!(std::abs(rho[t]) <= 1.0)) throw std::invalid_argument("conditional_covariance: |rho| > 1");
        cov.h_ij[t] = rho[t] * std::sqrt(h_i[t] * h_j[t]);
    }
    validate(cov);
    return cov;
}

std::vector<double> correlation_path(const copulas::CopulaFit& cop) {
    const copulas::Family f = cop.family.tag;
    if (!cop.family.time_varying) return std::vector<double>(cop.n_obs, copulas::correlation_proxy(f, cop.params));
    std::vector<double> out(cop.param_path.size());
    copulas::CopulaParams p = cop.params;
    for (std::size_t t = 0; t < out.size(); ++t) {
        switch (f) {
        case copulas::Family::Gaussian:
        case copulas::Family::StudentT: p.rho = cop.param_path[t]; break;
        case copulas::Family::Gumbel:
        case copulas::Family::RotatedGumbel: p.delta = cop.param_path[t]; break;
        default:
            p.lam_u = cop.param_path[t];
            p.lam_l = cop.param_path_lower.at(t);
        }
        out[t] = copulas::correlation_proxy(f, p);
    }
    return out;
}

CovariancePath conditional_covariance(const garch::GarchFit& fit_i, const garch::GarchFit& fit_j,
                                      const copulas::CopulaFit& cop) {
    const auto rho = correlation_path(cop);
    if (fit_i.cond_variance.size() != fit_j.cond_variance.size() || rho.size() != fit_i.cond_variance.size()) {
        throw std::invalid_argument("conditional_covariance: fits were estimated on different samples");
    }
    return conditional_covariance(fit_i.cond_variance, fit_j.cond_variance, rho);
}

double optimal_weight_unclamped(double h_crypto, double h_asset, double h_cross) {
    const double den = h_crypto - 2.0 * h_cross + h_asset;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (h_asset - h_cross) / den;
}

Weight optimal_weight(double h_crypto, double h_asset, double h_cross) {
    if (!(h_crypto > 0.0) || !(h_asset > 0.0)) throw std::invalid_argument("optimal_weight: variances must be positive");
    if (std::abs(h_cross) > std::sqrt(h_crypto * h_asset) * (1.0 + 1e-12)) {
        throw std::invalid_argument("optimal_weight: covariance exceeds the Cauchy-Schwarz bound");
    }
    const double w = optimal_weight_unclamped(h_crypto, h_asset, h_cross);
    if (std::isnan(w)) return {0.5, true};
    return {std::clamp(w, 0.0, 1.0), false};
}

double portfolio_variance(double w, double h_i, double h_j, double h_ij) {
    return w * w * h_i + (1.0 - w) * (1.0 - w) * h_j + 2.0 * w * (1.0 - w) * h_ij;
}

std::vector<double> portfolio_variance_path(std::span<const double> weights, const CovariancePath& cov) {
    if (weights.size() != cov.h_i.size()) throw std::invalid_argument("portfolio_variance_path: misaligned inputs");
    std::vector<double> out(weights.size());
    for (std::size_t t = 0; t < out.size(); ++t) {
        out[t] = portfolio_variance(weights[t], cov.h_i[t], cov.h_j[t], cov.h_ij[t]);
    }
    return out;
}

double risk_reduction(std::span<const double> var_benchmark, std::span<const double> var_mixed) {
    if (var_benchmark.size() != var_mixed.size() || var_benchmark.empty()) {
        throw std::invalid_argument("risk_reduction: sequences must be non-empty and of equal length");
    }
    const double bench = mean(var_benchmark);
    if (!(bench > 0.0)) throw std::invalid_argument("risk_reduction: benchmark variance is zero");
    return 1.0 - mean(var_mixed) / bench;
}

EmpiricalQuantile::EmpiricalQuantile(std::vector<double> sample) : sorted_(std::move(sample)) {
    if (sorted_.size() < 50) throw std::invalid_argument("EmpiricalQuantile: need at least 50 residuals");
    for (double x : sorted_) {
        if (!std::isfinite(x)) throw std::invalid_argument("EmpiricalQuantile: non-finite residual");
    }
    std::sort(sorted_.begin(), sorted_.end());
}

double EmpiricalQuantile::operator()(double u) const {
    const std::size_t n = sorted_.size();
    const double pos = u * static_cast<double>(n + 1);
    if (pos <= 1.0) return sorted_.front();
    if (pos >= static_cast<double>(n)) return sorted_.back();
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    return sorted_[lo - 1] + frac * (sorted_[lo] - sorted_[lo - 1]);
}

double EmpiricalQuantile::cdf(double x) const {
    const auto below = std::lower_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    const auto upto = std::upper_bound(sorted_.begin(), sorted_.end(), x) - sorted_.begin();
    const double rank = 0.5 * static_cast<double>(below + upto) + 0.5;
    const double n1 = static_cast<double>(sorted_.size() + 1);
    return std::clamp(rank / n1, 0.5 / n1, 1.0 - 0.5 / n1);
}

std::vector<double> var_forecast(const CovariancePath& cov, std::span<const double> weights, copulas::Family family,
                                 const std::vector<copulas::CopulaParams>& params, const EmpiricalQuantile& marg_i,
                                 const EmpiricalQuantile& marg_j, const VarOptions& opts) {
    if (!(opts.level >= 0.5 && opts.level <= 0.9999)) throw std::invalid_argument("var_forecast: level outside [0.5, 0.9999]");
    if (opts.draws < 100) throw std::invalid_argument("var_forecast: need at least 100 draws");
    validate(cov);
    const std::size_t n = cov.h_i.size();
    if (weights.size() != n || params.size() != n) throw std::invalid_argument("var_forecast: misaligned inputs");
    std::vector<double> out(n);
    std::vector<double> losses(opts.draws);
    for (std::size_t t = 0; t < n; ++t) {
        const copulas::UniformPair draws = copulas::simulate_copula(family, params[t], opts.draws, opts.seed + t);
        const double si = std::sqrt(cov.h_i[t]);
        const double sj = std::sqrt(cov.h_j[t]);
        const double w = weights[t];
        for (std::size_t k = 0; k < opts.draws; ++k) {
            losses[k] = -(w * si * marg_i(draws.u[k]) + (1.0 - w) * sj * marg_j(draws.v[k]));
        }
        out[t] = type7_quantile(losses, opts.level);
    }
    return out;
}

CoverageTest conditional_coverage_test(std::span<const std::uint8_t> exceedances, double level) {
    const std::size_t n = exceedances.size();
    if (n < 100) throw std::invalid_argument("conditional_coverage_test: need at least 100 observations");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("conditional_coverage_test: level outside (0,1)");
    const double p = 1.0 - level;
    CoverageTest out;
    out.n = n;
    double n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (exceedances[t] > 1) throw std::invalid_argument("conditional_coverage_test: flags must be 0 or 1");
        out.exceedances += exceedances[t];
        if (t == 0) continue;
        const bool prev = exceedances[t - 1] != 0, cur = exceedances[t] != 0;
        (prev ? (cur ? n11 : n10) : (cur ? n01 : n00)) += 1.0;
    }
    const double x = static_cast<double>(out.exceedances);
    const double m = static_cast<double>(n) - x;
    const double pi_hat = x / static_cast<double>(n);
    out.lr_uc = -2.0 * (xlogy(m, 1.0 - p) + xlogy(x, p) - xlogy(m, 1.0 - pi_hat) - xlogy(x, pi_hat));
    out.lr_uc = std::max(out.lr_uc, 0.0);
    if (out.exceedances == 0 || out.exceedances == n) {
        out.degenerate = true;
        out.lr_stat = out.lr_uc;
        out.p_value = chi2_sf(out.lr_uc, 1.0);
        return out;
    }
    const double pi01 = n00 + n01 > 0 ? n01 / (n00 + n01) : 0.0;
    const double pi11 = n10 + n11 > 0 ? n11 / (n10 + n11) : 0.0;
    const double pi2 = (n01 + n11) / (n00 + n01 + n10 + n11);
    const double l_restricted = xlogy(n00 + n10, 1.0 - pi2) + xlogy(n01 + n11, pi2);
    const double l_markov = xlogy(n00, 1.0 - pi01) + xlogy(n01, pi01) + xlogy(n10, 1.0 - pi11) + xlogy(n11, pi11);
    out.lr_ind = std::max(-2.0 * (l_restricted - l_markov), 0.0);
    out.lr_stat = out.lr_uc + out.lr_ind;
    out.p_value = chi2_sf(out.lr_stat, 2.0);
    return out;
}

PortfolioReport evaluate_pair(const timeseries::ReturnSeries& crypto, const timeseries::ReturnSeries& asset,
                              const garch::GarchSpec& crypto_model, const garch::GarchSpec& asset_model,
                              const copulas::CopulaFamily& copula, const PortfolioConfig& config) {
    if (crypto.dates() != asset.dates()) throw std::invalid_argument("evaluate_pair: series are not aligned");
    if (!(config.estimation_fraction > 0.0 && config.estimation_fraction <= 1.0)) {
        throw std::invalid_argument("evaluate_pair: estimation fraction outside (0,1]");
    }
    const std::size_t n = crypto.size();
    const std::size_t n_est =
        config.in_sample ? n : static_cast<std::size_t>(std::floor(config.estimation_fraction * static_cast<double>(n)));
    const std::size_t eval_begin = config.in_sample ? 0 : n_est;
    if (n - eval_begin < 100) throw std::invalid_argument("evaluate_pair: evaluation window shorter than 100");

    PortfolioReport rep;
    rep.crypto_id = crypto.asset_id();
    rep.asset_id = asset.asset_id();
    rep.comparison = comparison_label({rep.crypto_id, rep.asset_id});
    rep.crypto_model = crypto_model.tag;
    rep.asset_model = asset_model.tag;
    rep.copula = copula;
    rep.level = config.level;
    rep.in_sample = config.in_sample;
    rep.n_estimation = n_est;

    // Marginals: estimate on the estimation window, filter the whole sample.
    const std::span<const double> rc(crypto.values()), ra(asset.values());
    const garch::GarchFit fc = garch::fit_garch(rc.first(n_est), crypto_model, config.garch_options);
    const garch::GarchFit fa = garch::fit_garch(ra.first(n_est), asset_model, config.garch_options);
    for (const auto* fit : {&fc, &fa}) {
        for (const auto& w : fit->warnings) rep.warnings.push_back(std::string(garch::to_string(fit->variant.tag)) + ": " + w);
    }
    const garch::FilterResult xc = garch::filter_variance(rc, crypto_model, fc.params);
    const garch::FilterResult xa = garch::filter_variance(ra, asset_model, fa.params);

    std::vector<double> zc(n), za(n);
    for (std::size_t t = 0; t < n; ++t) {
        zc[t] = xc.residuals[t] / std::sqrt(xc.cond_variance[t]);
        za[t] = xa.residuals[t] / std::sqrt(xa.cond_variance[t]);
    }
    const EmpiricalQuantile marg_c(slice(zc, 0, n_est));
    const EmpiricalQuantile marg_a(slice(za, 0, n_est));

    // Dependence: PIT in the estimation window, ranks against it afterwards.
    copulas::UniformPair est_pair;
    est_pair.u = copulas::pit_transform(std::span<const double>(zc).first(n_est));
    est_pair.v = copulas::pit_transform(std::span<const double>(za).first(n_est));
    const copulas::CopulaFit cop = copulas::fit_copula(est_pair, copula);
    copulas::UniformPair full_pair = est_pair;
    for (std::size_t t = n_est; t < n; ++t) {
        full_pair.u.push_back(marg_c.cdf(zc[t]));
        full_pair.v.push_back(marg_a.cdf(za[t]));
    }
    const std::vector<copulas::CopulaParams> params_all = copulas::parameter_path(cop, full_pair);

    std::vector<double> rho(n);
    for (std::size_t t = 0; t < n; ++t) rho[t] = copulas::correlation_proxy(copula.tag, params_all[t]);

    const std::size_t m = n - eval_begin;
    rep.n_evaluation = m;
    rep.dates.assign(crypto.dates().begin() + static_cast<std::ptrdiff_t>(eval_begin), crypto.dates().end());
    CovariancePath cov = conditional_covariance(std::span<const double>(xc.cond_variance).subspan(eval_begin),
                                                std::span<const double>(xa.cond_variance).subspan(eval_begin),
                                                std::span<const double>(rho).subspan(eval_begin));
    cov.dates = rep.dates;

    rep.weight_path.resize(m);
    for (std::size_t t = 0; t < m; ++t) {
        const Weight w = optimal_weight(cov.h_i[t], cov.h_j[t], cov.h_ij[t]);
        rep.weight_path[t] = w.value;
        rep.degenerate_weights += w.degenerate ? 1 : 0;
    }
    if (rep.degenerate_weights > 0) {
        rep.warnings.push_back(std::to_string(rep.degenerate_weights) + " dates with a zero weight denominator");
    }
    rep.variance_path = portfolio_variance_path(rep.weight_path, cov);
    rep.benchmark_variance_path = cov.h_j;
    rep.mean_variance = mean(rep.variance_path);
    rep.benchmark_mean_variance = mean(rep.benchmark_variance_path);
    rep.risk_reduction = risk_reduction(rep.benchmark_variance_path, rep.variance_path);
    rep.riskier = rep.risk_reduction < 0.0;
    if (rep.riskier) rep.warnings.push_back("mixed portfolio is riskier than the benchmark");

    const std::vector<copulas::CopulaParams> params_eval(params_all.begin() + static_cast<std::ptrdiff_t>(eval_begin),
                                                         params_all.end());
    rep.var_path = var_forecast(cov, rep.weight_path, copula.tag, params_eval, marg_c, marg_a,
                                {config.level, config.var_draws, config.seed});
    rep.exceedance_flags.resize(m);
    for (std::size_t t = 0; t < m; ++t) {
        const double w = rep.weight_path[t];
        const double loss = -(w * xc.residuals[eval_begin + t] + (1.0 - w) * xa.residuals[eval_begin + t]);
        rep.exceedance_flags[t] = loss > rep.var_path[t] ? 1 : 0;
    }
    rep.cc_test = conditional_coverage_test(rep.exceedance_flags, config.level);
    if (rep.cc_test.degenerate) rep.warnings.push_back("coverage test degenerate: only the unconditional part was used");
    return rep;
}

std::vector<PortfolioPair> default_design() {
    return {{"BPI", "STR"}, {"ETH", "STR"}, {"BPI", "BdR"}, {"ETH", "BdR"}, {"BPI", "Oil"}, {"ETH", "Oil"}};
}

std::string pair_key(const PortfolioPair& p) { return p.crypto + "-" + p.asset; }

std::string comparison_label(const PortfolioPair& p) { return pair_key(p) + " vs " + p.asset; }

std::vector<PortfolioReport> evaluate_portfolios(const PortfolioInputs& inputs, const std::vector<PortfolioPair>& design,
                                                 const PortfolioConfig& config) {
    auto need = [](const auto& map, const std::string& key, const char* what) -> const auto& {
        const auto it = map.find(key);
        if (it == map.end()) throw std::invalid_argument(std::string("evaluate_portfolios: no ") + what + " for " + key);
        return it->second;
    };
    std::vector<PortfolioReport> out;
    out.reserve(design.size());
    for (std::size_t k = 0; k < design.size(); ++k) {
        const PortfolioPair& pair = design[k];
        PortfolioConfig cfg = config;
        cfg.seed = mix64(config.seed + k);
        out.push_back(evaluate_pair(need(inputs.returns, pair.crypto, "returns"), need(inputs.returns, pair.asset, "returns"),
                                    need(inputs.models, pair.crypto, "GARCH model"),
                                    need(inputs.models, pair.asset, "GARCH model"),
                                    need(inputs.copulas, pair_key(pair), "copula family"), cfg));
    }
    return out;
}

} // namespace coinrisk::portfolio
